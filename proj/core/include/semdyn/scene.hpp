#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "semdyn/rng.hpp"

namespace semdyn {

// Number of features per object slot: x, y, shape (3), hue, sat, val.
inline constexpr int kObjectFeatures = 8;

// Discrete shape identity: three components, each 0, 0.5 or 1.
// There are exactly 27 codes, ordered lexicographically (0 < 0.5 < 1),
// which defines the shape index 0..26 and the default cycle order.
struct ShapeCode {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    bool operator==(const ShapeCode&) const = default;
    auto operator<=>(const ShapeCode&) const = default;
};

int shape_index(const ShapeCode& s);           // 0..26
ShapeCode shape_from_index(int idx);           // inverse of shape_index
bool shape_code_valid(const ShapeCode& s);
const std::vector<ShapeCode>& all_shape_codes();  // lexicographic 27

struct ColorHSV {
    double hue = 0.0;
    double sat = 0.0;
    double val = 0.0;

    bool operator==(const ColorHSV&) const = default;
};

// Locks are identified purely by color.
inline constexpr ColorHSV kLockColor{0.0, 1.0, 1.0};
inline constexpr double kRegularHueMin = 0.1;
inline constexpr double kRegularHueMax = 0.9;

struct ObjectState {
    std::array<double, 2> position{0.0, 0.0};  // in [0,1]^2
    ShapeCode shape;
    ColorHSV color;

    bool is_lock() const { return color == kLockColor; }
    bool operator==(const ObjectState&) const = default;
};

// Fixed-size slot list; empty slots encode as zero rows.
struct Scene {
    std::vector<std::optional<ObjectState>> slots;

    explicit Scene(int k = 0) : slots(static_cast<std::size_t>(k)) {}

    int num_slots() const { return static_cast<int>(slots.size()); }
    int num_objects() const;
    bool operator==(const Scene&) const = default;
};

struct SemanticGroundTruth {
    std::vector<bool> locked;
    std::vector<bool> blocked;
};

struct IntRange {
    int min = 0;
    int max = 0;
};

struct EnvConfig {
    int slots = 5;
    IntRange lock_count{0, 2};
    IntRange regular_count{1, 3};
    std::vector<ShapeCode> shape_set;  // distinct; also the click cycle order
    double object_radius = 0.075;
    double touch_threshold = 0.15;     // 2 * object_radius unless overridden
    double drag_fraction = 0.25;
    bool click_enabled = false;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument on violation
};

// The two scenarios studied: 5 slots / 3 shapes / drag only, and
// 7 slots / 5 shapes / drag+click.
EnvConfig minimal_config(std::uint64_t seed = 0);
EnvConfig multi_config(std::uint64_t seed = 0);

// Row-major K x 8 feature matrix; empty slots are zero rows.
std::vector<double> encode_scene(const Scene& scene);
void encode_scene_into(const Scene& scene, double* out);  // writes K*8 values
Scene decode_scene(const std::vector<double>& features, int slots);

// Ground-truth semantic flags. locked: slot is a lock or shares its shape
// with some lock. blocked: some other object's center is strictly closer
// than touch_threshold. Empty slots report false/false.
SemanticGroundTruth semantic_oracle(const Scene& scene, const EnvConfig& cfg);

// Random scene: lock and regular counts uniform over their ranges,
// occupied slots packed at low indices with locks first.
Scene sample_scene(const EnvConfig& cfg, Rng& rng);

// Nearest non-empty slot whose center is within object_radius of point;
// ties resolve to the lowest index.
std::optional<int> hit_test(const std::array<double, 2>& point, const Scene& scene,
                            const EnvConfig& cfg);

}  // namespace semdyn
