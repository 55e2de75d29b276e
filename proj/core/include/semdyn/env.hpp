#pragma once

#include <array>
#include <variant>
#include <vector>

#include "semdyn/scene.hpp"

namespace semdyn {

// Two consecutive click points (p1, p2), all components in [0,1].
struct Action {
    std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};

    std::array<double, 2> p1() const { return {v[0], v[1]}; }
    std::array<double, 2> p2() const { return {v[2], v[3]}; }
    bool operator==(const Action&) const = default;
};

struct DragIntent {
    int slot;
    std::array<double, 2> target;
};
struct ShapeChangeIntent {
    int slot;
};
struct NoOpIntent {};

using ActionIntent = std::variant<NoOpIntent, DragIntent, ShapeChangeIntent>;

struct Transition {
    Scene scene_t;
    Action action;
    Scene scene_t1;
};

using Trajectory = std::vector<Transition>;

// p1 misses everything -> NoOp. Both points inside the same object -> shape
// change. Otherwise drag towards p2.
ActionIntent interpret_action(const Scene& scene, const Action& a, const EnvConfig& cfg);

// Environment transition. Drags move an unlocked object drag_fraction of the
// way to the target (clamped to the arena); clicks advance an unblocked
// object's shape along the configured cycle. Locked/blocked targets leave
// the scene unchanged.
Scene step(const Scene& scene, const Action& a, const EnvConfig& cfg);

// Uniform random interaction: pick a non-empty slot, then drag or (when
// enabled) click with equal probability. Rejection-sampled so the action is
// guaranteed to decode to the intended intent on the chosen slot.
Action sample_action(const Scene& scene, const EnvConfig& cfg, Rng& rng);

// Fresh scene followed by `length` sampled transitions, scene-chained.
Trajectory rollout(const EnvConfig& cfg, Rng& rng, int length);

// Euclidean norm of the difference restricted to one property's feature
// dimensions (position: 0-1, shape: 2-4).
enum class ObjectProperty { Position, Shape };
double property_delta(const std::vector<double>& enc_a, const std::vector<double>& enc_b,
                      int slot, ObjectProperty property);
double property_delta(const double* row_a, const double* row_b, ObjectProperty property);

// Successor of `shape` in the configured cycle; shapes outside the set cycle
// through the full lexicographic 27-cycle instead.
ShapeCode next_shape(const ShapeCode& shape, const EnvConfig& cfg);

}  // namespace semdyn
