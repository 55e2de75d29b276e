#include "semdyn/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semdyn {

namespace {

int component_digit(double v) {
    if (v == 0.0) return 0;
    if (v == 0.5) return 1;
    if (v == 1.0) return 2;
    return -1;
}

double digit_component(int d) { return d * 0.5; }

}  // namespace

bool shape_code_valid(const ShapeCode& s) {
    return component_digit(s.c[0]) >= 0 && component_digit(s.c[1]) >= 0 &&
           component_digit(s.c[2]) >= 0;
}

int shape_index(const ShapeCode& s) {
    int d0 = component_digit(s.c[0]);
    int d1 = component_digit(s.c[1]);
    int d2 = component_digit(s.c[2]);
    if (d0 < 0 || d1 < 0 || d2 < 0) throw std::invalid_argument("invalid shape code");
    return d0 * 9 + d1 * 3 + d2;
}

ShapeCode shape_from_index(int idx) {
    if (idx < 0 || idx >= 27) throw std::invalid_argument("shape index out of range");
    return ShapeCode{{digit_component(idx / 9), digit_component((idx / 3) % 3),
                      digit_component(idx % 3)}};
}

const std::vector<ShapeCode>& all_shape_codes() {
    static const std::vector<ShapeCode> codes = [] {
        std::vector<ShapeCode> v;
        v.reserve(27);
        for (int i = 0; i < 27; ++i) v.push_back(shape_from_index(i));
        return v;
    }();
    return codes;
}

int Scene::num_objects() const {
    int n = 0;
    for (const auto& s : slots)
        if (s.has_value()) ++n;
    return n;
}

void EnvConfig::validate() const {
    if (slots <= 0) throw std::invalid_argument("slots must be positive");
    if (lock_count.min < 0 || lock_count.min > lock_count.max)
        throw std::invalid_argument("bad lock_count range");
    if (regular_count.min < 0 || regular_count.min > regular_count.max)
        throw std::invalid_argument("bad regular_count range");
    if (lock_count.max + regular_count.max > slots)
        throw std::invalid_argument("max object count exceeds slot count");
    if (shape_set.empty()) throw std::invalid_argument("shape_set is empty");
    for (std::size_t i = 0; i < shape_set.size(); ++i) {
        if (!shape_code_valid(shape_set[i]))
            throw std::invalid_argument("invalid shape code in shape_set");
        for (std::size_t j = i + 1; j < shape_set.size(); ++j)
            if (shape_set[i] == shape_set[j])
                throw std::invalid_argument("duplicate shape in shape_set");
    }
    if (object_radius <= 0.0 || touch_threshold <= 0.0)
        throw std::invalid_argument("radius/threshold must be positive");
    if (drag_fraction <= 0.0 || drag_fraction > 1.0)
        throw std::invalid_argument("drag_fraction must be in (0,1]");
}

EnvConfig minimal_config(std::uint64_t seed) {
    EnvConfig cfg;
    cfg.slots = 5;
    cfg.lock_count = {0, 2};
    cfg.regular_count = {1, 3};
    cfg.shape_set = {shape_from_index(0), shape_from_index(1), shape_from_index(2)};
    cfg.click_enabled = false;
    cfg.seed = seed;
    return cfg;
}

EnvConfig multi_config(std::uint64_t seed) {
    EnvConfig cfg;
    cfg.slots = 7;
    cfg.lock_count = {0, 2};
    cfg.regular_count = {1, 5};
    cfg.shape_set = {shape_from_index(0), shape_from_index(1), shape_from_index(2),
                     shape_from_index(3), shape_from_index(4)};
    // Calibrated so the selected-object blocked probability lands near 22%.
    cfg.touch_threshold = 0.175;
    cfg.click_enabled = true;
    cfg.seed = seed;
    return cfg;
}

void encode_scene_into(const Scene& scene, double* out) {
    for (int k = 0; k < scene.num_slots(); ++k) {
        double* row = out + static_cast<std::size_t>(k) * kObjectFeatures;
        const auto& slot = scene.slots[static_cast<std::size_t>(k)];
        if (!slot.has_value()) {
            std::fill(row, row + kObjectFeatures, 0.0);
            continue;
        }
        row[0] = slot->position[0];
        row[1] = slot->position[1];
        row[2] = slot->shape.c[0];
        row[3] = slot->shape.c[1];
        row[4] = slot->shape.c[2];
        row[5] = slot->color.hue;
        row[6] = slot->color.sat;
        row[7] = slot->color.val;
    }
}

std::vector<double> encode_scene(const Scene& scene) {
    std::vector<double> out(static_cast<std::size_t>(scene.num_slots()) * kObjectFeatures);
    encode_scene_into(scene, out.data());
    return out;
}

Scene decode_scene(const std::vector<double>& features, int slots) {
    if (features.size() != static_cast<std::size_t>(slots) * kObjectFeatures)
        throw std::invalid_argument("feature vector size mismatch");
    Scene scene(slots);
    for (int k = 0; k < slots; ++k) {
        const double* row = features.data() + static_cast<std::size_t>(k) * kObjectFeatures;
        bool all_zero = std::all_of(row, row + kObjectFeatures, [](double v) { return v == 0.0; });
        if (all_zero) continue;
        ObjectState obj;
        obj.position = {row[0], row[1]};
        obj.shape = ShapeCode{{row[2], row[3], row[4]}};
        obj.color = ColorHSV{row[5], row[6], row[7]};
        scene.slots[static_cast<std::size_t>(k)] = obj;
    }
    return scene;
}

SemanticGroundTruth semantic_oracle(const Scene& scene, const EnvConfig& cfg) {
    const int k = scene.num_slots();
    SemanticGroundTruth gt;
    gt.locked.assign(static_cast<std::size_t>(k), false);
    gt.blocked.assign(static_cast<std::size_t>(k), false);

    for (int i = 0; i < k; ++i) {
        const auto& si = scene.slots[static_cast<std::size_t>(i)];
        if (!si.has_value()) continue;
        if (si->is_lock()) {
            gt.locked[static_cast<std::size_t>(i)] = true;
        } else {
            for (int j = 0; j < k; ++j) {
                const auto& sj = scene.slots[static_cast<std::size_t>(j)];
                if (j == i || !sj.has_value()) continue;
                if (sj->is_lock() && sj->shape == si->shape) {
                    gt.locked[static_cast<std::size_t>(i)] = true;
                    break;
                }
            }
        }
        for (int j = 0; j < k; ++j) {
            const auto& sj = scene.slots[static_cast<std::size_t>(j)];
            if (j == i || !sj.has_value()) continue;
            double dx = si->position[0] - sj->position[0];
            double dy = si->position[1] - sj->position[1];
            if (std::sqrt(dx * dx + dy * dy) < cfg.touch_threshold) {
                gt.blocked[static_cast<std::size_t>(i)] = true;
                break;
            }
        }
    }
    return gt;
}

Scene sample_scene(const EnvConfig& cfg, Rng& rng) {
    cfg.validate();
    const int locks = static_cast<int>(rng.uniform_range(cfg.lock_count.min, cfg.lock_count.max));
    const int regulars =
        static_cast<int>(rng.uniform_range(cfg.regular_count.min, cfg.regular_count.max));

    Scene scene(cfg.slots);
    for (int i = 0; i < locks + regulars; ++i) {
        ObjectState obj;
        obj.position = {rng.uniform(), rng.uniform()};
        obj.shape = cfg.shape_set[rng.uniform_int(cfg.shape_set.size())];
        if (i < locks) {
            obj.color = kLockColor;
        } else {
            obj.color = ColorHSV{rng.uniform(kRegularHueMin, kRegularHueMax), 1.0, 1.0};
        }
        scene.slots[static_cast<std::size_t>(i)] = obj;
    }
    return scene;
}

std::optional<int> hit_test(const std::array<double, 2>& point, const Scene& scene,
                            const EnvConfig& cfg) {
    std::optional<int> best;
    double best_dist = cfg.object_radius;
    for (int k = 0; k < scene.num_slots(); ++k) {
        const auto& slot = scene.slots[static_cast<std::size_t>(k)];
        if (!slot.has_value()) continue;
        double dx = point[0] - slot->position[0];
        double dy = point[1] - slot->position[1];
        double d = std::sqrt(dx * dx + dy * dy);
        if (d <= best_dist && (!best.has_value() || d < best_dist)) {
            best = k;
            best_dist = d;
        }
    }
    return best;
}

}  // namespace semdyn
