#include "semdyn/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semdyn {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::array<double, 2> sample_in_disc(const std::array<double, 2>& center, double radius,
                                     Rng& rng) {
    double r = radius * std::sqrt(rng.uniform());
    double phi = 2.0 * 3.14159265358979323846 * rng.uniform();
    return {center[0] + r * std::cos(phi), center[1] + r * std::sin(phi)};
}

bool in_unit_square(const std::array<double, 2>& p) {
    return p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0;
}

constexpr int kMaxResample = 10000;

}  // namespace

ShapeCode next_shape(const ShapeCode& shape, const EnvConfig& cfg) {
    auto it = std::find(cfg.shape_set.begin(), cfg.shape_set.end(), shape);
    if (it != cfg.shape_set.end()) {
        ++it;
        return it == cfg.shape_set.end() ? cfg.shape_set.front() : *it;
    }
    return shape_from_index((shape_index(shape) + 1) % 27);
}

ActionIntent interpret_action(const Scene& scene, const Action& a, const EnvConfig& cfg) {
    auto first = hit_test(a.p1(), scene, cfg);
    if (!first.has_value()) return NoOpIntent{};
    auto second = hit_test(a.p2(), scene, cfg);
    if (second.has_value() && *second == *first) return ShapeChangeIntent{*first};
    return DragIntent{*first, a.p2()};
}

Scene step(const Scene& scene, const Action& a, const EnvConfig& cfg) {
    const ActionIntent intent = interpret_action(scene, a, cfg);
    if (std::holds_alternative<NoOpIntent>(intent)) return scene;

    const SemanticGroundTruth gt = semantic_oracle(scene, cfg);
    Scene out = scene;

    if (const auto* drag = std::get_if<DragIntent>(&intent)) {
        const auto k = static_cast<std::size_t>(drag->slot);
        if (gt.locked[k]) return scene;
        auto& obj = *out.slots[k];
        obj.position[0] = clamp01(obj.position[0] +
                                  cfg.drag_fraction * (drag->target[0] - obj.position[0]));
        obj.position[1] = clamp01(obj.position[1] +
                                  cfg.drag_fraction * (drag->target[1] - obj.position[1]));
    } else {
        const auto k = static_cast<std::size_t>(std::get<ShapeChangeIntent>(intent).slot);
        if (gt.blocked[k]) return scene;
        out.slots[k]->shape = next_shape(out.slots[k]->shape, cfg);
    }
    return out;
}

Action sample_action(const Scene& scene, const EnvConfig& cfg, Rng& rng) {
    std::vector<int> occupied;
    for (int k = 0; k < scene.num_slots(); ++k)
        if (scene.slots[static_cast<std::size_t>(k)].has_value()) occupied.push_back(k);
    if (occupied.empty()) throw std::invalid_argument("sample_action: empty scene");

    const int slot = occupied[rng.uniform_int(occupied.size())];
    const auto& obj = *scene.slots[static_cast<std::size_t>(slot)];
    const bool click = cfg.click_enabled && rng.bernoulli(0.5);

    // First point: inside the chosen object and resolving to it under
    // hit_test. The object's center always qualifies, so this terminates.
    std::array<double, 2> p1 = obj.position;
    for (int i = 0; i < kMaxResample; ++i) {
        auto cand = sample_in_disc(obj.position, cfg.object_radius, rng);
        if (!in_unit_square(cand)) continue;
        auto hit = hit_test(cand, scene, cfg);
        if (hit.has_value() && *hit == slot) {
            p1 = cand;
            break;
        }
    }

    std::array<double, 2> p2{0.0, 0.0};
    if (click) {
        p2 = obj.position;
        for (int i = 0; i < kMaxResample; ++i) {
            auto cand = sample_in_disc(obj.position, cfg.object_radius, rng);
            if (!in_unit_square(cand)) continue;
            auto hit = hit_test(cand, scene, cfg);
            if (hit.has_value() && *hit == slot) {
                p2 = cand;
                break;
            }
        }
    } else {
        // Drag target anywhere that does not decode back into the object.
        for (int i = 0; i < kMaxResample; ++i) {
            std::array<double, 2> cand{rng.uniform(), rng.uniform()};
            auto hit = hit_test(cand, scene, cfg);
            if (!hit.has_value() || *hit != slot) {
                p2 = cand;
                break;
            }
        }
    }
    return Action{{p1[0], p1[1], p2[0], p2[1]}};
}

Trajectory rollout(const EnvConfig& cfg, Rng& rng, int length) {
    if (length < 1) throw std::invalid_argument("rollout length must be >= 1");
    Trajectory traj;
    traj.reserve(static_cast<std::size_t>(length));
    Scene scene = sample_scene(cfg, rng);
    for (int i = 0; i < length; ++i) {
        Action a = sample_action(scene, cfg, rng);
        Scene next = step(scene, a, cfg);
        traj.push_back(Transition{scene, a, next});
        scene = std::move(next);
    }
    return traj;
}

double property_delta(const double* row_a, const double* row_b, ObjectProperty property) {
    int lo = property == ObjectProperty::Position ? 0 : 2;
    int hi = property == ObjectProperty::Position ? 2 : 5;
    double sum = 0.0;
    for (int d = lo; d < hi; ++d) {
        double diff = row_a[d] - row_b[d];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

double property_delta(const std::vector<double>& enc_a, const std::vector<double>& enc_b,
                      int slot, ObjectProperty property) {
    if (enc_a.size() != enc_b.size()) throw std::invalid_argument("scene size mismatch");
    const auto offset = static_cast<std::size_t>(slot) * kObjectFeatures;
    if (offset + kObjectFeatures > enc_a.size())
        throw std::out_of_range("slot out of range");
    return property_delta(enc_a.data() + offset, enc_b.data() + offset, property);
}

}  // namespace semdyn
