#include <doctest.h>

#include <cmath>

#include "semdyn/env.hpp"

using namespace semdyn;

namespace {

ObjectState regular_at(double x, double y, int shape_idx = 0) {
    ObjectState o;
    o.position = {x, y};
    o.shape = shape_from_index(shape_idx);
    o.color = ColorHSV{0.5, 1.0, 1.0};
    return o;
}

ObjectState lock_at(double x, double y, int shape_idx = 0) {
    ObjectState o = regular_at(x, y, shape_idx);
    o.color = kLockColor;
    return o;
}

int changed_slot_count(const Scene& a, const Scene& b) {
    int n = 0;
    for (int k = 0; k < a.num_slots(); ++k)
        if (a.slots[static_cast<std::size_t>(k)] != b.slots[static_cast<std::size_t>(k)]) ++n;
    return n;
}

}  // namespace

TEST_CASE("action interpretation") {
    EnvConfig cfg = minimal_config();
    Scene s(5);
    s.slots[0] = regular_at(0.3, 0.3);

    // first point misses everything
    auto intent = interpret_action(s, Action{{0.9, 0.9, 0.3, 0.3}}, cfg);
    CHECK(std::holds_alternative<NoOpIntent>(intent));

    // both points on the same object: shape change
    intent = interpret_action(s, Action{{0.3, 0.3, 0.31, 0.3}}, cfg);
    REQUIRE(std::holds_alternative<ShapeChangeIntent>(intent));
    CHECK(std::get<ShapeChangeIntent>(intent).slot == 0);

    // hit then a free target point: drag
    intent = interpret_action(s, Action{{0.3, 0.3, 0.8, 0.6}}, cfg);
    REQUIRE(std::holds_alternative<DragIntent>(intent));
    CHECK(std::get<DragIntent>(intent).slot == 0);
    CHECK(std::get<DragIntent>(intent).target == std::array<double, 2>{0.8, 0.6});
}

TEST_CASE("drag moves a quarter of the way to the target") {
    EnvConfig cfg = minimal_config();
    Scene s(5);
    s.slots[0] = regular_at(0.2, 0.2);
    Scene next = step(s, Action{{0.2, 0.2, 1.0, 0.2}}, cfg);
    CHECK(next.slots[0]->position[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(next.slots[0]->position[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(changed_slot_count(s, next) == 1);
    // everything but position is preserved
    CHECK(next.slots[0]->shape == s.slots[0]->shape);
    CHECK(next.slots[0]->color == s.slots[0]->color);
}

TEST_CASE("locks and locked shapes refuse to move") {
    EnvConfig cfg = minimal_config();
    Scene s(5);
    s.slots[0] = lock_at(0.2, 0.2, 1);
    s.slots[1] = regular_at(0.7, 0.7, 1);  // same shape as the lock
    s.slots[2] = regular_at(0.5, 0.2, 2);  // different shape

    CHECK(step(s, Action{{0.2, 0.2, 0.9, 0.9}}, cfg) == s);   // drag the lock itself
    CHECK(step(s, Action{{0.7, 0.7, 0.1, 0.1}}, cfg) == s);   // drag the locked shape
    Scene next = step(s, Action{{0.5, 0.2, 0.9, 0.2}}, cfg);  // unlocked: moves
    CHECK(next.slots[2]->position[0] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("clicks cycle shapes unless the object is blocked") {
    EnvConfig cfg = multi_config();
    Scene s(7);
    s.slots[0] = regular_at(0.3, 0.3, 1);
    Scene next = step(s, Action{{0.3, 0.3, 0.3, 0.3}}, cfg);
    CHECK(next.slots[0]->shape == shape_from_index(2));
    CHECK(changed_slot_count(s, next) == 1);
    CHECK(next.slots[0]->position == s.slots[0]->position);

    // last shape of the set wraps to the first
    s.slots[0]->shape = cfg.shape_set.back();
    next = step(s, Action{{0.3, 0.3, 0.3, 0.3}}, cfg);
    CHECK(next.slots[0]->shape == cfg.shape_set.front());

    // a touching neighbour blocks the change
    s.slots[0]->shape = shape_from_index(1);
    s.slots[1] = regular_at(0.3 + cfg.touch_threshold * 0.9, 0.3, 2);
    CHECK(step(s, Action{{0.3, 0.3, 0.3, 0.3}}, cfg) == s);
}

TEST_CASE("shapes outside the configured set follow the full cycle") {
    EnvConfig cfg = multi_config();
    CHECK(next_shape(shape_from_index(10), cfg) == shape_from_index(11));
    CHECK(next_shape(shape_from_index(26), cfg) == shape_from_index(0));
    // inside the set: set order, not lexicographic order
    CHECK(next_shape(cfg.shape_set[1], cfg) == cfg.shape_set[2]);
}

TEST_CASE("noop leaves the scene untouched") {
    EnvConfig cfg = minimal_config();
    Scene s(5);
    s.slots[0] = regular_at(0.3, 0.3);
    CHECK(step(s, Action{{0.95, 0.95, 0.3, 0.3}}, cfg) == s);
}

TEST_CASE("sampled actions always decode to a real interaction") {
    Rng rng(4);
    for (const EnvConfig& cfg : {minimal_config(), multi_config()}) {
        for (int i = 0; i < 2000; ++i) {
            Scene s = sample_scene(cfg, rng);
            Action a = sample_action(s, cfg, rng);
            auto intent = interpret_action(s, a, cfg);
            CHECK_FALSE(std::holds_alternative<NoOpIntent>(intent));
            if (!cfg.click_enabled)
                CHECK(std::holds_alternative<DragIntent>(intent));
        }
    }
}

TEST_CASE("drag/click split is even when clicks are enabled") {
    EnvConfig cfg = multi_config();
    Rng rng(5);
    const int n = 100000;
    int clicks = 0;
    for (int i = 0; i < n; ++i) {
        Scene s = sample_scene(cfg, rng);
        Action a = sample_action(s, cfg, rng);
        if (std::holds_alternative<ShapeChangeIntent>(interpret_action(s, a, cfg))) ++clicks;
    }
    CHECK(static_cast<double>(clicks) / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("exactly one slot changes per effective transition") {
    Rng rng(6);
    for (const EnvConfig& cfg : {minimal_config(), multi_config()}) {
        for (int i = 0; i < 5000; ++i) {
            Scene s = sample_scene(cfg, rng);
            Action a = sample_action(s, cfg, rng);
            Scene next = step(s, a, cfg);
            CHECK(changed_slot_count(s, next) <= 1);  // 0 when locked/blocked
        }
    }
}

TEST_CASE("rollouts chain and are reproducible") {
    EnvConfig cfg = minimal_config();
    Rng rng_a(7), rng_b(7);
    Trajectory ta = rollout(cfg, rng_a, 10);
    Trajectory tb = rollout(cfg, rng_b, 10);
    REQUIRE(ta.size() == 10);
    for (std::size_t i = 0; i < ta.size(); ++i) {
        CHECK(ta[i].scene_t == tb[i].scene_t);
        CHECK(ta[i].action == tb[i].action);
        CHECK(ta[i].scene_t1 == tb[i].scene_t1);
        if (i > 0) CHECK(ta[i].scene_t == ta[i - 1].scene_t1);
    }
    Rng rng_c(8);
    Trajectory tc = rollout(cfg, rng_c, 10);
    CHECK(tc[0].scene_t != ta[0].scene_t);
}

TEST_CASE("property deltas isolate position and shape dimensions") {
    Scene a(2), b(2);
    a.slots[0] = regular_at(0.2, 0.2, 0);
    b.slots[0] = regular_at(0.5, 0.6, 0);
    auto ea = encode_scene(a), eb = encode_scene(b);
    CHECK(property_delta(ea, eb, 0, ObjectProperty::Position) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(property_delta(ea, eb, 0, ObjectProperty::Shape) == 0.0);

    b.slots[0] = regular_at(0.2, 0.2, 13);  // (0.5, 0.5, 0.5) vs (0, 0, 0)
    eb = encode_scene(b);
    CHECK(property_delta(ea, eb, 0, ObjectProperty::Position) == 0.0);
    CHECK(property_delta(ea, eb, 0, ObjectProperty::Shape) ==
          doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("locked-target frequency is near the analytic value") {
    // The selection statistics feed the headline probabilities; a coarse
    // range here catches gross sampler regressions quickly.
    EnvConfig cfg = minimal_config();
    Rng rng(9);
    const int n = 20000;
    int locked = 0;
    for (int i = 0; i < n; ++i) {
        Scene s = sample_scene(cfg, rng);
        Action a = sample_action(s, cfg, rng);
        auto intent = interpret_action(s, a, cfg);
        int slot = std::holds_alternative<DragIntent>(intent)
                       ? std::get<DragIntent>(intent).slot
                       : std::get<ShapeChangeIntent>(intent).slot;
        if (semantic_oracle(s, cfg).locked[static_cast<std::size_t>(slot)]) ++locked;
    }
    double p = static_cast<double>(locked) / n;
    CHECK(p > 0.35);
    CHECK(p < 0.50);
}
