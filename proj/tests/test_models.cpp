#include <doctest.h>

#include <cmath>

#include "semdyn/model.hpp"

using namespace semdyn;

namespace {

Tensor random_scene_features(int batch, int slots, Rng& rng) {
    Tensor z(static_cast<std::size_t>(batch * slots), kObjectFeatures);
    for (auto& v : z.v) v = rng.uniform();
    return z;
}

Tensor random_actions(int batch, Rng& rng) {
    Tensor a(static_cast<std::size_t>(batch), kActionWidth);
    for (auto& v : a.v) v = rng.uniform();
    return a;
}

}  // namespace

TEST_CASE("variant names round trip") {
    for (VariantKind k : {VariantKind::Baseline, VariantKind::Internal,
                          VariantKind::Sequential, VariantKind::Parallel})
        CHECK(variant_from_name(variant_name(k)) == k);
    CHECK_THROWS(variant_from_name("recurrent"));
}

TEST_CASE("scenario presets pick the agreed widths") {
    CHECK(ModelConfig::for_scenario(VariantKind::Internal, false).semantic_width == 9);
    CHECK(ModelConfig::for_scenario(VariantKind::Sequential, false).semantic_width == 9);
    CHECK(ModelConfig::for_scenario(VariantKind::Parallel, false).semantic_width == 1);
    CHECK(ModelConfig::for_scenario(VariantKind::Baseline, false).semantic_width == 0);
    CHECK(ModelConfig::for_scenario(VariantKind::Internal, true).semantic_width == 16);
    CHECK(ModelConfig::for_scenario(VariantKind::Sequential, true).semantic_width == 16);
    CHECK(ModelConfig::for_scenario(VariantKind::Parallel, true).semantic_width == 8);
    CHECK(ModelConfig::for_scenario(VariantKind::Parallel, true).slots == 7);
}

TEST_CASE("input widths per variant") {
    auto base = ModelConfig::for_scenario(VariantKind::Baseline, false);
    CHECK(base.tobj_input_width() == 12);
    auto internal = ModelConfig::for_scenario(VariantKind::Internal, false);
    CHECK(internal.pair_input_width() == 20);  // action-conditioned pairs
    CHECK(internal.tobj_input_width() == 9);
    auto seq = ModelConfig::for_scenario(VariantKind::Sequential, false);
    CHECK(seq.pair_input_width() == 16);
    CHECK(seq.tobj_input_width() == 13);
    auto par = ModelConfig::for_scenario(VariantKind::Parallel, false);
    CHECK(par.tobj_input_width() == 13);  // 8 + 1 + 4
}

TEST_CASE("parameter counts match the closed-form expectation") {
    for (bool multi : {false, true})
        for (VariantKind k : {VariantKind::Baseline, VariantKind::Internal,
                              VariantKind::Sequential, VariantKind::Parallel}) {
            ModelConfig cfg = ModelConfig::for_scenario(k, multi);
            Model m(cfg);
            CHECK(m.parameter_count() == cfg.expected_parameter_count());
        }
    // spot-check one by hand: minimal baseline, 12-in MLP 3x512 + 8-out
    std::size_t expect = (12 * 512 + 512) + 2 * (512 * 512 + 512) + (512 * 8 + 8);
    CHECK(ModelConfig::for_scenario(VariantKind::Baseline, false).expected_parameter_count() ==
          expect);
}

TEST_CASE("initialization is seeded, bounded and zero-biased") {
    ModelConfig cfg = ModelConfig::for_scenario(VariantKind::Parallel, false);
    Model a(cfg), b(cfg), c(cfg);
    Rng ra(42), rb(42), rc(43);
    a.init(ra);
    b.init(rb);
    c.init(rc);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.params().size(); ++i) {
        const auto& pa = a.params()[i];
        same &= pa.value.v == b.params()[i].value.v;
        differs |= pa.value.v != c.params()[i].value.v;
        if (pa.name.ends_with(".b")) {
            for (double v : pa.value.v) CHECK(v == 0.0);
        } else {
            const double bound = std::sqrt(1.0 / static_cast<double>(pa.value.rows));
            for (double v : pa.value.v) {
                CHECK(std::abs(v) <= bound);
            }
        }
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("pair matrix enumerates ordered pairs with self-pairs") {
    Rng rng(1);
    const int slots = 3;
    Tensor z = random_scene_features(2, slots, rng);
    Tensor a = random_actions(2, rng);
    Tensor pairs = build_pair_matrix(z, &a, slots);
    REQUIRE(pairs.rows == 2 * 3 * 3);
    REQUIRE(pairs.cols == 2 * kObjectFeatures + kActionWidth);
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < slots; ++i)
            for (int j = 0; j < slots; ++j) {
                const double* row = pairs.row(static_cast<std::size_t>((b * slots + i) * slots + j));
                for (int f = 0; f < kObjectFeatures; ++f) {
                    CHECK(row[f] == z.at(static_cast<std::size_t>(b * slots + i), f));
                    CHECK(row[kObjectFeatures + f] ==
                          z.at(static_cast<std::size_t>(b * slots + j), f));
                }
                for (int f = 0; f < kActionWidth; ++f)
                    CHECK(row[2 * kObjectFeatures + f] == a.at(static_cast<std::size_t>(b), f));
            }
    // action-free version drops the trailing block
    Tensor pairs_na = build_pair_matrix(z, nullptr, slots);
    CHECK(pairs_na.cols == 2 * static_cast<std::size_t>(kObjectFeatures));
}

TEST_CASE("semantic output is equivariant under slot permutation") {
    // Swapping two slots permutes zhat rows the same way; the sum over
    // partners makes each row invariant to the others' order.
    for (VariantKind kind :
         {VariantKind::Internal, VariantKind::Sequential, VariantKind::Parallel}) {
        ModelConfig cfg = ModelConfig::for_scenario(kind, false);
        Model m(cfg);
        Rng init_rng(7);
        m.init(init_rng);
        Rng rng(8);
        Tensor z = random_scene_features(1, cfg.slots, rng);
        Tensor a = random_actions(1, rng);
        const Tensor* ap = cfg.semantic_takes_action() ? &a : nullptr;

        Tape t1;
        Tensor out1 = t1.value(m.semantic(t1, z, ap));

        Tensor zp = z;  // swap slots 1 and 3
        for (int f = 0; f < kObjectFeatures; ++f)
            std::swap(zp.at(1, static_cast<std::size_t>(f)), zp.at(3, static_cast<std::size_t>(f)));
        Tape t2;
        Tensor out2 = t2.value(m.semantic(t2, zp, ap));

        for (int k = 0; k < cfg.slots; ++k) {
            int kp = k == 1 ? 3 : k == 3 ? 1 : k;
            for (int f = 0; f < cfg.semantic_width; ++f) {
                INFO("variant " << variant_name(kind) << " slot " << k);
                CHECK(out1.at(static_cast<std::size_t>(k), static_cast<std::size_t>(f)) ==
                      doctest::Approx(out2.at(static_cast<std::size_t>(kp),
                                              static_cast<std::size_t>(f)))
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("baseline predictions are object-local") {
    ModelConfig cfg = ModelConfig::for_scenario(VariantKind::Baseline, false);
    Model m(cfg);
    Rng init_rng(9);
    m.init(init_rng);
    Rng rng(10);
    Tensor z = random_scene_features(1, cfg.slots, rng);
    Tensor a = random_actions(1, rng);

    Tape t1;
    Tensor out1 = t1.value(m.predict(t1, z, a));
    Tensor zp = z;
    for (int f = 0; f < kObjectFeatures; ++f)
        zp.at(4, static_cast<std::size_t>(f)) = rng.uniform();
    Tape t2;
    Tensor out2 = t2.value(m.predict(t2, zp, a));

    // slots 0-3 see nothing of slot 4's change
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t f = 0; f < kObjectFeatures; ++f)
            CHECK(out1.at(k, f) == out2.at(k, f));
    // slot 4 itself does change
    bool changed = false;
    for (std::size_t f = 0; f < kObjectFeatures; ++f)
        changed |= out1.at(4, f) != out2.at(4, f);
    CHECK(changed);
}

TEST_CASE("semantic variants are not object-local") {
    ModelConfig cfg = ModelConfig::for_scenario(VariantKind::Parallel, false);
    Model m(cfg);
    Rng init_rng(11);
    m.init(init_rng);
    Rng rng(12);
    Tensor z = random_scene_features(1, cfg.slots, rng);
    Tensor a = random_actions(1, rng);
    Tape t1;
    Tensor out1 = t1.value(m.predict(t1, z, a));
    Tensor zp = z;
    zp.at(4, 0) = rng.uniform();
    Tape t2;
    Tensor out2 = t2.value(m.predict(t2, zp, a));
    bool other_rows_changed = false;
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t f = 0; f < kObjectFeatures; ++f)
            other_rows_changed |= out1.at(k, f) != out2.at(k, f);
    CHECK(other_rows_changed);
}

TEST_CASE("single-scene helpers match the batched forward") {
    Rng rng(13);
    for (VariantKind kind : {VariantKind::Baseline, VariantKind::Internal,
                             VariantKind::Sequential, VariantKind::Parallel}) {
        ModelConfig cfg = ModelConfig::for_scenario(kind, false);
        Model m(cfg);
        Rng init_rng(14);
        m.init(init_rng);
        Tensor z = random_scene_features(1, cfg.slots, rng);
        Tensor a = random_actions(1, rng);
        Action act;
        act.v = {a.v[0], a.v[1], a.v[2], a.v[3]};

        auto single = m.predict_scene(z.v, act);
        Tape tape;
        Tensor batched = tape.value(m.predict(tape, z, a));
        REQUIRE(single.size() == batched.size());
        for (std::size_t i = 0; i < single.size(); ++i) CHECK(single[i] == batched.v[i]);
    }
}

TEST_CASE("semantic action contract is enforced") {
    Rng rng(15);
    Tensor z = random_scene_features(1, 5, rng);
    Tensor a = random_actions(1, rng);

    ModelConfig internal = ModelConfig::for_scenario(VariantKind::Internal, false);
    Model mi(internal);
    Tape t1;
    CHECK_THROWS(mi.semantic(t1, z, nullptr));

    ModelConfig par = ModelConfig::for_scenario(VariantKind::Parallel, false);
    Model mp(par);
    Tape t2;
    CHECK_THROWS(mp.semantic(t2, z, &a));

    ModelConfig base = ModelConfig::for_scenario(VariantKind::Baseline, false);
    Model mb(base);
    Tape t3;
    CHECK_THROWS(mb.semantic(t3, z, nullptr));
}

TEST_CASE("config validation") {
    ModelConfig cfg = ModelConfig::for_scenario(VariantKind::Parallel, false);
    cfg.semantic_width = 0;
    CHECK_THROWS(cfg.validate());
    cfg = ModelConfig::for_scenario(VariantKind::Baseline, false);
    cfg.semantic_width = 3;
    CHECK_THROWS(cfg.validate());
    cfg = ModelConfig::for_scenario(VariantKind::Parallel, false);
    cfg.slots = 0;
    CHECK_THROWS(cfg.validate());
}
