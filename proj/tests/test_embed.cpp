#include <doctest.h>

#include <filesystem>

#include "semdyn/embed.hpp"

using namespace semdyn;

namespace {

std::vector<EmbeddingRecord> synthetic_records(int per_class, double noise, int width,
                                               Rng& rng) {
    // one cluster per label along distinct axes
    std::vector<EmbeddingRecord> records;
    long id = 0;
    for (int label = 0; label < 4; ++label)
        for (int i = 0; i < per_class; ++i) {
            EmbeddingRecord r;
            r.scene_id = id++;
            r.slot = 0;
            r.zhat.assign(static_cast<std::size_t>(width), 0.0);
            if (noise < 1.0) r.zhat[static_cast<std::size_t>(label % width)] = 1.0;
            for (auto& v : r.zhat) v += rng.uniform(-noise, noise);
            r.label = static_cast<SemanticLabel>(label);
            r.shape_idx = static_cast<int>(rng.uniform_int(3));
            records.push_back(std::move(r));
        }
    return records;
}

}  // namespace

TEST_CASE("semantic labels combine the two flags") {
    CHECK(semantic_label_from_flags(false, false) == SemanticLabel::None);
    CHECK(semantic_label_from_flags(true, false) == SemanticLabel::Locked);
    CHECK(semantic_label_from_flags(false, true) == SemanticLabel::Blocked);
    CHECK(semantic_label_from_flags(true, true) == SemanticLabel::Both);
    CHECK(semantic_label_name(SemanticLabel::None) == "none");
    CHECK(semantic_label_name(SemanticLabel::Locked) == "L");
    CHECK(semantic_label_name(SemanticLabel::Blocked) == "B");
    CHECK(semantic_label_name(SemanticLabel::Both) == "B+L");
}

TEST_CASE("collected embeddings carry oracle labels and widths") {
    EnvConfig env = multi_config();
    ModelConfig mc = ModelConfig::for_scenario(VariantKind::Parallel, true);
    Model model(mc);
    Rng init_rng(1);
    model.init(init_rng);

    Rng rng(2);
    auto records = collect_embeddings(model, env, 50, rng);
    CHECK_FALSE(records.empty());

    // regenerate the same scenes to cross-check labels against the oracle
    Rng rng2(2);
    std::size_t r = 0;
    for (long scene_id = 0; scene_id < 50; ++scene_id) {
        Scene s = sample_scene(env, rng2);
        auto gt = semantic_oracle(s, env);
        for (int k = 0; k < env.slots; ++k) {
            if (!s.slots[static_cast<std::size_t>(k)]) continue;
            REQUIRE(r < records.size());
            const auto& rec = records[r++];
            CHECK(rec.scene_id == scene_id);
            CHECK(rec.slot == k);
            CHECK(rec.zhat.size() == static_cast<std::size_t>(mc.semantic_width));
            CHECK(rec.label ==
                  semantic_label_from_flags(gt.locked[static_cast<std::size_t>(k)],
                                            gt.blocked[static_cast<std::size_t>(k)]));
            CHECK(rec.is_lock == s.slots[static_cast<std::size_t>(k)]->is_lock());
            CHECK(rec.shape_idx == shape_index(s.slots[static_cast<std::size_t>(k)]->shape));
            CHECK_FALSE(rec.action.has_value());  // parallel embeds action-free
        }
    }
    CHECK(r == records.size());
}

TEST_CASE("internal-variant embeddings record the conditioning action") {
    EnvConfig env = multi_config();
    ModelConfig mc = ModelConfig::for_scenario(VariantKind::Internal, true);
    Model model(mc);
    Rng init_rng(3);
    model.init(init_rng);
    Rng rng(4);
    auto records = collect_embeddings(model, env, 10, rng);
    REQUIRE_FALSE(records.empty());
    for (const auto& rec : records) CHECK(rec.action.has_value());
}

TEST_CASE("embedding csv round trips") {
    EnvConfig env = multi_config();
    ModelConfig mc = ModelConfig::for_scenario(VariantKind::Internal, true);
    Model model(mc);
    Rng init_rng(5);
    model.init(init_rng);
    Rng rng(6);
    auto records = collect_embeddings(model, env, 20, rng);

    auto path = (std::filesystem::temp_directory_path() / "semdyn-embed-test.csv").string();
    write_embeddings_csv(records, path);
    auto loaded = read_embeddings_csv(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].scene_id == records[i].scene_id);
        CHECK(loaded[i].slot == records[i].slot);
        CHECK(loaded[i].z == records[i].z);
        CHECK(loaded[i].zhat == records[i].zhat);
        CHECK(loaded[i].label == records[i].label);
        CHECK(loaded[i].shape_idx == records[i].shape_idx);
        CHECK(loaded[i].is_lock == records[i].is_lock);
        REQUIRE(loaded[i].action.has_value() == records[i].action.has_value());
        if (records[i].action) CHECK(loaded[i].action->v == records[i].action->v);
    }
    std::filesystem::remove(path);
}

TEST_CASE("linear probe separates separable clusters") {
    Rng rng(7);
    auto records = synthetic_records(300, 0.05, 4, rng);
    Rng probe_rng(8);
    ProbeReport report = linear_probe(records, 0.8, probe_rng);
    CHECK(report.n_labels == 4);
    CHECK(report.semantic_accuracy > 0.95);
    CHECK(report.n_train + report.n_test == 4 * 300);
    REQUIRE(report.confusion.size() == 4);
    long diag = 0, total = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            total += report.confusion[i][j];
            if (i == j) diag += report.confusion[i][j];
        }
    CHECK(total == report.n_test);
    CHECK(static_cast<double>(diag) / total == doctest::Approx(report.semantic_accuracy));
}

TEST_CASE("linear probe on pure noise sits at chance") {
    Rng rng(9);
    auto records = synthetic_records(300, 10.0, 4, rng);
    Rng probe_rng(10);
    ProbeReport report = linear_probe(records, 0.8, probe_rng);
    CHECK(report.semantic_accuracy > 0.10);
    CHECK(report.semantic_accuracy < 0.45);
}

TEST_CASE("probe is deterministic for a fixed rng seed") {
    Rng rng(11);
    auto records = synthetic_records(100, 0.3, 4, rng);
    Rng pa(12), pb(12);
    ProbeReport a = linear_probe(records, 0.8, pa);
    ProbeReport b = linear_probe(records, 0.8, pb);
    CHECK(a.semantic_accuracy == b.semantic_accuracy);
    CHECK(a.shape_accuracy == b.shape_accuracy);
    CHECK(a.confusion == b.confusion);
}

TEST_CASE("shape leakage is high when zhat encodes the shape") {
    Rng rng(13);
    std::vector<EmbeddingRecord> records;
    for (int i = 0; i < 1200; ++i) {
        EmbeddingRecord r;
        r.scene_id = i;
        r.shape_idx = static_cast<int>(rng.uniform_int(3));
        r.label = static_cast<SemanticLabel>(rng.uniform_int(4));
        r.zhat = {static_cast<double>(r.shape_idx), rng.uniform()};
        records.push_back(std::move(r));
    }
    Rng probe_rng(14);
    ProbeReport report = linear_probe(records, 0.8, probe_rng);
    CHECK(report.shape_accuracy > 0.9);
    CHECK(report.semantic_accuracy < 0.45);
}
