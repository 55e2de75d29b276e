#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "semdyn/checkpoint.hpp"
#include "semdyn/config_io.hpp"
#include "semdyn/dataset.hpp"

using namespace semdyn;

namespace {

std::string tmp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("semdyn-io-" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("transition dataset round trips") {
    EnvConfig cfg = multi_config();
    Rng rng(1);
    Trajectory traj = rollout(cfg, rng, 25);
    auto path = tmp_file("data.jsonl");
    write_transitions(path, traj);
    auto loaded = read_transitions(path, cfg.slots);
    REQUIRE(loaded.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(loaded[i].scene_t == traj[i].scene_t);
        CHECK(loaded[i].action == traj[i].action);
        CHECK(loaded[i].scene_t1 == traj[i].scene_t1);
    }
    // exactly one json object per line
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        CHECK(line.front() == '{');
        CHECK(line.back() == '}');
    }
    CHECK(lines == traj.size());
    std::filesystem::remove(path);
}

TEST_CASE("dataset writes are byte-stable") {
    EnvConfig cfg = minimal_config();
    Rng rng(2);
    Trajectory traj = rollout(cfg, rng, 10);
    auto pa = tmp_file("a.jsonl"), pb = tmp_file("b.jsonl");
    write_transitions(pa, traj);
    write_transitions(pb, traj);
    CHECK(slurp(pa) == slurp(pb));
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST_CASE("checkpoints restore parameters bit-exactly") {
    ModelConfig mc = ModelConfig::for_scenario(VariantKind::Internal, true);
    Model model(mc);
    Rng rng(3);
    model.init(rng);
    auto path = tmp_file("model.ckpt");
    save_checkpoint(model, path);
    Model loaded = load_checkpoint(path);
    CHECK(loaded.config().kind == mc.kind);
    CHECK(loaded.config().slots == mc.slots);
    CHECK(loaded.config().semantic_width == mc.semantic_width);
    REQUIRE(loaded.params().size() == model.params().size());
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        CHECK(loaded.params()[i].name == model.params()[i].name);
        CHECK(loaded.params()[i].value.v == model.params()[i].value.v);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    ModelConfig mc = ModelConfig::for_scenario(VariantKind::Parallel, false);
    Model model(mc);
    Rng rng(4);
    model.init(rng);
    auto path = tmp_file("corrupt.ckpt");
    save_checkpoint(model, path);

    // truncation
    auto bytes = slurp(path);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<long>(bytes.size() / 2));
    }
    CHECK_THROWS(load_checkpoint(path));

    // bad magic
    {
        std::string mangled = bytes;
        mangled[0] = 'X';
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(mangled.data(), static_cast<long>(mangled.size()));
    }
    CHECK_THROWS(load_checkpoint(path));

    CHECK_THROWS(load_checkpoint(tmp_file("does-not-exist.ckpt")));
    std::filesystem::remove(path);
}

TEST_CASE("key=value parsing") {
    auto kv = parse_kv_text("a = 1\n# comment\n\nb=two words \n  c = 3 # trailing\n");
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "two words");
    CHECK(kv.at("c") == "3");
    CHECK(kv.size() == 3);
    CHECK_THROWS(parse_kv_text("no_equals_sign\n"));
}

TEST_CASE("env config round trips through key=value form") {
    for (EnvConfig cfg : {minimal_config(7), multi_config(9)}) {
        KeyValueMap kv = env_config_to_kv(cfg);
        EnvConfig back = env_config_from_kv(kv);
        CHECK(back.slots == cfg.slots);
        CHECK(back.lock_count.min == cfg.lock_count.min);
        CHECK(back.lock_count.max == cfg.lock_count.max);
        CHECK(back.regular_count.min == cfg.regular_count.min);
        CHECK(back.regular_count.max == cfg.regular_count.max);
        CHECK(back.shape_set == cfg.shape_set);
        CHECK(back.object_radius == cfg.object_radius);
        CHECK(back.touch_threshold == cfg.touch_threshold);
        CHECK(back.drag_fraction == cfg.drag_fraction);
        CHECK(back.click_enabled == cfg.click_enabled);
        CHECK(back.seed == cfg.seed);
    }
}

TEST_CASE("train config round trips through key=value form") {
    TrainConfig cfg;
    cfg.env = multi_config(11);
    cfg.kind = VariantKind::Sequential;
    cfg.semantic_width = 12;
    cfg.batch_size = 20;
    cfg.trajectory_length = 5;
    cfg.total_steps = 12345;
    cfg.eval_every = 500;
    cfg.eval_scenes = 250;
    cfg.seed = 99;
    cfg.adam.lr = 5e-4;

    TrainConfig back = train_config_from_kv(train_config_to_kv(cfg));
    CHECK(back.kind == cfg.kind);
    CHECK(back.semantic_width == cfg.semantic_width);
    CHECK(back.batch_size == cfg.batch_size);
    CHECK(back.trajectory_length == cfg.trajectory_length);
    CHECK(back.total_steps == cfg.total_steps);
    CHECK(back.eval_every == cfg.eval_every);
    CHECK(back.eval_scenes == cfg.eval_scenes);
    CHECK(back.seed == cfg.seed);
    CHECK(back.adam.lr == cfg.adam.lr);
    CHECK(back.env.slots == cfg.env.slots);
    CHECK(back.env.shape_set == cfg.env.shape_set);
}

TEST_CASE("manifests round trip and rewrite identically") {
    RunManifest m;
    m.subcommand = "train";
    m.tool_version = "0.1.0";
    m.started_at = "2026-01-01T00:00:00Z";
    m.seed = 42;
    m.config = train_config_to_kv([] {
        TrainConfig c;
        c.env = minimal_config();
        return c;
    }());
    m.outputs["checkpoint"] = "model.ckpt";
    m.notes["note"] = "value";

    auto pa = tmp_file("manifest-a.json"), pb = tmp_file("manifest-b.json");
    write_manifest(m, pa);
    RunManifest back = read_manifest(pa);
    CHECK(back.subcommand == m.subcommand);
    CHECK(back.tool_version == m.tool_version);
    CHECK(back.started_at == m.started_at);
    CHECK(back.seed == m.seed);
    CHECK(back.config == m.config);
    CHECK(back.outputs == m.outputs);
    CHECK(back.notes == m.notes);

    write_manifest(back, pb);
    CHECK(slurp(pa) == slurp(pb));
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST_CASE("train log csv has the agreed column layout") {
    TrainLog log;
    TrainLogEntry e;
    e.step = 100;
    e.loss = 0.5;
    e.metrics.locked_no_move.add(true);
    e.metrics.unlocked_correct_pos.add(false);
    e.metrics.mean_l2 = 0.25;
    e.metrics.scenes = 1;
    log.entries.push_back(e);
    auto path = tmp_file("log.csv");
    write_train_log_csv(log, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header ==
          "step,loss,mean_l2,pc_locked,n_locked,pc_unlocked_pos,n_unlocked_pos,pc_blocked,"
          "n_blocked,pc_unblocked_shape,n_unblocked,pc_unblocked_any,n_unblocked_any");
    CHECK(row == "100,0.5,0.25,1,1,0,1,,0,,0,,0");
    std::filesystem::remove(path);
}
