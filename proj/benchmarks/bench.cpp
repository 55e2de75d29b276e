#include <benchmark/benchmark.h>

#include "semdyn/env.hpp"
#include "semdyn/model.hpp"
#include "semdyn/train.hpp"

using namespace semdyn;

static void BM_EnvStep(benchmark::State& state) {
    EnvConfig cfg = state.range(0) == 0 ? minimal_config() : multi_config();
    Rng rng(1);
    Scene scene = sample_scene(cfg, rng);
    for (auto _ : state) {
        Action a = sample_action(scene, cfg, rng);
        scene = step(scene, a, cfg);
        benchmark::DoNotOptimize(scene);
    }
}
BENCHMARK(BM_EnvStep)->Arg(0)->Arg(1);

static void BM_Rollout(benchmark::State& state) {
    EnvConfig cfg = multi_config();
    Rng rng(2);
    for (auto _ : state) {
        Trajectory t = rollout(cfg, rng, 10);
        benchmark::DoNotOptimize(t);
    }
}
BENCHMARK(BM_Rollout);

static void BM_ModelForward(benchmark::State& state) {
    auto kind = static_cast<VariantKind>(state.range(0));
    ModelConfig mc = ModelConfig::for_scenario(kind, true);
    Model model(mc);
    Rng rng(3);
    model.init(rng);
    const std::size_t batch = 10;
    Tensor z(batch * static_cast<std::size_t>(mc.slots), kObjectFeatures);
    Tensor actions(batch, kActionWidth);
    for (auto& v : z.v) v = rng.uniform();
    for (auto& v : actions.v) v = rng.uniform();
    for (auto _ : state) {
        Tape tape;
        NodeId pred = model.predict(tape, z, actions);
        benchmark::DoNotOptimize(tape.value(pred));
    }
}
BENCHMARK(BM_ModelForward)->DenseRange(0, 3);

static void BM_TrainStep(benchmark::State& state) {
    TrainConfig cfg;
    cfg.env = multi_config();
    cfg.kind = VariantKind::Parallel;
    cfg.total_steps = 1;
    cfg.eval_every = 1000000;
    cfg.seed = 4;
    for (auto _ : state) {
        auto r = train(cfg);
        benchmark::DoNotOptimize(r.second);
    }
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
