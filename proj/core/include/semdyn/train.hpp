#pragma once

#include <deque>
#include <string>

#include "semdyn/adam.hpp"
#include "semdyn/eval.hpp"

namespace semdyn {

struct TrainConfig {
    EnvConfig env;
    VariantKind kind = VariantKind::Parallel;
    int semantic_width = -1;  // -1: scenario default (9/1 minimal, 16/8 multi)
    int batch_size = 10;
    int trajectory_length = 10;
    long total_steps = 0;
    long eval_every = 2000;
    long eval_scenes = 2000;
    std::uint64_t seed = 0;
    AdamConfig adam;

    // Output paths; empty string disables the corresponding file.
    std::string checkpoint_path;
    std::string log_csv_path;
    std::string log_jsonl_path;
    std::string timing_csv_path;  // wall-clock; not covered by determinism

    ModelConfig model_config() const;
    void validate() const;
};

struct TrainLogEntry {
    long step = 0;
    double loss = 0.0;
    MetricsReport metrics;
};

struct TrainLog {
    std::vector<TrainLogEntry> entries;
};

// Rolling pool of environment rollouts: batches are consecutive transitions
// in collection order, with a fresh length-L trajectory generated whenever
// the pool runs dry.
class TransitionPool {
public:
    TransitionPool(EnvConfig env, int trajectory_length, std::uint64_t data_seed);
    std::vector<Transition> next_batch(int n);

private:
    EnvConfig env_;
    int trajectory_length_;
    Rng rng_;
    std::deque<Transition> pool_;
};

// Supervised loop: collect, forward, L2 loss, backward, Adam. Evaluates on
// fresh held-out scenes every eval_every steps (and at the final step) with
// an RNG stream separate from data collection and initialization.
std::pair<Model, TrainLog> train(const TrainConfig& cfg);

void write_train_log_csv(const TrainLog& log, const std::string& path);
void write_train_log_jsonl(const TrainLog& log, const std::string& path);

}  // namespace semdyn
