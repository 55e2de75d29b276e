#include "semdyn/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "semdyn/checkpoint.hpp"

namespace semdyn {

ModelConfig TrainConfig::model_config() const {
    ModelConfig mc = ModelConfig::for_scenario(kind, env.click_enabled);
    mc.slots = env.slots;
    if (semantic_width >= 0 && kind != VariantKind::Baseline)
        mc.semantic_width = semantic_width;
    return mc;
}

void TrainConfig::validate() const {
    env.validate();
    model_config().validate();
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (trajectory_length < 1) throw std::invalid_argument("trajectory_length must be >= 1");
    if (total_steps < 0) throw std::invalid_argument("total_steps must be >= 0");
    if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
}

TransitionPool::TransitionPool(EnvConfig env, int trajectory_length, std::uint64_t data_seed)
    : env_(std::move(env)), trajectory_length_(trajectory_length), rng_(data_seed) {}

std::vector<Transition> TransitionPool::next_batch(int n) {
    std::vector<Transition> batch;
    batch.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(batch.size()) < n) {
        if (pool_.empty()) {
            Trajectory traj = rollout(env_, rng_, trajectory_length_);
            for (auto& t : traj) pool_.push_back(std::move(t));
        }
        batch.push_back(std::move(pool_.front()));
        pool_.pop_front();
    }
    return batch;
}

namespace {

void batch_to_tensors(const std::vector<Transition>& batch, int slots, Tensor& z,
                      Tensor& actions, Tensor& target) {
    const auto k = static_cast<std::size_t>(slots);
    const auto b = batch.size();
    z = Tensor(b * k, kObjectFeatures);
    actions = Tensor(b, kActionWidth);
    target = Tensor(b * k, kObjectFeatures);
    for (std::size_t i = 0; i < b; ++i) {
        encode_scene_into(batch[i].scene_t, z.row(i * k));
        std::copy(batch[i].action.v.begin(), batch[i].action.v.end(), actions.row(i));
        encode_scene_into(batch[i].scene_t1, target.row(i * k));
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::pair<Model, TrainLog> train(const TrainConfig& cfg) {
    cfg.validate();
    Model model(cfg.model_config());
    {
        Rng init_rng(derive_seed(cfg.seed, "init"));
        model.init(init_rng);
    }
    Adam optimizer(model.params(), cfg.adam);
    TransitionPool pool(cfg.env, cfg.trajectory_length, derive_seed(cfg.seed, "data"));
    TrainLog log;
    std::vector<std::pair<long, double>> timing;

    const auto t_start = std::chrono::steady_clock::now();
    double last_loss = 0.0;
    for (long step_i = 1; step_i <= cfg.total_steps; ++step_i) {
        auto batch = pool.next_batch(cfg.batch_size);
        Tensor z, actions, target;
        batch_to_tensors(batch, cfg.env.slots, z, actions, target);

        Tape tape;
        NodeId pred = model.predict(tape, z, actions);
        NodeId loss = tape.l2_loss(pred, tape.constant(std::move(target)));
        last_loss = tape.value(loss).v[0];
        if (!std::isfinite(last_loss))
            throw std::runtime_error("non-finite loss at step " + std::to_string(step_i));
        tape.backward(loss);
        optimizer.step();

        if (step_i % cfg.eval_every == 0 || step_i == cfg.total_steps) {
            // Per-step eval seed so logged metrics are reproducible from the
            // checkpoint without replaying the whole run.
            Rng eval_rng(derive_seed(cfg.seed, "eval", static_cast<std::uint64_t>(step_i)));
            ModelPredictor predictor(model);
            TrainLogEntry entry;
            entry.step = step_i;
            entry.loss = last_loss;
            entry.metrics = evaluate(predictor, cfg.env, 1, cfg.eval_scenes, eval_rng);
            log.entries.push_back(std::move(entry));
            timing.emplace_back(step_i, std::chrono::duration<double>(
                                            std::chrono::steady_clock::now() - t_start)
                                            .count());
        }
    }

    if (!cfg.checkpoint_path.empty()) save_checkpoint(model, cfg.checkpoint_path);
    if (!cfg.log_csv_path.empty()) write_train_log_csv(log, cfg.log_csv_path);
    if (!cfg.log_jsonl_path.empty()) write_train_log_jsonl(log, cfg.log_jsonl_path);
    if (!cfg.timing_csv_path.empty()) {
        std::ofstream os(cfg.timing_csv_path, std::ios::trunc);
        os << "step,wall_seconds\n";
        for (auto& [s, w] : timing) os << s << ',' << fmt_double(w) << '\n';
    }
    return {std::move(model), std::move(log)};
}

namespace {

void append_metric_csv(std::string& line, const MetricCounter& c) {
    line += ',';
    if (c.available()) line += fmt_double(c.ratio());
    line += ',' + std::to_string(c.count);
}

}  // namespace

void write_train_log_csv(const TrainLog& log, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open log for writing: " + path);
    os << "step,loss,mean_l2,pc_locked,n_locked,pc_unlocked_pos,n_unlocked_pos,"
          "pc_blocked,n_blocked,pc_unblocked_shape,n_unblocked,pc_unblocked_any,"
          "n_unblocked_any\n";
    for (const auto& e : log.entries) {
        std::string line = std::to_string(e.step) + ',' + fmt_double(e.loss) + ',' +
                           fmt_double(e.metrics.mean_l2);
        append_metric_csv(line, e.metrics.locked_no_move);
        append_metric_csv(line, e.metrics.unlocked_correct_pos);
        append_metric_csv(line, e.metrics.blocked_no_shape_change);
        append_metric_csv(line, e.metrics.unblocked_correct_shape);
        append_metric_csv(line, e.metrics.unblocked_any_change);
        os << line << '\n';
    }
}

void write_train_log_jsonl(const TrainLog& log, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open log for writing: " + path);
    for (const auto& e : log.entries) {
        nlohmann::ordered_json rec;
        rec["step"] = e.step;
        rec["loss"] = e.loss;
        rec["mean_l2"] = e.metrics.mean_l2;
        auto metric = [](const MetricCounter& c) {
            nlohmann::ordered_json m;
            m["correct"] = c.correct;
            m["count"] = c.count;
            if (c.available()) m["ratio"] = c.ratio();
            return m;
        };
        rec["pc_locked"] = metric(e.metrics.locked_no_move);
        rec["pc_unlocked_pos"] = metric(e.metrics.unlocked_correct_pos);
        rec["pc_blocked"] = metric(e.metrics.blocked_no_shape_change);
        rec["pc_unblocked_shape"] = metric(e.metrics.unblocked_correct_shape);
        rec["pc_unblocked_any"] = metric(e.metrics.unblocked_any_change);
        os << rec.dump() << '\n';
    }
}

}  // namespace semdyn
