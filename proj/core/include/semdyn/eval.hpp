#pragma once

#include <optional>
#include <vector>

#include "semdyn/env.hpp"
#include "semdyn/model.hpp"

namespace semdyn {

// Prediction-vs-truth threshold from the evaluation protocol.
inline constexpr double kChangeThreshold = 0.05;

struct MetricCounter {
    long correct = 0;
    long count = 0;

    void add(bool ok) {
        ++count;
        if (ok) ++correct;
    }
    bool available() const { return count > 0; }
    double ratio() const { return count > 0 ? static_cast<double>(correct) / count : 0.0; }
};

struct MetricsReport {
    MetricCounter locked_no_move;          // locked slot, drag action: no predicted move
    MetricCounter unlocked_correct_pos;    // dragged unlocked slot: correct displacement
    MetricCounter blocked_no_shape_change; // blocked slot, click action: shape kept
    MetricCounter unblocked_correct_shape; // clicked unblocked slot: correct next shape
    MetricCounter unblocked_any_change;    // clicked unblocked slot: any shape change
    double mean_l2 = 0.0;
    long scenes = 0;
};

// Per-slot outcome labels for one transition prediction.
struct SlotClassification {
    bool locked_applicable = false;
    bool locked_correct = false;
    bool unlocked_pos_applicable = false;
    bool unlocked_pos_correct = false;
    bool blocked_applicable = false;
    bool blocked_correct = false;
    bool unblocked_applicable = false;
    bool unblocked_shape_correct = false;
    bool unblocked_any_change = false;
};

// Change detection is strict >, correctness strict <, both at 0.05.
// Semantic no-change measures cover every slot in the applicable state under
// the applicable action type; dynamics measures cover the targeted slot only.
std::vector<SlotClassification> classify_prediction(const std::vector<double>& z_t,
                                                    const Action& action,
                                                    const std::vector<double>& z_pred,
                                                    const std::vector<double>& z_true,
                                                    const EnvConfig& cfg);

// Batched next-state predictor; rows are slot features grouped per scene.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual int slots() const = 0;
    // z: (B*K, 8), actions: (B, 4) -> (B*K, 8)
    virtual Tensor predict_batch(const Tensor& z, const Tensor& actions) = 0;
};

class ModelPredictor : public Predictor {
public:
    explicit ModelPredictor(Model& model) : model_(&model) {}
    int slots() const override { return model_->config().slots; }
    Tensor predict_batch(const Tensor& z, const Tensor& actions) override;

private:
    Model* model_;
};

// Wraps the environment step itself; evaluate() of this is 1.0 everywhere.
class OraclePredictor : public Predictor {
public:
    explicit OraclePredictor(EnvConfig cfg) : cfg_(std::move(cfg)) {}
    int slots() const override { return cfg_.slots; }
    Tensor predict_batch(const Tensor& z, const Tensor& actions) override;

private:
    EnvConfig cfg_;
};

// Predicts no change at all.
class IdentityPredictor : public Predictor {
public:
    explicit IdentityPredictor(int slots) : slots_(slots) {}
    int slots() const override { return slots_; }
    Tensor predict_batch(const Tensor& z, const Tensor&) override { return z; }

private:
    int slots_;
};

MetricsReport evaluate(Predictor& predictor, const EnvConfig& cfg, long n_batches,
                       long scenes_per_batch, Rng& rng);

struct StateProbabilityReport {
    long n_scenes = 0;
    // Fraction of sampled actions whose target slot is in the state.
    double selected_locked = 0.0;
    double selected_blocked = 0.0;
    // Per slot-prediction: target slot in the state, over all K slots
    // (estimated from an independent action sample, so it can be cross-
    // checked against selected/K).
    double per_slot_locked = 0.0;
    double per_slot_blocked = 0.0;
    // As per-slot, but only when the action type can reveal the state
    // (drag for locked, click for blocked).
    double action_relevant_locked = 0.0;
    double action_relevant_blocked = 0.0;
};

StateProbabilityReport state_probabilities(const EnvConfig& cfg, long n_scenes, Rng& rng);

// Unseen-shape protocol: each batch draws `shapes_per_batch` shapes from the
// 27 - |train shapes| codes never seen in training and evaluates fresh
// scenes under that shape set. Shape correctness additionally tracks the
// any-change measure, which is the headline number for unseen shapes.
MetricsReport generalization_eval(Predictor& predictor, const EnvConfig& train_cfg,
                                  long n_batches, long scenes_per_batch,
                                  int shapes_per_batch, Rng& rng);

std::vector<ShapeCode> held_out_shapes(const EnvConfig& train_cfg);

}  // namespace semdyn
