#include "semdyn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semdyn {

Tensor ModelPredictor::predict_batch(const Tensor& z, const Tensor& actions) {
    Tape tape;
    return tape.value(model_->predict(tape, z, actions));
}

Tensor OraclePredictor::predict_batch(const Tensor& z, const Tensor& actions) {
    const auto k = static_cast<std::size_t>(cfg_.slots);
    const std::size_t batch = z.rows / k;
    Tensor out(z.rows, z.cols);
    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<double> enc(z.row(b * k), z.row(b * k) + k * kObjectFeatures);
        Scene scene = decode_scene(enc, cfg_.slots);
        Action a{{actions.at(b, 0), actions.at(b, 1), actions.at(b, 2), actions.at(b, 3)}};
        Scene next = step(scene, a, cfg_);
        encode_scene_into(next, out.row(b * k));
    }
    return out;
}

std::vector<SlotClassification> classify_prediction(const std::vector<double>& z_t,
                                                    const Action& action,
                                                    const std::vector<double>& z_pred,
                                                    const std::vector<double>& z_true,
                                                    const EnvConfig& cfg) {
    const int k = cfg.slots;
    if (z_t.size() != z_pred.size() || z_t.size() != z_true.size() ||
        z_t.size() != static_cast<std::size_t>(k) * kObjectFeatures)
        throw std::invalid_argument("classify_prediction: size mismatch");

    std::vector<SlotClassification> out(static_cast<std::size_t>(k));
    const Scene scene = decode_scene(z_t, k);
    const ActionIntent intent = interpret_action(scene, action, cfg);
    if (std::holds_alternative<NoOpIntent>(intent)) return out;

    const SemanticGroundTruth gt = semantic_oracle(scene, cfg);
    const bool is_drag = std::holds_alternative<DragIntent>(intent);
    const int target = is_drag ? std::get<DragIntent>(intent).slot
                               : std::get<ShapeChangeIntent>(intent).slot;

    for (int s = 0; s < k; ++s) {
        const auto si = static_cast<std::size_t>(s);
        if (!scene.slots[si].has_value()) continue;
        const double* pt = z_t.data() + si * kObjectFeatures;
        const double* pp = z_pred.data() + si * kObjectFeatures;
        const double* pg = z_true.data() + si * kObjectFeatures;
        SlotClassification& c = out[si];

        if (is_drag) {
            if (gt.locked[si]) {
                c.locked_applicable = true;
                c.locked_correct =
                    !(property_delta(pt, pp, ObjectProperty::Position) > kChangeThreshold);
            }
            if (s == target && !gt.locked[si]) {
                c.unlocked_pos_applicable = true;
                c.unlocked_pos_correct =
                    property_delta(pp, pg, ObjectProperty::Position) < kChangeThreshold;
            }
        } else {
            if (gt.blocked[si]) {
                c.blocked_applicable = true;
                c.blocked_correct =
                    !(property_delta(pt, pp, ObjectProperty::Shape) > kChangeThreshold);
            }
            if (s == target && !gt.blocked[si]) {
                c.unblocked_applicable = true;
                c.unblocked_shape_correct =
                    property_delta(pp, pg, ObjectProperty::Shape) < kChangeThreshold;
                c.unblocked_any_change =
                    property_delta(pt, pp, ObjectProperty::Shape) > kChangeThreshold;
            }
        }
    }
    return out;
}

namespace {

void accumulate(MetricsReport& report, const std::vector<SlotClassification>& slots) {
    for (const auto& c : slots) {
        if (c.locked_applicable) report.locked_no_move.add(c.locked_correct);
        if (c.unlocked_pos_applicable) report.unlocked_correct_pos.add(c.unlocked_pos_correct);
        if (c.blocked_applicable) report.blocked_no_shape_change.add(c.blocked_correct);
        if (c.unblocked_applicable) {
            report.unblocked_correct_shape.add(c.unblocked_shape_correct);
            report.unblocked_any_change.add(c.unblocked_any_change);
        }
    }
}

void evaluate_batch(Predictor& predictor, const EnvConfig& cfg, long scenes_per_batch,
                    Rng& rng, MetricsReport& report) {
    const auto k = static_cast<std::size_t>(cfg.slots);
    const auto batch = static_cast<std::size_t>(scenes_per_batch);
    Tensor z(batch * k, kObjectFeatures);
    Tensor actions(batch, kActionWidth);
    Tensor truth(batch * k, kObjectFeatures);
    std::vector<Scene> scenes;
    scenes.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        Scene scene = sample_scene(cfg, rng);
        Action a = sample_action(scene, cfg, rng);
        encode_scene_into(scene, z.row(b * k));
        std::copy(a.v.begin(), a.v.end(), actions.row(b));
        encode_scene_into(step(scene, a, cfg), truth.row(b * k));
        scenes.push_back(std::move(scene));
    }
    Tensor pred = predictor.predict_batch(z, actions);

    const std::size_t per_scene = k * kObjectFeatures;
    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<double> zt(z.row(b * k), z.row(b * k) + per_scene);
        std::vector<double> zp(pred.row(b * k), pred.row(b * k) + per_scene);
        std::vector<double> zg(truth.row(b * k), truth.row(b * k) + per_scene);
        Action a{{actions.at(b, 0), actions.at(b, 1), actions.at(b, 2), actions.at(b, 3)}};
        accumulate(report, classify_prediction(zt, a, zp, zg, cfg));
        double sq = 0.0;
        for (std::size_t i = 0; i < per_scene; ++i) {
            double d = zp[i] - zg[i];
            sq += d * d;
        }
        report.mean_l2 += sq / static_cast<double>(per_scene);
        ++report.scenes;
    }
}

}  // namespace

MetricsReport evaluate(Predictor& predictor, const EnvConfig& cfg, long n_batches,
                       long scenes_per_batch, Rng& rng) {
    if (predictor.slots() != cfg.slots)
        throw std::invalid_argument("predictor/config slot mismatch");
    MetricsReport report;
    for (long b = 0; b < n_batches; ++b)
        evaluate_batch(predictor, cfg, scenes_per_batch, rng, report);
    if (report.scenes > 0) report.mean_l2 /= static_cast<double>(report.scenes);
    return report;
}

StateProbabilityReport state_probabilities(const EnvConfig& cfg, long n_scenes, Rng& rng) {
    if (n_scenes < 1) throw std::invalid_argument("n_scenes must be >= 1");
    StateProbabilityReport r;
    r.n_scenes = n_scenes;
    long sel_locked = 0, sel_blocked = 0;
    long slot_locked = 0, slot_blocked = 0;
    long rel_locked = 0, rel_blocked = 0;

    for (long i = 0; i < n_scenes; ++i) {
        Scene scene = sample_scene(cfg, rng);
        SemanticGroundTruth gt = semantic_oracle(scene, cfg);

        auto target_of = [&](const Action& a) -> std::pair<int, bool> {
            ActionIntent intent = interpret_action(scene, a, cfg);
            if (const auto* d = std::get_if<DragIntent>(&intent)) return {d->slot, true};
            return {std::get<ShapeChangeIntent>(intent).slot, false};
        };

        auto [t1, drag1] = target_of(sample_action(scene, cfg, rng));
        (void)drag1;
        if (gt.locked[static_cast<std::size_t>(t1)]) ++sel_locked;
        if (gt.blocked[static_cast<std::size_t>(t1)]) ++sel_blocked;

        // Independent second sample so the per-slot figures are a genuine
        // cross-check of selected/K rather than the same counts rescaled.
        auto [t2, drag2] = target_of(sample_action(scene, cfg, rng));
        if (gt.locked[static_cast<std::size_t>(t2)]) {
            ++slot_locked;
            if (drag2) ++rel_locked;
        }
        if (gt.blocked[static_cast<std::size_t>(t2)]) {
            ++slot_blocked;
            if (!drag2) ++rel_blocked;
        }
    }

    const double n = static_cast<double>(n_scenes);
    const double kn = n * cfg.slots;
    r.selected_locked = sel_locked / n;
    r.selected_blocked = sel_blocked / n;
    r.per_slot_locked = slot_locked / kn;
    r.per_slot_blocked = slot_blocked / kn;
    r.action_relevant_locked = rel_locked / kn;
    r.action_relevant_blocked = rel_blocked / kn;
    return r;
}

std::vector<ShapeCode> held_out_shapes(const EnvConfig& train_cfg) {
    std::vector<ShapeCode> pool;
    for (const auto& s : all_shape_codes())
        if (std::find(train_cfg.shape_set.begin(), train_cfg.shape_set.end(), s) ==
            train_cfg.shape_set.end())
            pool.push_back(s);
    return pool;
}

MetricsReport generalization_eval(Predictor& predictor, const EnvConfig& train_cfg,
                                  long n_batches, long scenes_per_batch,
                                  int shapes_per_batch, Rng& rng) {
    const std::vector<ShapeCode> pool = held_out_shapes(train_cfg);
    if (static_cast<int>(pool.size()) < shapes_per_batch)
        throw std::invalid_argument("not enough held-out shapes");

    MetricsReport report;
    std::vector<std::size_t> idx(pool.size());
    for (long b = 0; b < n_batches; ++b) {
        // Partial Fisher-Yates draw without replacement.
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        EnvConfig cfg = train_cfg;
        cfg.shape_set.clear();
        for (std::size_t i = 0; i < static_cast<std::size_t>(shapes_per_batch); ++i) {
            std::size_t j = i + rng.uniform_int(idx.size() - i);
            std::swap(idx[i], idx[j]);
            cfg.shape_set.push_back(pool[idx[i]]);
        }
        evaluate_batch(predictor, cfg, scenes_per_batch, rng, report);
    }
    if (report.scenes > 0) report.mean_l2 /= static_cast<double>(report.scenes);
    return report;
}

}  // namespace semdyn
