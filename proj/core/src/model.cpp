#include "semdyn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace semdyn {

std::string variant_name(VariantKind kind) {
    switch (kind) {
        case VariantKind::Baseline: return "baseline";
        case VariantKind::Internal: return "internal";
        case VariantKind::Sequential: return "sequential";
        case VariantKind::Parallel: return "parallel";
    }
    throw std::logic_error("unknown variant");
}

VariantKind variant_from_name(const std::string& name) {
    if (name == "baseline") return VariantKind::Baseline;
    if (name == "internal") return VariantKind::Internal;
    if (name == "sequential") return VariantKind::Sequential;
    if (name == "parallel") return VariantKind::Parallel;
    throw std::invalid_argument("unknown variant name: " + name);
}

ModelConfig ModelConfig::for_scenario(VariantKind kind, bool multi) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.slots = multi ? 7 : 5;
    switch (kind) {
        case VariantKind::Baseline: cfg.semantic_width = 0; break;
        case VariantKind::Internal:
        case VariantKind::Sequential: cfg.semantic_width = multi ? 16 : 9; break;
        case VariantKind::Parallel: cfg.semantic_width = multi ? 8 : 1; break;
    }
    return cfg;
}

int ModelConfig::pair_input_width() const {
    return 2 * kObjectFeatures + (semantic_takes_action() ? kActionWidth : 0);
}

int ModelConfig::tobj_input_width() const {
    switch (kind) {
        case VariantKind::Baseline: return kObjectFeatures + kActionWidth;
        case VariantKind::Internal: return semantic_width;
        case VariantKind::Sequential: return semantic_width + kActionWidth;
        case VariantKind::Parallel:
            return kObjectFeatures + semantic_width + kActionWidth;
    }
    throw std::logic_error("unknown variant");
}

void ModelConfig::validate() const {
    if (slots <= 0) throw std::invalid_argument("slots must be positive");
    if (kind == VariantKind::Baseline) {
        if (semantic_width != 0)
            throw std::invalid_argument("baseline has no semantic module");
    } else if (semantic_width <= 0) {
        throw std::invalid_argument("semantic_width must be positive");
    }
}

namespace {

std::size_t dense_params(int in, int out) {
    return static_cast<std::size_t>(in) * out + out;
}

}  // namespace

std::size_t ModelConfig::expected_parameter_count() const {
    std::size_t n = 0;
    if (has_semantic()) {
        n += dense_params(pair_input_width(), kRelationHidden);
        n += 2 * dense_params(kRelationHidden, kRelationHidden);
        n += dense_params(kRelationHidden, semantic_width);
    }
    n += dense_params(tobj_input_width(), kTransitionHidden);
    n += 2 * dense_params(kTransitionHidden, kTransitionHidden);
    n += dense_params(kTransitionHidden, kObjectFeatures);
    return n;
}

Model::Model(ModelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    auto add_layer = [this](const std::string& name, int in, int out) {
        Layer l;
        l.w = static_cast<int>(params_.size());
        params_.emplace_back(name + ".w", Tensor(static_cast<std::size_t>(in),
                                                 static_cast<std::size_t>(out)));
        l.b = static_cast<int>(params_.size());
        params_.emplace_back(name + ".b", Tensor(1, static_cast<std::size_t>(out)));
        return l;
    };
    if (cfg_.has_semantic()) {
        s_layers_.push_back(add_layer("s.h1", cfg_.pair_input_width(), kRelationHidden));
        s_layers_.push_back(add_layer("s.h2", kRelationHidden, kRelationHidden));
        s_layers_.push_back(add_layer("s.h3", kRelationHidden, kRelationHidden));
        s_layers_.push_back(add_layer("s.out", kRelationHidden, cfg_.semantic_width));
    }
    t_layers_.push_back(add_layer("t.h1", cfg_.tobj_input_width(), kTransitionHidden));
    t_layers_.push_back(add_layer("t.h2", kTransitionHidden, kTransitionHidden));
    t_layers_.push_back(add_layer("t.h3", kTransitionHidden, kTransitionHidden));
    t_layers_.push_back(add_layer("t.out", kTransitionHidden, kObjectFeatures));
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

void Model::init(Rng& rng) {
    for (auto& p : params_) {
        if (p.value.rows == 1 && p.name.ends_with(".b")) {
            p.value.zero();
            continue;
        }
        const double a = std::sqrt(1.0 / static_cast<double>(p.value.rows));
        for (double& v : p.value.v) v = rng.uniform(-a, a);
        p.zero_grad();
    }
}

Tensor repeat_actions(const Tensor& actions, int slots) {
    Tensor out(actions.rows * static_cast<std::size_t>(slots), actions.cols);
    for (std::size_t b = 0; b < actions.rows; ++b)
        for (int k = 0; k < slots; ++k)
            std::copy(actions.row(b), actions.row(b) + actions.cols,
                      out.row(b * static_cast<std::size_t>(slots) + static_cast<std::size_t>(k)));
    return out;
}

Tensor build_pair_matrix(const Tensor& z, const Tensor* actions, int slots) {
    const auto k = static_cast<std::size_t>(slots);
    if (z.rows % k != 0) throw std::invalid_argument("z rows not divisible by slot count");
    const std::size_t batch = z.rows / k;
    if (actions && actions->rows != batch)
        throw std::invalid_argument("action batch mismatch");
    const std::size_t m = z.cols;
    const std::size_t width = 2 * m + (actions ? actions->cols : 0);
    Tensor pairs(batch * k * k, width);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                double* row = pairs.row((b * k + i) * k + j);
                std::copy(z.row(b * k + i), z.row(b * k + i) + m, row);
                std::copy(z.row(b * k + j), z.row(b * k + j) + m, row + m);
                if (actions)
                    std::copy(actions->row(b), actions->row(b) + actions->cols, row + 2 * m);
            }
    return pairs;
}

NodeId Model::semantic(Tape& tape, const Tensor& z, const Tensor* actions) {
    if (!cfg_.has_semantic())
        throw std::logic_error("baseline model has no semantic readout");
    if (cfg_.semantic_takes_action() && !actions)
        throw std::invalid_argument("internal variant semantic module requires an action");
    if (!cfg_.semantic_takes_action() && actions)
        throw std::invalid_argument("semantic module of this variant is action-free");

    NodeId h = tape.constant(build_pair_matrix(z, actions, cfg_.slots));
    for (std::size_t l = 0; l + 1 < s_layers_.size(); ++l) {
        h = tape.affine(h, tape.param(params_[static_cast<std::size_t>(s_layers_[l].w)]),
                        tape.param(params_[static_cast<std::size_t>(s_layers_[l].b)]));
        h = tape.relu(h);
    }
    h = tape.sum_group_rows(h, static_cast<std::size_t>(cfg_.slots));
    const Layer& out = s_layers_.back();
    return tape.affine(h, tape.param(params_[static_cast<std::size_t>(out.w)]),
                       tape.param(params_[static_cast<std::size_t>(out.b)]));
}

NodeId Model::transition_mlp(Tape& tape, NodeId input) {
    NodeId h = input;
    for (std::size_t l = 0; l + 1 < t_layers_.size(); ++l) {
        h = tape.affine(h, tape.param(params_[static_cast<std::size_t>(t_layers_[l].w)]),
                        tape.param(params_[static_cast<std::size_t>(t_layers_[l].b)]));
        h = tape.relu(h);
    }
    const Layer& out = t_layers_.back();
    return tape.affine(h, tape.param(params_[static_cast<std::size_t>(out.w)]),
                       tape.param(params_[static_cast<std::size_t>(out.b)]));
}

NodeId Model::predict(Tape& tape, const Tensor& z, const Tensor& actions) {
    if (z.cols != kObjectFeatures || actions.cols != kActionWidth)
        throw std::invalid_argument("predict: bad input widths");
    switch (cfg_.kind) {
        case VariantKind::Baseline: {
            Tensor a_rep = repeat_actions(actions, cfg_.slots);
            Tensor input(z.rows, z.cols + a_rep.cols);
            for (std::size_t r = 0; r < z.rows; ++r) {
                std::copy(z.row(r), z.row(r) + z.cols, input.row(r));
                std::copy(a_rep.row(r), a_rep.row(r) + a_rep.cols, input.row(r) + z.cols);
            }
            return transition_mlp(tape, tape.constant(std::move(input)));
        }
        case VariantKind::Internal: {
            NodeId zhat = semantic(tape, z, &actions);
            return transition_mlp(tape, zhat);
        }
        case VariantKind::Sequential: {
            NodeId zhat = semantic(tape, z, nullptr);
            NodeId a_rep = tape.constant(repeat_actions(actions, cfg_.slots));
            return transition_mlp(tape, tape.concat_cols(zhat, a_rep));
        }
        case VariantKind::Parallel: {
            NodeId zhat = semantic(tape, z, nullptr);
            NodeId z_const = tape.constant(z);
            NodeId a_rep = tape.constant(repeat_actions(actions, cfg_.slots));
            NodeId joined = tape.concat_cols(tape.concat_cols(z_const, zhat), a_rep);
            return transition_mlp(tape, joined);
        }
    }
    throw std::logic_error("unknown variant");
}

std::vector<double> Model::predict_scene(const std::vector<double>& z_enc, const Action& a) {
    const auto k = static_cast<std::size_t>(cfg_.slots);
    if (z_enc.size() != k * kObjectFeatures)
        throw std::invalid_argument("scene encoding size mismatch");
    Tensor z(k, kObjectFeatures, z_enc);
    Tensor actions(1, kActionWidth, {a.v[0], a.v[1], a.v[2], a.v[3]});
    Tape tape;
    NodeId out = predict(tape, z, actions);
    return tape.value(out).v;
}

std::vector<double> Model::semantic_scene(const std::vector<double>& z_enc, const Action* a) {
    const auto k = static_cast<std::size_t>(cfg_.slots);
    Tensor z(k, kObjectFeatures, z_enc);
    Tape tape;
    if (a) {
        Tensor actions(1, kActionWidth, {a->v[0], a->v[1], a->v[2], a->v[3]});
        return tape.value(semantic(tape, z, &actions)).v;
    }
    return tape.value(semantic(tape, z, nullptr)).v;
}

}  // namespace semdyn
