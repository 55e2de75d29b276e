#pragma once

#include <string>
#include <vector>

#include "semdyn/env.hpp"
#include "semdyn/tape.hpp"

namespace semdyn {

// Wiring of the semantic module S and the object-wise transition MLP T_Obj.
// Baseline: T_Obj alone. Internal: zhat = S(z, a), T_Obj(zhat). Sequential:
// zhat = S(z), T_Obj([zhat; a]). Parallel: zhat = S(z), T_Obj([z; zhat; a]).
enum class VariantKind { Baseline, Internal, Sequential, Parallel };

std::string variant_name(VariantKind kind);
VariantKind variant_from_name(const std::string& name);

struct ModelConfig {
    VariantKind kind = VariantKind::Baseline;
    int slots = 5;           // K
    int semantic_width = 0;  // N_S; 0 for Baseline

    // Scenario presets: minimal keeps 9/9/1 semantic widths, multi 16/16/8.
    static ModelConfig for_scenario(VariantKind kind, bool multi);

    bool has_semantic() const { return kind != VariantKind::Baseline; }
    bool semantic_takes_action() const { return kind == VariantKind::Internal; }
    int pair_input_width() const;  // [z^k; z^j] (+ action for Internal)
    int tobj_input_width() const;
    std::size_t expected_parameter_count() const;
    void validate() const;
};

inline constexpr int kRelationHidden = 64;
inline constexpr int kTransitionHidden = 512;
inline constexpr int kActionWidth = 4;

class Model {
public:
    explicit Model(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    std::size_t parameter_count() const;

    // Uniform(-a, a) weights with a = sqrt(1/fan_in); zero biases.
    void init(Rng& rng);

    // Batched forward for B scenes. z: (B*K, 8) row-major slot features,
    // actions: (B, 4). Returns the (B*K, 8) prediction node.
    NodeId predict(Tape& tape, const Tensor& z, const Tensor& actions);

    // Semantic output zhat: (B*K, N_S). `actions` is required for the
    // Internal variant (its S is action-conditioned) and must be null for
    // Sequential/Parallel; Baseline has no semantic module.
    NodeId semantic(Tape& tape, const Tensor& z, const Tensor* actions);

    // Convenience single-call paths (no gradients kept).
    std::vector<double> predict_scene(const std::vector<double>& z_enc, const Action& a);
    std::vector<double> semantic_scene(const std::vector<double>& z_enc, const Action* a);

private:
    NodeId transition_mlp(Tape& tape, NodeId input);
    ModelConfig cfg_;
    std::vector<Parameter> params_;
    // parameter indices
    struct Layer {
        int w = -1;
        int b = -1;
    };
    std::vector<Layer> s_layers_;  // 3 hidden + output
    std::vector<Layer> t_layers_;  // 3 hidden + output
};

// [z^k; z^j; (a)] rows for all ordered pairs, j innermost, self-pair
// included. z: (B*K, M), actions: (B, 4) or null.
Tensor build_pair_matrix(const Tensor& z, const Tensor* actions, int slots);

// Each scene's action row repeated K times: (B*K, 4).
Tensor repeat_actions(const Tensor& actions, int slots);

}  // namespace semdyn
