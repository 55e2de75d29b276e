#pragma once

#include <string>
#include <vector>

#include "semdyn/eval.hpp"

namespace semdyn {

enum class SemanticLabel { None = 0, Locked = 1, Blocked = 2, Both = 3 };

std::string semantic_label_name(SemanticLabel label);
SemanticLabel semantic_label_from_flags(bool locked, bool blocked);

// One non-empty slot of one sampled scene, with the semantic module's
// embedding and ground-truth labels. For the Internal variant the sampled
// action conditioning the embedding is recorded alongside.
struct EmbeddingRecord {
    long scene_id = 0;
    int slot = 0;
    std::array<double, kObjectFeatures> z{};
    std::vector<double> zhat;
    SemanticLabel label = SemanticLabel::None;
    int shape_idx = 0;
    bool is_lock = false;
    std::optional<Action> action;
};

// Samples n_scenes scenes, runs the semantic module and writes one CSV row
// per non-empty slot. Returns the record count.
long export_embeddings(Model& model, const EnvConfig& cfg, long n_scenes, Rng& rng,
                       const std::string& path);

std::vector<EmbeddingRecord> collect_embeddings(Model& model, const EnvConfig& cfg,
                                                long n_scenes, Rng& rng);
void write_embeddings_csv(const std::vector<EmbeddingRecord>& records,
                          const std::string& path);
std::vector<EmbeddingRecord> read_embeddings_csv(const std::string& path);

struct ProbeReport {
    double semantic_accuracy = 0.0;       // held-out, label-balanced
    double shape_accuracy = 0.0;          // leakage: shape index from zhat
    std::vector<std::vector<long>> confusion;  // [true label][predicted]
    int n_labels = 0;
    int n_shapes = 0;
    long n_train = 0;
    long n_test = 0;
};

// Multinomial linear classifier on zhat, softmax cross-entropy, plain
// full-batch gradient descent (2000 steps, lr 0.1). Classes are balanced by
// subsampling before the train/test split so chance level is 1/num_classes
// regardless of how skewed the raw state distribution is.
ProbeReport linear_probe(const std::vector<EmbeddingRecord>& records,
                         double train_fraction, Rng& rng);

}  // namespace semdyn
