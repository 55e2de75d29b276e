#include "semdyn/embed.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace semdyn {

std::string semantic_label_name(SemanticLabel label) {
    switch (label) {
        case SemanticLabel::None: return "none";
        case SemanticLabel::Locked: return "L";
        case SemanticLabel::Blocked: return "B";
        case SemanticLabel::Both: return "B+L";
    }
    throw std::logic_error("unknown label");
}

SemanticLabel semantic_label_from_flags(bool locked, bool blocked) {
    if (locked && blocked) return SemanticLabel::Both;
    if (locked) return SemanticLabel::Locked;
    if (blocked) return SemanticLabel::Blocked;
    return SemanticLabel::None;
}

namespace {

SemanticLabel label_from_name(const std::string& s) {
    if (s == "none") return SemanticLabel::None;
    if (s == "L") return SemanticLabel::Locked;
    if (s == "B") return SemanticLabel::Blocked;
    if (s == "B+L") return SemanticLabel::Both;
    throw std::runtime_error("unknown semantic label: " + s);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<EmbeddingRecord> collect_embeddings(Model& model, const EnvConfig& cfg,
                                                long n_scenes, Rng& rng) {
    if (!model.config().has_semantic())
        throw std::logic_error("baseline model has no semantic readout");
    const bool needs_action = model.config().semantic_takes_action();
    std::vector<EmbeddingRecord> out;
    const int n = model.config().semantic_width;

    for (long id = 0; id < n_scenes; ++id) {
        Scene scene = sample_scene(cfg, rng);
        std::vector<double> z = encode_scene(scene);
        std::optional<Action> action;
        if (needs_action) action = sample_action(scene, cfg, rng);
        std::vector<double> zhat =
            model.semantic_scene(z, action ? &*action : nullptr);
        SemanticGroundTruth gt = semantic_oracle(scene, cfg);

        for (int k = 0; k < cfg.slots; ++k) {
            const auto ki = static_cast<std::size_t>(k);
            if (!scene.slots[ki].has_value()) continue;
            EmbeddingRecord rec;
            rec.scene_id = id;
            rec.slot = k;
            std::copy_n(z.begin() + static_cast<long>(ki) * kObjectFeatures, kObjectFeatures,
                        rec.z.begin());
            rec.zhat.assign(zhat.begin() + static_cast<long>(ki) * n,
                            zhat.begin() + static_cast<long>(ki + 1) * n);
            rec.label = semantic_label_from_flags(gt.locked[ki], gt.blocked[ki]);
            rec.shape_idx = shape_index(scene.slots[ki]->shape);
            rec.is_lock = scene.slots[ki]->is_lock();
            rec.action = action;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

void write_embeddings_csv(const std::vector<EmbeddingRecord>& records,
                          const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open embeddings file: " + path);
    const int n = records.empty() ? 0 : static_cast<int>(records.front().zhat.size());
    const bool with_action = !records.empty() && records.front().action.has_value();
    os << "scene_id,slot";
    for (int i = 0; i < kObjectFeatures; ++i) os << ",z_" << i;
    for (int i = 0; i < n; ++i) os << ",zhat_" << i;
    os << ",label,shape_idx,is_lock";
    if (with_action)
        for (int i = 0; i < kActionWidth; ++i) os << ",action_" << i;
    os << '\n';
    for (const auto& r : records) {
        os << r.scene_id << ',' << r.slot;
        for (double v : r.z) os << ',' << fmt(v);
        for (double v : r.zhat) os << ',' << fmt(v);
        os << ',' << semantic_label_name(r.label) << ',' << r.shape_idx << ','
           << (r.is_lock ? 1 : 0);
        if (with_action)
            for (double v : r.action->v) os << ',' << fmt(v);
        os << '\n';
    }
    if (!os) throw std::runtime_error("embeddings write failed: " + path);
}

long export_embeddings(Model& model, const EnvConfig& cfg, long n_scenes, Rng& rng,
                       const std::string& path) {
    auto records = collect_embeddings(model, cfg, n_scenes, rng);
    write_embeddings_csv(records, path);
    return static_cast<long>(records.size());
}

std::vector<EmbeddingRecord> read_embeddings_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open embeddings file: " + path);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("empty embeddings file");
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    int n_zhat = 0;
    bool with_action = false;
    for (const auto& c : cols) {
        if (c.rfind("zhat_", 0) == 0) ++n_zhat;
        if (c.rfind("action_", 0) == 0) with_action = true;
    }

    std::vector<EmbeddingRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        auto next = [&]() {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("short embeddings row");
            return tok;
        };
        EmbeddingRecord r;
        r.scene_id = std::stol(next());
        r.slot = std::stoi(next());
        for (auto& v : r.z) v = std::stod(next());
        r.zhat.resize(static_cast<std::size_t>(n_zhat));
        for (auto& v : r.zhat) v = std::stod(next());
        r.label = label_from_name(next());
        r.shape_idx = std::stoi(next());
        r.is_lock = next() == "1";
        if (with_action) {
            Action a;
            for (auto& v : a.v) v = std::stod(next());
            r.action = a;
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

// Balanced train/test split, probe training and held-out accuracy for an
// arbitrary integer target extracted from each record.
struct ProbeRun {
    double accuracy = 0.0;
    std::vector<std::vector<long>> confusion;
    int n_classes = 0;
    long n_train = 0;
    long n_test = 0;
};

ProbeRun run_probe(const std::vector<EmbeddingRecord>& records,
                   const std::vector<int>& targets, double train_fraction, Rng& rng) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) by_class[targets[i]].push_back(i);
    if (by_class.size() < 2) throw std::invalid_argument("probe needs >= 2 classes");

    // Remap class ids to 0..C-1 in sorted order.
    std::map<int, int> class_id;
    for (const auto& [c, _] : by_class) class_id.emplace(c, static_cast<int>(class_id.size()));

    std::size_t per_class = records.size();
    for (const auto& [_, idx] : by_class) per_class = std::min(per_class, idx.size());

    std::vector<std::size_t> train_idx, test_idx;
    std::vector<int> train_y, test_y;
    for (auto& [c, idx] : by_class) {
        // Shuffle, then truncate to the balanced per-class count.
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            std::size_t j = i + rng.uniform_int(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        const auto n_train = static_cast<std::size_t>(
            static_cast<double>(per_class) * train_fraction);
        for (std::size_t i = 0; i < per_class; ++i) {
            if (i < n_train) {
                train_idx.push_back(idx[i]);
                train_y.push_back(class_id[c]);
            } else {
                test_idx.push_back(idx[i]);
                test_y.push_back(class_id[c]);
            }
        }
    }
    if (train_idx.empty() || test_idx.empty())
        throw std::invalid_argument("probe split produced an empty set");

    const auto dim = records.front().zhat.size();
    const int n_classes = static_cast<int>(class_id.size());
    auto fill = [&](const std::vector<std::size_t>& idx) {
        Tensor x(idx.size(), dim);
        for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy(records[idx[i]].zhat.begin(), records[idx[i]].zhat.end(), x.row(i));
        return x;
    };
    Tensor x_train = fill(train_idx);
    Tensor x_test = fill(test_idx);

    Parameter w("probe.w", Tensor(dim, static_cast<std::size_t>(n_classes)));
    Parameter b("probe.b", Tensor(1, static_cast<std::size_t>(n_classes)));
    std::vector<Parameter> params;
    params.push_back(std::move(w));
    params.push_back(std::move(b));

    constexpr int kSteps = 2000;
    constexpr double kLr = 0.1;
    for (int s = 0; s < kSteps; ++s) {
        Tape tape;
        NodeId logits = tape.affine(tape.constant(x_train), tape.param(params[0]),
                                    tape.param(params[1]));
        NodeId loss = tape.softmax_cross_entropy(logits, train_y);
        tape.backward(loss);
        for (auto& p : params) {
            for (std::size_t i = 0; i < p.value.size(); ++i)
                p.value.v[i] -= kLr * p.grad.v[i];
            p.zero_grad();
        }
    }

    Tape tape;
    NodeId logits = tape.affine(tape.constant(x_test), tape.param(params[0]),
                                tape.param(params[1]));
    const Tensor& out = tape.value(logits);
    ProbeRun run;
    run.n_classes = n_classes;
    run.n_train = static_cast<long>(train_idx.size());
    run.n_test = static_cast<long>(test_idx.size());
    run.confusion.assign(static_cast<std::size_t>(n_classes),
                         std::vector<long>(static_cast<std::size_t>(n_classes), 0));
    long correct = 0;
    for (std::size_t i = 0; i < out.rows; ++i) {
        int best = 0;
        for (int c = 1; c < n_classes; ++c)
            if (out.at(i, static_cast<std::size_t>(c)) >
                out.at(i, static_cast<std::size_t>(best)))
                best = c;
        run.confusion[static_cast<std::size_t>(test_y[i])][static_cast<std::size_t>(best)]++;
        if (best == test_y[i]) ++correct;
    }
    run.accuracy = static_cast<double>(correct) / static_cast<double>(out.rows);
    return run;
}

}  // namespace

ProbeReport linear_probe(const std::vector<EmbeddingRecord>& records,
                         double train_fraction, Rng& rng) {
    if (records.empty()) throw std::invalid_argument("no embedding records");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::invalid_argument("train_fraction must be in (0,1)");

    std::vector<int> labels(records.size());
    std::vector<int> shapes(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        labels[i] = static_cast<int>(records[i].label);
        shapes[i] = records[i].shape_idx;
    }

    ProbeReport report;
    ProbeRun sem = run_probe(records, labels, train_fraction, rng);
    report.semantic_accuracy = sem.accuracy;
    report.confusion = std::move(sem.confusion);
    report.n_labels = sem.n_classes;
    report.n_train = sem.n_train;
    report.n_test = sem.n_test;

    ProbeRun shp = run_probe(records, shapes, train_fraction, rng);
    report.shape_accuracy = shp.accuracy;
    report.n_shapes = shp.n_classes;
    return report;
}

}  // namespace semdyn
