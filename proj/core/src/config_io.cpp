#include "semdyn/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace semdyn {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

const std::string& require(const KeyValueMap& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("missing config key: " + key);
    return it->second;
}

std::string get_or(const KeyValueMap& kv, const std::string& key, const std::string& def) {
    auto it = kv.find(key);
    return it == kv.end() ? def : it->second;
}

std::string shape_set_to_string(const std::vector<ShapeCode>& shapes) {
    std::string out;
    for (const auto& s : shapes) {
        if (!out.empty()) out += ',';
        out += std::to_string(shape_index(s));
    }
    return out;
}

std::vector<ShapeCode> shape_set_from_string(const std::string& s) {
    std::vector<ShapeCode> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(shape_from_index(std::stoi(trim(tok))));
    return out;
}

}  // namespace

KeyValueMap parse_kv_text(const std::string& text) {
    KeyValueMap kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValueMap parse_kv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_kv_text(buf.str());
}

EnvConfig env_config_from_kv(const KeyValueMap& kv) {
    EnvConfig cfg;
    cfg.slots = std::stoi(require(kv, "slots"));
    cfg.lock_count = {std::stoi(require(kv, "lock_count_min")),
                      std::stoi(require(kv, "lock_count_max"))};
    cfg.regular_count = {std::stoi(require(kv, "regular_count_min")),
                         std::stoi(require(kv, "regular_count_max"))};
    cfg.shape_set = shape_set_from_string(require(kv, "shape_set"));
    cfg.object_radius = std::stod(get_or(kv, "object_radius", "0.075"));
    cfg.touch_threshold =
        std::stod(get_or(kv, "touch_threshold", std::to_string(2.0 * cfg.object_radius)));
    cfg.drag_fraction = std::stod(get_or(kv, "drag_fraction", "0.25"));
    cfg.click_enabled = get_or(kv, "click_enabled", "false") == "true";
    cfg.seed = std::stoull(get_or(kv, "seed", "0"));
    cfg.validate();
    return cfg;
}

KeyValueMap env_config_to_kv(const EnvConfig& cfg) {
    KeyValueMap kv;
    kv["slots"] = std::to_string(cfg.slots);
    kv["lock_count_min"] = std::to_string(cfg.lock_count.min);
    kv["lock_count_max"] = std::to_string(cfg.lock_count.max);
    kv["regular_count_min"] = std::to_string(cfg.regular_count.min);
    kv["regular_count_max"] = std::to_string(cfg.regular_count.max);
    kv["shape_set"] = shape_set_to_string(cfg.shape_set);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.object_radius);
    kv["object_radius"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.touch_threshold);
    kv["touch_threshold"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.drag_fraction);
    kv["drag_fraction"] = buf;
    kv["click_enabled"] = cfg.click_enabled ? "true" : "false";
    kv["seed"] = std::to_string(cfg.seed);
    return kv;
}

TrainConfig train_config_from_kv(const KeyValueMap& kv) {
    TrainConfig cfg;
    cfg.env = env_config_from_kv(kv);
    cfg.kind = variant_from_name(require(kv, "variant"));
    cfg.semantic_width = std::stoi(get_or(kv, "semantic_width", "-1"));
    cfg.batch_size = std::stoi(get_or(kv, "batch_size", "10"));
    cfg.trajectory_length = std::stoi(get_or(kv, "trajectory_length", "10"));
    cfg.total_steps = std::stol(require(kv, "total_steps"));
    cfg.eval_every = std::stol(get_or(kv, "eval_every", "2000"));
    cfg.eval_scenes = std::stol(get_or(kv, "eval_scenes", "2000"));
    cfg.seed = std::stoull(get_or(kv, "seed", "0"));
    cfg.adam.lr = std::stod(get_or(kv, "adam_lr", "0.001"));
    cfg.adam.beta1 = std::stod(get_or(kv, "adam_beta1", "0.9"));
    cfg.adam.beta2 = std::stod(get_or(kv, "adam_beta2", "0.999"));
    cfg.adam.eps = std::stod(get_or(kv, "adam_eps", "1e-08"));
    cfg.validate();
    return cfg;
}

KeyValueMap train_config_to_kv(const TrainConfig& cfg) {
    KeyValueMap kv = env_config_to_kv(cfg.env);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.adam.lr);
    kv["adam_lr"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.adam.beta1);
    kv["adam_beta1"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.adam.beta2);
    kv["adam_beta2"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.adam.eps);
    kv["adam_eps"] = buf;
    kv["variant"] = variant_name(cfg.kind);
    kv["semantic_width"] = std::to_string(cfg.semantic_width);
    kv["batch_size"] = std::to_string(cfg.batch_size);
    kv["trajectory_length"] = std::to_string(cfg.trajectory_length);
    kv["total_steps"] = std::to_string(cfg.total_steps);
    kv["eval_every"] = std::to_string(cfg.eval_every);
    kv["eval_scenes"] = std::to_string(cfg.eval_scenes);
    kv["seed"] = std::to_string(cfg.seed);
    return kv;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::ordered_json j;
    j["subcommand"] = m.subcommand;
    j["tool_version"] = m.tool_version;
    j["started_at"] = m.started_at;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["outputs"] = m.outputs;
    j["notes"] = m.notes;
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open manifest for writing: " + path);
    os << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.tool_version = j.value("tool_version", "");
    m.started_at = j.value("started_at", "");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<KeyValueMap>();
    if (j.contains("outputs")) m.outputs = j["outputs"].get<std::map<std::string, std::string>>();
    if (j.contains("notes")) m.notes = j["notes"].get<std::map<std::string, std::string>>();
    return m;
}

}  // namespace semdyn
