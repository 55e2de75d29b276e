#pragma once

#include <map>
#include <string>

#include "semdyn/train.hpp"

namespace semdyn {

// Plain `key = value` config text, one entry per line, '#' comments.
// Keys mirror the EnvConfig / TrainConfig field names; shape_set is a
// comma-separated list of shape indices (0..26).
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_kv_text(const std::string& text);
KeyValueMap parse_kv_file(const std::string& path);

EnvConfig env_config_from_kv(const KeyValueMap& kv);
KeyValueMap env_config_to_kv(const EnvConfig& cfg);

TrainConfig train_config_from_kv(const KeyValueMap& kv);
KeyValueMap train_config_to_kv(const TrainConfig& cfg);

// Machine-readable snapshot of a resolved run: subcommand, configs, seed,
// tool version and output paths. Written before any long computation so a
// run can be reproduced from the manifest alone.
struct RunManifest {
    std::string subcommand;
    std::string tool_version;
    std::string started_at;  // informational; not part of the determinism contract
    std::uint64_t seed = 0;
    KeyValueMap config;
    std::map<std::string, std::string> outputs;
    std::map<std::string, std::string> notes;
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace semdyn
