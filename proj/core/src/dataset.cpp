#include "semdyn/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace semdyn {

void write_transition(std::ostream& os, const Transition& t) {
    nlohmann::ordered_json rec;
    rec["scene_t"] = encode_scene(t.scene_t);
    rec["action"] = t.action.v;
    rec["scene_t1"] = encode_scene(t.scene_t1);
    os << rec.dump() << '\n';
}

void write_transitions(const std::string& path, const std::vector<Transition>& ts) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open dataset for writing: " + path);
    for (const auto& t : ts) write_transition(os, t);
    if (!os) throw std::runtime_error("dataset write failed: " + path);
}

std::vector<Transition> read_transitions(const std::string& path, int slots) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    std::vector<Transition> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto rec = nlohmann::json::parse(line);
        Transition t;
        t.scene_t = decode_scene(rec.at("scene_t").get<std::vector<double>>(), slots);
        auto av = rec.at("action").get<std::vector<double>>();
        if (av.size() != 4) throw std::runtime_error("bad action width in dataset");
        t.action = Action{{av[0], av[1], av[2], av[3]}};
        t.scene_t1 = decode_scene(rec.at("scene_t1").get<std::vector<double>>(), slots);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace semdyn
