#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "semdyn/env.hpp"

namespace semdyn {

// Line-delimited transition records. One JSON object per line with fields
// in the order scene_t (K*8 floats, row-major), action (4 floats),
// scene_t1 (K*8 floats).
void write_transition(std::ostream& os, const Transition& t);
void write_transitions(const std::string& path, const std::vector<Transition>& ts);
std::vector<Transition> read_transitions(const std::string& path, int slots);

}  // namespace semdyn
