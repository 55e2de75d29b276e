#pragma once

#include <string>

#include "semdyn/model.hpp"

namespace semdyn {

// Binary checkpoint, little-endian:
//   magic "SDWM", u32 version (1), u8 variant kind, u32 slots,
//   u32 semantic_width, u32 parameter count, then per parameter:
//   u32 name length, name bytes, u64 rows, u64 cols, rows*cols f64 values.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);  // throws on version/layout mismatch

}  // namespace semdyn
