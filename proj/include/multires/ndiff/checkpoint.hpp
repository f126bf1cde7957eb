#pragma once

#include <string>

#include <json.hpp>

#include "multires/common.hpp"
#include "multires/ndiff/tape.hpp"

namespace multires::ndiff {

// Checkpoint format (JSON):
//   {"format": "multires-checkpoint-v1",
//    "tensors": [{"name": "...", "rows": r, "cols": c, "data": [...]}, ...]}
// Doubles are written in shortest round-trip form, so save/load is exact.

inline nlohmann::json checkpoint_to_json(const ParamStore& ps) {
  nlohmann::json j;
  j["format"] = "multires-checkpoint-v1";
  j["tensors"] = nlohmann::json::array();
  for (int p = 0; p < ps.size(); ++p) {
    const auto& t = ps.value(p);
    j["tensors"].push_back({{"name", ps.name(p)}, {"rows", t.rows}, {"cols", t.cols}, {"data", t.data}});
  }
  return j;
}

/// Loads tensors into an already-shaped store; names and shapes must match.
inline void checkpoint_from_json(const nlohmann::json& j, ParamStore& ps) {
  if (!j.is_object() || j.value("format", "") != "multires-checkpoint-v1") {
    throw ParseError("checkpoint.format", "expected multires-checkpoint-v1");
  }
  const auto& tensors = j.at("tensors");
  if (!tensors.is_array() || static_cast<int>(tensors.size()) != ps.size()) {
    throw ParseError("checkpoint.tensors", "tensor count does not match model");
  }
  for (const auto& tj : tensors) {
    const std::string name = tj.at("name").get<std::string>();
    const int id = ps.find(name);
    if (id < 0) throw ParseError("checkpoint.tensors." + name, "unknown tensor");
    auto& t = ps.value(id);
    const int rows = tj.at("rows").get<int>();
    const int cols = tj.at("cols").get<int>();
    if (rows != t.rows || cols != t.cols) throw ParseError("checkpoint.tensors." + name, "shape mismatch");
    auto data = tj.at("data").get<std::vector<double>>();
    if (data.size() != t.size()) throw ParseError("checkpoint.tensors." + name, "value count mismatch");
    t.data = std::move(data);
  }
}

}  // namespace multires::ndiff
