#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "multires/common.hpp"

namespace multires::model {

/// Output activation of the per-edge logits.
enum class HeadKind { softmax, multihot, bernoulli };

inline std::string to_string(HeadKind k) {
  switch (k) {
    case HeadKind::softmax: return "softmax";
    case HeadKind::multihot: return "multihot";
    case HeadKind::bernoulli: return "bernoulli";
  }
  return "?";
}

inline HeadKind head_kind_from_string(const std::string& s, const std::string& field = "leaf_head") {
  if (s == "softmax") return HeadKind::softmax;
  if (s == "multihot") return HeadKind::multihot;
  if (s == "bernoulli") return HeadKind::bernoulli;
  throw ParseError(field, "expected softmax, multihot or bernoulli, got '" + s + "'");
}

struct ModelConfig {
  int depth = 2;          // L, number of generated levels below the root
  int mixtures = 20;      // K
  int hidden = 64;        // d_h
  int gnn_layers = 7;
  int input_width = 0;    // raw row width fed to the node embedding; 0 = derive from data
  HeadKind leaf_head = HeadKind::multihot;
  bool shared = false;    // one parameter set for every level
  double lr = 5e-4;
  int epochs = 30;
  int batch_size = 1;
  std::uint64_t seed = 0;

  /// Full-size defaults.
  static ModelConfig paper() { return {}; }

  /// Small network that trains in minutes on one core.
  static ModelConfig desk() {
    ModelConfig c;
    c.mixtures = 8;
    c.hidden = 32;
    c.gnn_layers = 3;
    c.lr = 2e-3;
    c.batch_size = 4;
    return c;
  }

  void validate() const {
    auto need = [](bool ok, const char* field, const char* what) {
      if (!ok) throw ParseError(std::string("model.") + field, what);
    };
    need(depth >= 1, "depth", "must be >= 1");
    need(mixtures >= 1, "mixtures", "must be >= 1");
    need(hidden >= 1, "hidden", "must be >= 1");
    need(gnn_layers >= 0, "gnn_layers", "must be >= 0");
    need(input_width >= 0, "input_width", "must be >= 0");
    need(lr >= 0, "lr", "must be >= 0");
    need(epochs >= 0, "epochs", "must be >= 0");
    need(batch_size >= 1, "batch_size", "must be >= 1");
  }
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"depth", c.depth},       {"mixtures", c.mixtures},     {"hidden", c.hidden},
          {"gnn_layers", c.gnn_layers}, {"input_width", c.input_width}, {"leaf_head", to_string(c.leaf_head)},
          {"shared", c.shared},     {"lr", c.lr},                 {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"seed", c.seed}};
}

/// Reads keys present in `j` on top of `base`; unknown keys are rejected.
inline ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {}) {
  if (!j.is_object()) throw ParseError("model", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    const std::string field = "model." + k;
    try {
      if (k == "depth") base.depth = v.get<int>();
      else if (k == "mixtures") base.mixtures = v.get<int>();
      else if (k == "hidden") base.hidden = v.get<int>();
      else if (k == "gnn_layers") base.gnn_layers = v.get<int>();
      else if (k == "input_width") base.input_width = v.get<int>();
      else if (k == "leaf_head") base.leaf_head = head_kind_from_string(v.get<std::string>(), field);
      else if (k == "shared") base.shared = v.get<bool>();
      else if (k == "lr") base.lr = v.get<double>();
      else if (k == "epochs") base.epochs = v.get<int>();
      else if (k == "batch_size") base.batch_size = v.get<int>();
      else if (k == "seed") base.seed = v.get<std::uint64_t>();
      else throw ParseError(field, "unknown key");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(field, e.what());
    }
  }
  base.validate();
  return base;
}

}  // namespace multires::model
