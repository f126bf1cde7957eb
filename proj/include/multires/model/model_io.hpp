#pragma once

// Model files: a JSON config (hyperparameters and fitted histograms) plus a
// parameter checkpoint in the ndiff format.

#include <string>

#include <json.hpp>

#include "multires/model/mrg.hpp"
#include "multires/ndiff/checkpoint.hpp"

namespace multires::model {

inline nlohmann::json model_config_to_json(const MRGModel& m) {
  nlohmann::json j;
  j["format"] = "multires-model-v1";
  j["model"] = to_json(m.config);
  j["root_hist"] = m.root_hist.to_json();
  j["count_hists"] = nlohmann::json::array();
  for (const auto& h : m.count_hists) j["count_hists"].push_back(h.to_json());
  return j;
}

/// Rebuilds a model from its config file and checkpoint.
inline MRGModel model_from_json(const nlohmann::json& config, const nlohmann::json& checkpoint) {
  if (!config.is_object() || config.value("format", "") != "multires-model-v1") {
    throw ParseError("model_config.format", "expected multires-model-v1");
  }
  if (!config.contains("model")) throw ParseError("model_config.model", "missing");
  MRGModel m = MRGModel::create(model_config_from_json(config.at("model")));
  if (!config.contains("root_hist")) throw ParseError("model_config.root_hist", "missing");
  m.root_hist = RootHistogram::from_json(config.at("root_hist"));
  const auto& ch = config.value("count_hists", nlohmann::json::array());
  if (!ch.is_array() || static_cast<int>(ch.size()) != m.depth()) {
    throw ParseError("model_config.count_hists", "expected one histogram per level");
  }
  for (int l = 0; l < m.depth(); ++l) {
    m.count_hists[l] = CountHistogram::from_json(ch[l], "model_config.count_hists[" + std::to_string(l) + "]");
  }
  ndiff::checkpoint_from_json(checkpoint, m.params);
  return m;
}

}  // namespace multires::model
