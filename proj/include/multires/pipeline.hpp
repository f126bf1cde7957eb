#pragma once

// File-based stages behind the command-line tool. Each stage reads the
// previous stage's directory and writes its own, including a manifest.json
// that depends only on the run config and the inputs, so reruns reproduce
// it byte for byte.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "multires/datasets.hpp"
#include "multires/hierarchy.hpp"
#include "multires/io.hpp"
#include "multires/metrics.hpp"
#include "multires/model.hpp"
#include "multires/parallel.hpp"

namespace multires::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

/// Failure with a machine-readable code, e.g. "missing_input".
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string code, const std::string& msg) : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct RunConfig {
  std::string scale = "desk";
  std::uint64_t seed = 0;  // drives data, model init, training order and sampling
  int threads = 1;         // never changes results
  datasets::DatasetSpec dataset = datasets::DatasetSpec::rcg_desk();
  model::ModelConfig model = model::ModelConfig::desk();
  int sample_count = 40;
  bool er_baseline = true;
};

namespace detail {

inline std::pair<int, int> int_range(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ParseError(field, "expected [min, max]");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

inline double probability(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError(field, "expected a number");
  return v.get<double>();
}

template <class T>
T get_as(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(field, e.what());
  }
}

inline void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ParseError(prefix.empty() ? "config" : prefix, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ParseError(prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown key");
    }
  }
}

inline datasets::DatasetSpec dataset_preset(datasets::Kind kind, const std::string& scale) {
  const bool desk = scale == "desk";
  if (kind == datasets::Kind::ppg) return desk ? datasets::DatasetSpec::ppg_desk() : datasets::DatasetSpec::ppg_paper();
  auto s = desk ? datasets::DatasetSpec::rcg_desk() : datasets::DatasetSpec::rcg_paper();
  s.kind = kind;
  return s;
}

}  // namespace detail

/// Scale presets first, then the file's keys, then `scale_override` and the
/// command-line flags applied by the caller.
inline RunConfig run_config_from_json(const json& j, const std::optional<std::string>& scale_override = std::nullopt) {
  detail::reject_unknown(j, "", {"scale", "seed", "threads", "dataset", "model", "sample", "eval"});
  RunConfig c;
  c.scale = scale_override.value_or(j.contains("scale") ? detail::get_as<std::string>(j["scale"], "scale") : "desk");
  if (c.scale != "desk" && c.scale != "paper") throw ParseError("scale", "expected desk or paper");
  if (j.contains("seed")) c.seed = detail::get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("threads")) c.threads = detail::get_as<int>(j["threads"], "threads");
  if (c.threads < 1) throw ParseError("threads", "must be >= 1");

  const json d = j.value("dataset", json::object());
  detail::reject_unknown(d, "dataset", {"kind", "count", "l", "k", "p", "p_in", "p_out", "dir"});
  const auto kind =
      datasets::kind_from_string(d.contains("kind") ? detail::get_as<std::string>(d["kind"], "dataset.kind") : "rcg");
  c.dataset = detail::dataset_preset(kind, c.scale);
  c.dataset.count = 200;
  if (d.contains("count")) c.dataset.count = detail::get_as<int>(d["count"], "dataset.count");
  if (d.contains("l")) std::tie(c.dataset.l_min, c.dataset.l_max) = detail::int_range(d["l"], "dataset.l");
  if (d.contains("k")) std::tie(c.dataset.k_min, c.dataset.k_max) = detail::int_range(d["k"], "dataset.k");
  if (d.contains("p")) c.dataset.p = detail::probability(d["p"], "dataset.p");
  if (d.contains("p_in")) c.dataset.p_in = detail::probability(d["p_in"], "dataset.p_in");
  if (d.contains("p_out")) c.dataset.p_out = detail::probability(d["p_out"], "dataset.p_out");
  if (d.contains("dir")) c.dataset.dir = detail::get_as<std::string>(d["dir"], "dataset.dir");

  c.model = model::model_config_from_json(j.value("model", json::object()),
                                          c.scale == "desk" ? model::ModelConfig::desk() : model::ModelConfig::paper());
  const json s = j.value("sample", json::object());
  detail::reject_unknown(s, "sample", {"count"});
  if (s.contains("count")) c.sample_count = detail::get_as<int>(s["count"], "sample.count");
  if (c.sample_count < 1) throw ParseError("sample.count", "must be >= 1");
  const json e = j.value("eval", json::object());
  detail::reject_unknown(e, "eval", {"baseline"});
  if (e.contains("baseline")) {
    const auto b = detail::get_as<std::string>(e["baseline"], "eval.baseline");
    if (b != "er" && b != "none") throw ParseError("eval.baseline", "expected er or none");
    c.er_baseline = b == "er";
  }
  c.dataset.validate();
  c.dataset.seed = c.model.seed = c.seed;
  return c;
}

/// Applies the single seed to every component.
inline void set_seed(RunConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.dataset.seed = seed;
  c.model.seed = seed;
}

/// Canonical form used for hashing; the thread count is excluded.
inline json to_json(const RunConfig& c) {
  json d = {{"kind", datasets::to_string(c.dataset.kind)},
            {"count", c.dataset.count},
            {"l", {c.dataset.l_min, c.dataset.l_max}},
            {"k", {c.dataset.k_min, c.dataset.k_max}}};
  if (c.dataset.p) d["p"] = *c.dataset.p;
  if (c.dataset.p_in) d["p_in"] = *c.dataset.p_in;
  if (c.dataset.p_out) d["p_out"] = *c.dataset.p_out;
  if (!c.dataset.dir.empty()) d["dir"] = c.dataset.dir;
  return {{"scale", c.scale},
          {"seed", c.seed},
          {"dataset", d},
          {"model", model::to_json(c.model)},
          {"sample", {{"count", c.sample_count}}},
          {"eval", {{"baseline", c.er_baseline ? "er" : "none"}}}};
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

// ---------------------------------------------------------------- files

inline std::string numbered(const char* prefix, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d%s", prefix, i, ext);
  return buf;
}

inline void require_dir(const fs::path& dir, const std::string& role) {
  if (!fs::is_directory(dir)) throw PipelineError("missing_input", role + " directory not found: " + dir.string());
}

/// Names of files in `dir` that start with `prefix` and end with `ext`, sorted.
inline std::vector<std::string> list_files(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && name.size() >= ext.size() &&
        name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<WeightedGraph> read_graphs(const fs::path& dir) {
  require_dir(dir, "graph");
  const auto names = list_files(dir, "graph_", ".txt");
  if (names.empty()) throw PipelineError("missing_input", "no graph_*.txt files in " + dir.string());
  std::vector<WeightedGraph> out;
  for (const auto& n : names) out.push_back(read_edge_list_text(read_file((dir / n).string()), n));
  return out;
}

inline std::vector<HierarchicalGraph> read_hierarchies(const fs::path& dir) {
  require_dir(dir, "hierarchy");
  const auto names = list_files(dir, "hg_", ".json");
  if (names.empty()) throw PipelineError("missing_input", "no hg_*.json files in " + dir.string());
  std::vector<HierarchicalGraph> out;
  for (const auto& n : names) {
    try {
      out.push_back(deserialize(read_file((dir / n).string())));
    } catch (const ParseError& e) {
      throw ParseError(n + ":" + e.field(), e.what());
    }
  }
  return out;
}

/// Fingerprint of an input directory: its manifest when present, otherwise
/// the names and contents of its regular files.
inline std::string dir_fingerprint(const fs::path& dir) {
  if (fs::is_regular_file(dir / "manifest.json")) return hex64(fnv1a64(read_file((dir / "manifest.json").string())));
  std::string acc;
  for (const auto& n : list_files(dir, "", "")) acc += n + "\n" + hex64(fnv1a64(read_file((dir / n).string()))) + "\n";
  return hex64(fnv1a64(acc));
}

inline void write_manifest(const fs::path& out, const std::string& command, const RunConfig& c, const json& inputs,
                           const std::vector<std::string>& outputs, const json& summary) {
  json files = json::array();
  for (const auto& n : outputs) files.push_back({{"file", n}, {"fnv1a", hex64(fnv1a64(read_file((out / n).string())))}});
  const json m = {{"format", "multires-manifest-v1"},
                  {"command", command},
                  {"config_hash", config_hash(c)},
                  {"seed", c.seed},
                  {"config", to_json(c)},
                  {"inputs", inputs},
                  {"outputs", files},
                  {"summary", summary}};
  write_file((out / "manifest.json").string(), m.dump(2) + "\n");
}

struct SplitIndices {
  std::vector<int> train, val, test;
};

/// The split recorded next to the graphs, or everything in every role.
inline SplitIndices read_split(const fs::path& dir, int n) {
  SplitIndices s;
  if (!fs::is_regular_file(dir / "split.json")) {
    for (int i = 0; i < n; ++i) s.train.push_back(i), s.test.push_back(i);
    return s;
  }
  const json j = json::parse(read_file((dir / "split.json").string()), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("split.json", "malformed JSON");
  auto read = [&](const char* key, std::vector<int>& v) {
    if (!j.contains(key) || !j[key].is_array()) throw ParseError(std::string("split.json.") + key, "expected an array");
    for (const auto& x : j[key]) {
      if (!x.is_number_integer() || x.get<int>() < 0 || x.get<int>() >= n) {
        throw ParseError(std::string("split.json.") + key, "index out of range");
      }
      v.push_back(x.get<int>());
    }
  };
  read("train", s.train);
  read("val", s.val);
  read("test", s.test);
  return s;
}

template <class T>
std::vector<T> subset(const std::vector<T>& v, const std::vector<int>& idx) {
  std::vector<T> out;
  for (int i : idx) out.push_back(v[i]);
  return out;
}

// ---------------------------------------------------------------- stages

/// Writes graph_NNNNN.txt edge lists and, for five or more graphs, split.json.
inline int cmd_gen_data(const RunConfig& c, const fs::path& out) {
  json inputs = json::array();
  if (c.dataset.kind == datasets::Kind::edge_list_dir) {
    require_dir(c.dataset.dir, "dataset");
    inputs.push_back({{"role", "edge_lists"}, {"fingerprint", dir_fingerprint(c.dataset.dir)}});
  }
  const auto graphs = datasets::generate_dataset(c.dataset);
  fs::create_directories(out);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    names.push_back(numbered("graph", static_cast<int>(i), ".txt"));
    write_file((out / names.back()).string(), format_edge_list(graphs[i]));
  }
  if (graphs.size() >= 5) {
    const auto s = datasets::split_80_20(static_cast<int>(graphs.size()), c.seed);
    write_file((out / "split.json").string(), json{{"train", s.train}, {"val", s.val}, {"test", s.test}}.dump() + "\n");
    names.push_back("split.json");
  }
  write_manifest(out, "gen-data", c, inputs, names,
                 {{"kind", datasets::to_string(c.dataset.kind)}, {"count", graphs.size()}});
  return static_cast<int>(graphs.size());
}

/// Builds one hierarchy of the configured depth per graph.
inline int cmd_build_hg(const RunConfig& c, const fs::path& in, const fs::path& out) {
  const auto graphs = read_graphs(in);
  std::vector<HierarchicalGraph> hgs(graphs.size());
  parallel_for(static_cast<int>(graphs.size()), c.threads, [&](int i) {
    hgs[i] = build_hierarchy(graphs[i], c.model.depth);
    hgs[i].validate();
  });
  fs::create_directories(out);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < hgs.size(); ++i) {
    names.push_back(numbered("hg", static_cast<int>(i), ".json"));
    write_file((out / names.back()).string(), serialize(hgs[i]));
  }
  if (fs::is_regular_file(in / "split.json")) {
    write_file((out / "split.json").string(), read_file((in / "split.json").string()));
    names.push_back("split.json");
  }
  write_manifest(out, "build-hg", c, json::array({{{"role", "graphs"}, {"fingerprint", dir_fingerprint(in)}}}), names,
                 {{"count", hgs.size()}, {"depth", c.model.depth}});
  return static_cast<int>(hgs.size());
}

struct TrainSummary {
  double initial_nll = 0;
  double final_nll = 0;
  std::vector<double> loss_trace;
  int train_count = 0;
};

/// Trains on the train split of a hierarchy directory; writes model.json,
/// params.json and loss_trace.csv.
inline TrainSummary cmd_train(const RunConfig& c, const fs::path& in, const fs::path& out, std::ostream* log = nullptr) {
  const auto all = read_hierarchies(in);
  const auto split = read_split(in, static_cast<int>(all.size()));
  const auto hgs = subset(all, split.train);
  if (hgs.empty()) throw PipelineError("invalid_input", "training split is empty");
  for (const auto& hg : hgs) {
    if (hg.depth() != c.model.depth) {
      throw PipelineError("invalid_input", "hierarchy depth " + std::to_string(hg.depth()) +
                                               " differs from model.depth " + std::to_string(c.model.depth));
    }
  }
  model::ModelConfig mc = c.model;
  if (mc.input_width == 0) mc.input_width = model::derive_input_width(hgs);
  auto m = model::MRGModel::create(mc);
  model::TrainOptions opt;
  opt.threads = c.threads;
  if (log) opt.on_epoch = [log](int e, double nll) { *log << "epoch " << e << " nll " << nll << "\n" << std::flush; };
  const auto r = model::train(m, hgs, opt);

  TrainSummary s;
  s.initial_nll = r.initial_nll;
  s.final_nll = model::mean_nll(m, hgs, c.threads);
  s.loss_trace = r.loss_trace;
  s.train_count = static_cast<int>(hgs.size());

  fs::create_directories(out);
  write_file((out / "model.json").string(), model::model_config_to_json(m).dump(2) + "\n");
  write_file((out / "params.json").string(), ndiff::checkpoint_to_json(m.params).dump() + "\n");
  std::ostringstream trace;
  trace.precision(17);
  trace << "epoch,nll\n0," << s.initial_nll << "\n";
  for (std::size_t e = 0; e < s.loss_trace.size(); ++e) trace << e + 1 << "," << s.loss_trace[e] << "\n";
  write_file((out / "loss_trace.csv").string(), trace.str());
  write_manifest(out, "train", c, json::array({{{"role", "hierarchies"}, {"fingerprint", dir_fingerprint(in)}}}),
                 {"model.json", "params.json", "loss_trace.csv"},
                 {{"train_count", s.train_count},
                  {"epochs", mc.epochs},
                  {"initial_nll", s.initial_nll},
                  {"final_nll", s.final_nll}});
  return s;
}

inline model::MRGModel load_model(const fs::path& dir) {
  require_dir(dir, "model");
  for (const char* f : {"model.json", "params.json"}) {
    if (!fs::is_regular_file(dir / f)) throw PipelineError("missing_input", std::string(f) + " not found in " + dir.string());
  }
  auto parse = [&](const char* f) {
    json j = json::parse(read_file((dir / f).string()), nullptr, false);
    if (j.is_discarded()) throw ParseError(f, "malformed JSON");
    return j;
  };
  return model::model_from_json(parse("model.json"), parse("params.json"));
}

/// Seed of the i-th generated graph.
inline std::uint64_t sample_seed(std::uint64_t seed, int i) {
  return splitmix64(seed ^ 0x73616d706c65ULL) + static_cast<std::uint64_t>(i);
}

/// Writes hg_NNNNN.json and the leaf as graph_NNNNN.txt for each sample.
inline int cmd_sample(const RunConfig& c, const fs::path& model_dir, const fs::path& out) {
  const auto m = load_model(model_dir);
  std::vector<HierarchicalGraph> hgs(static_cast<std::size_t>(c.sample_count));
  parallel_for(c.sample_count, c.threads, [&](int i) { hgs[i] = model::generate(m, sample_seed(c.seed, i)); });
  fs::create_directories(out);
  std::vector<std::string> names;
  for (int i = 0; i < c.sample_count; ++i) {
    names.push_back(numbered("hg", i, ".json"));
    write_file((out / names.back()).string(), serialize(hgs[i]));
    names.push_back(numbered("graph", i, ".txt"));
    write_file((out / names.back()).string(), format_edge_list(hgs[i].leaf()));
  }
  write_manifest(out, "sample", c, json::array({{{"role", "model"}, {"fingerprint", dir_fingerprint(model_dir)}}}),
                 names, {{"count", c.sample_count}});
  return c.sample_count;
}

struct EvalRow {
  std::string name;
  metrics::MmdRow mmd;
};

struct EvalReport {
  int reference_count = 0;
  std::vector<EvalRow> rows;
};

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{"degree", "clustering", "orbit", "spectrum"};
  return cols;
}

inline std::string format_table(const EvalReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s %12s\n", "model", "Deg.", "Clus.", "Orbit", "Spec.");
  out << buf;
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-16s %12.6f %12.6f %12.6f %12.6f\n", row.name.c_str(), row.mmd.degree,
                  row.mmd.clustering, row.mmd.orbit, row.mmd.spectrum);
    out << buf;
  }
  return out.str();
}

namespace detail {

/// Mean per-graph histogram of one statistic, padded to a common length.
inline std::vector<double> mean_hist(const std::vector<WeightedGraph>& gs, metrics::Statistic s, double& lo,
                                     double& width) {
  std::vector<double> acc;
  for (const auto& g : gs) {
    const auto h = s == metrics::Statistic::degree       ? metrics::degree_hist(g)
                   : s == metrics::Statistic::clustering ? metrics::clustering_hist(g)
                                                         : metrics::laplacian_spectrum_hist(g);
    lo = h.lo, width = h.width;
    if (acc.size() < h.mass.size()) acc.resize(h.mass.size(), 0.0);
    for (std::size_t i = 0; i < h.mass.size(); ++i) acc[i] += h.mass[i] / static_cast<double>(gs.size());
  }
  return acc;
}

}  // namespace detail

/// Compares each generated directory (name, dir) with the test split of
/// `ref`, optionally adding an Erdos-Renyi row matched to the train split.
/// Writes metrics.json, metrics.csv, metrics.txt and histogram plot data.
inline EvalReport cmd_eval(const RunConfig& c, const fs::path& ref, const std::vector<std::pair<std::string, fs::path>>& gens,
                           const fs::path& out) {
  const auto all = read_graphs(ref);
  const auto split = read_split(ref, static_cast<int>(all.size()));
  const auto test = subset(all, split.test);
  if (test.empty()) throw PipelineError("invalid_input", "reference test split is empty");
  if (gens.empty() && !c.er_baseline) throw PipelineError("invalid_input", "nothing to evaluate");

  EvalReport rep;
  rep.reference_count = static_cast<int>(test.size());
  std::vector<std::pair<std::string, std::vector<WeightedGraph>>> sets;
  json inputs = json::array({{{"role", "reference"}, {"fingerprint", dir_fingerprint(ref)}}});
  for (const auto& [name, dir] : gens) {
    sets.emplace_back(name, read_graphs(dir));
    inputs.push_back({{"role", name}, {"fingerprint", dir_fingerprint(dir)}});
  }
  if (c.er_baseline) {
    sets.emplace_back("erdos_renyi", metrics::erdos_renyi_baseline(subset(all, split.train),
                                                                   static_cast<int>(test.size()), splitmix64(c.seed ^ 0x4552ULL)));
  }
  for (const auto& [name, gs] : sets) rep.rows.push_back({name, metrics::mmd_table_row(test, gs, c.threads)});

  fs::create_directories(out);
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "model,degree,clustering,orbit,spectrum\n";
  for (const auto& r : rep.rows) {
    rows.push_back({{"name", r.name},
                    {"degree", r.mmd.degree},
                    {"clustering", r.mmd.clustering},
                    {"orbit", r.mmd.orbit},
                    {"spectrum", r.mmd.spectrum}});
    csv << r.name << "," << r.mmd.degree << "," << r.mmd.clustering << "," << r.mmd.orbit << "," << r.mmd.spectrum << "\n";
  }
  write_file((out / "metrics.json").string(),
             json{{"columns", metric_columns()}, {"reference_count", rep.reference_count}, {"rows", rows}}.dump(2) + "\n");
  write_file((out / "metrics.csv").string(), csv.str());
  write_file((out / "metrics.txt").string(), format_table(rep));

  std::ostringstream hist;
  hist.precision(17);
  hist << "set,statistic,bin_lo,mass\n";
  sets.insert(sets.begin(), {"reference", test});
  for (const auto& [name, gs] : sets) {
    for (auto s : {metrics::Statistic::degree, metrics::Statistic::clustering, metrics::Statistic::spectrum}) {
      double lo = 0, width = 1;
      const auto m = detail::mean_hist(gs, s, lo, width);
      for (std::size_t i = 0; i < m.size(); ++i) {
        hist << name << "," << metrics::to_string(s) << "," << lo + width * static_cast<double>(i) << "," << m[i] << "\n";
      }
    }
  }
  write_file((out / "histograms.csv").string(), hist.str());
  write_manifest(out, "eval", c, inputs, {"metrics.json", "metrics.csv", "metrics.txt", "histograms.csv"},
                 {{"reference_count", rep.reference_count}, {"rows", rep.rows.size()}});
  return rep;
}

/// Human-readable summary of a hierarchy file or a stage directory.
inline std::string cmd_inspect(const fs::path& path) {
  std::ostringstream out;
  if (fs::is_directory(path)) {
    if (!fs::is_regular_file(path / "manifest.json")) throw PipelineError("missing_input", "no manifest.json in " + path.string());
    const json m = json::parse(read_file((path / "manifest.json").string()), nullptr, false);
    if (m.is_discarded()) throw ParseError("manifest.json", "malformed JSON");
    out << "command      " << m.value("command", "?") << "\n";
    out << "config_hash  " << m.value("config_hash", "?") << "\n";
    out << "seed         " << m.value("seed", 0ULL) << "\n";
    out << "outputs      " << m.value("outputs", json::array()).size() << " files\n";
    out << "summary      " << m.value("summary", json::object()).dump() << "\n";
    return out.str();
  }
  if (!fs::is_regular_file(path)) throw PipelineError("missing_input", "not found: " + path.string());
  const auto hg = deserialize(read_file(path.string()));
  char buf[200];
  out << "depth " << hg.depth() << "\n";
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %12s %10s %10s %10s\n", "level", "nodes", "edges", "loops",
                "weight", "min_comm", "mean_comm", "max_comm");
  out << buf;
  for (int l = 0; l <= hg.depth(); ++l) {
    const auto& g = hg.level(l);
    std::size_t loops = 0;
    for (const auto& e : g.edges()) loops += e.u == e.v;
    std::string lo = "-", mean = "-", hi = "-";
    if (l >= 1) {
      const int np = hg.level(l - 1).num_nodes();
      std::vector<int> sizes(static_cast<std::size_t>(np), 0);
      for (NodeId p : hg.parent_node[l - 1]) ++sizes[p];
      lo = std::to_string(*std::min_element(sizes.begin(), sizes.end()));
      hi = std::to_string(*std::max_element(sizes.begin(), sizes.end()));
      char m[32];
      std::snprintf(m, sizeof m, "%.2f", static_cast<double>(g.num_nodes()) / np);
      mean = m;
    }
    std::snprintf(buf, sizeof buf, "%-6d %8d %8zu %8zu %12lld %10s %10s %10s\n", l, g.num_nodes(), g.num_edges(), loops,
                  static_cast<long long>(g.total_weight()), lo.c_str(), mean.c_str(), hi.c_str());
    out << buf;
  }
  out << "weight conserved: " << (hg.conserves_weight() ? "yes" : "no") << "\n";
  return out.str();
}

struct RunReport {
  TrainSummary train;
  EvalReport eval;
};

/// All stages into out/{data,hg,model,samples,eval}.
inline RunReport cmd_run(const RunConfig& c, const fs::path& out, std::ostream* log = nullptr) {
  cmd_gen_data(c, out / "data");
  cmd_build_hg(c, out / "data", out / "hg");
  RunReport r;
  r.train = cmd_train(c, out / "hg", out / "model", log);
  cmd_sample(c, out / "model", out / "samples");
  r.eval = cmd_eval(c, out / "data", {{"model", out / "samples"}}, out / "eval");
  return r;
}

}  // namespace multires::pipeline
