// Command-line front end for the pipeline stages.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "multires/pipeline.hpp"

namespace fs = std::filesystem;
using multires::ParseError;
using multires::pipeline::PipelineError;
using nlohmann::json;

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

int fail(const std::string& code, const std::string& msg, int status) {
  std::cerr << "error: code=" << code << " msg=\"" << escape(msg) << "\"\n";
  return status;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  if (!fs::is_regular_file(path)) throw PipelineError("missing_input", "config file not found: " + path);
  json j = json::parse(multires::read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("config", "malformed JSON in " + path);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical multi-resolution graph generation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scale;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--seed", seed, "Seed for every random choice");
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)");
  app.add_option("--out", out_dir, "Output directory (or file prefix)");
  app.add_option("--scale", scale, "Preset scale")->check(CLI::IsMember({"desk", "paper"}));

  auto* gen = app.add_subcommand("gen-data", "Generate or import a graph dataset");
  std::string kind, edge_dir;
  std::optional<int> count;
  gen->add_option("--kind", kind, "rcg, ppg or edge-list-dir")->check(CLI::IsMember({"rcg", "ppg", "edge-list-dir"}));
  gen->add_option("--count", count, "Number of graphs");
  gen->add_option("--dir", edge_dir, "Edge-list directory for edge-list-dir");

  auto* build = app.add_subcommand("build-hg", "Build hierarchies for a graph directory");
  std::string in_dir;
  std::optional<int> depth;
  build->add_option("--in", in_dir, "Graph directory")->required();
  build->add_option("--depth", depth, "Levels below the root");

  auto* train = app.add_subcommand("train", "Train a model on a hierarchy directory");
  std::optional<int> epochs;
  std::string leaf_head;
  bool shared = false;
  train->add_option("--in", in_dir, "Hierarchy directory")->required();
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--leaf-head", leaf_head, "multihot, softmax or bernoulli")
      ->check(CLI::IsMember({"multihot", "softmax", "bernoulli"}));
  train->add_flag("--shared", shared, "One parameter set for every level");

  auto* sample = app.add_subcommand("sample", "Generate graphs from a trained model");
  std::string model_dir;
  sample->add_option("--model", model_dir, "Model directory")->required();
  sample->add_option("--count", count, "Number of graphs");

  auto* eval = app.add_subcommand("eval", "MMD table of generated sets against a reference");
  std::string ref_dir, baseline;
  std::vector<std::string> gen_dirs;
  eval->add_option("--ref", ref_dir, "Reference dataset directory (its test split is used)")->required();
  eval->add_option("--gen", gen_dirs, "Generated directory, optionally NAME=DIR; repeatable");
  eval->add_option("--baseline", baseline, "er or none")->check(CLI::IsMember({"er", "none"}));

  auto* inspect = app.add_subcommand("inspect", "Summarize a hierarchy file or stage directory");
  std::string inspect_path;
  inspect->add_option("path", inspect_path, "hg_*.json file or stage directory")->required();

  auto* run = app.add_subcommand("run", "All stages from one config into --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    json j = load_config(config_path);
    if (!kind.empty()) j["dataset"]["kind"] = kind;
    if (!edge_dir.empty()) j["dataset"]["dir"] = edge_dir;
    if (count && gen->parsed()) j["dataset"]["count"] = *count;
    if (count && sample->parsed()) j["sample"]["count"] = *count;
    if (depth) j["model"]["depth"] = *depth;
    if (epochs) j["model"]["epochs"] = *epochs;
    if (!leaf_head.empty()) j["model"]["leaf_head"] = leaf_head;
    if (shared) j["model"]["shared"] = true;
    if (!baseline.empty()) j["eval"]["baseline"] = baseline;
    if (seed) j["seed"] = *seed;
    if (threads) j["threads"] = *threads;
    auto cfg = multires::pipeline::run_config_from_json(j, scale.empty() ? std::nullopt : std::optional(scale));

    if (inspect->parsed()) {
      std::cout << multires::pipeline::cmd_inspect(inspect_path);
      return 0;
    }
    if (out_dir.empty()) return fail("usage", "--out is required", 2);
    const fs::path out(out_dir);
    if (gen->parsed()) {
      const int n = multires::pipeline::cmd_gen_data(cfg, out);
      std::cout << "wrote " << n << " graphs to " << out.string() << "\n";
    } else if (build->parsed()) {
      const int n = multires::pipeline::cmd_build_hg(cfg, in_dir, out);
      std::cout << "wrote " << n << " hierarchies to " << out.string() << "\n";
    } else if (train->parsed()) {
      const auto s = multires::pipeline::cmd_train(cfg, in_dir, out, &std::cerr);
      std::cout << "trained on " << s.train_count << " graphs: nll " << s.initial_nll << " -> " << s.final_nll << "\n";
    } else if (sample->parsed()) {
      const int n = multires::pipeline::cmd_sample(cfg, model_dir, out);
      std::cout << "wrote " << n << " samples to " << out.string() << "\n";
    } else if (eval->parsed()) {
      std::vector<std::pair<std::string, fs::path>> gens;
      for (const auto& g : gen_dirs) {
        const auto eq = g.find('=');
        if (eq == std::string::npos) {
          gens.emplace_back(fs::path(g).filename().string(), g);
        } else {
          gens.emplace_back(g.substr(0, eq), g.substr(eq + 1));
        }
      }
      const auto rep = multires::pipeline::cmd_eval(cfg, ref_dir, gens, out);
      std::cout << multires::pipeline::format_table(rep);
    } else if (run->parsed()) {
      const auto r = multires::pipeline::cmd_run(cfg, out, &std::cerr);
      std::cout << "nll " << r.train.initial_nll << " -> " << r.train.final_nll << "\n"
                << multires::pipeline::format_table(r.eval);
    }
    return 0;
  } catch (const PipelineError& e) {
    return fail(e.code(), e.what(), e.code() == "missing_input" ? 3 : 4);
  } catch (const ParseError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_input", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
}
