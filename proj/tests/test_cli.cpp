#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

#include "multires/pipeline.hpp"
#include "test_util.hpp"

using namespace multires;
using namespace multires::pipeline;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("multires_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_config(std::uint64_t seed = 5) {
  RunConfig c = run_config_from_json({{"dataset", {{"count", 10}}},
                                      {"model", {{"epochs", 1}, {"hidden", 8}, {"gnn_layers", 1}, {"mixtures", 2}}},
                                      {"sample", {{"count", 4}}}});
  set_seed(c, seed);
  return c;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

/// Contents of every file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST(RunConfig, PresetsAndOverrides) {
  const auto desk = run_config_from_json(json::object());
  EXPECT_EQ(desk.scale, "desk");
  EXPECT_EQ(desk.dataset.l_min, 4);
  EXPECT_EQ(desk.model.hidden, model::ModelConfig::desk().hidden);
  const auto paper = run_config_from_json({{"scale", "paper"}, {"dataset", {{"kind", "ppg"}}}});
  EXPECT_EQ(paper.dataset.kind, datasets::Kind::ppg);
  EXPECT_EQ(paper.dataset.l_min, 20);
  EXPECT_EQ(paper.model.mixtures, 20);
  const auto c = run_config_from_json({{"seed", 9}, {"dataset", {{"l", {2, 3}}}}, {"model", {{"depth", 1}}}});
  EXPECT_EQ(c.dataset.l_max, 3);
  EXPECT_EQ(c.model.depth, 1);
  EXPECT_EQ(c.dataset.seed, 9u);
  EXPECT_EQ(c.model.seed, 9u);
}

TEST(RunConfig, RejectsUnknownKeysWithFieldPath) {
  try {
    run_config_from_json({{"dataset", {{"size", 3}}}});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "dataset.size");
  }
  EXPECT_THROW(run_config_from_json({{"model", {{"hidden", -1}}}}), ParseError);
  EXPECT_THROW(run_config_from_json({{"scale", "huge"}}), ParseError);
  EXPECT_THROW(run_config_from_json({{"dataset", {{"l", {5, 2}}}}}), ParseError);
  EXPECT_THROW(run_config_from_json({{"eval", {{"baseline", "gran"}}}}), ParseError);
}

TEST(RunConfig, HashIgnoresThreadsButNotSeed) {
  auto a = small_config();
  auto b = a;
  b.threads = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  set_seed(b, 6);
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Pipeline, RerunGivesByteIdenticalOutputs) {
  const auto root = scratch("rerun");
  const auto c = small_config();
  cmd_run(c, root / "a");
  auto c2 = c;
  c2.threads = 2;
  cmd_run(c2, root / "b");
  const auto a = snapshot(root / "a"), b = snapshot(root / "b");
  EXPECT_EQ(a, b);
  for (const char* stage : {"data", "hg", "model", "samples", "eval"}) {
    EXPECT_TRUE(a.count(std::string(stage) + "/manifest.json")) << stage;
  }
  fs::remove_all(root);
}

TEST(Pipeline, ManifestsCarryConfigHashAndSeed) {
  const auto root = scratch("manifest");
  const auto c = small_config(11);
  cmd_gen_data(c, root / "d");
  const json m = json::parse(slurp(root / "d" / "manifest.json"));
  EXPECT_EQ(m["config_hash"], config_hash(c));
  EXPECT_EQ(m["seed"], 11u);
  EXPECT_EQ(m["command"], "gen-data");
  EXPECT_EQ(m["outputs"].size(), 11u);  // ten graphs and the split
  fs::remove_all(root);
}

TEST(Pipeline, StagesDoNotMutateInputs) {
  const auto root = scratch("inputs");
  const auto c = small_config();
  cmd_gen_data(c, root / "d");
  const auto before = snapshot(root / "d");
  cmd_build_hg(c, root / "d", root / "h");
  cmd_train(c, root / "h", root / "m");
  cmd_sample(c, root / "m", root / "s");
  cmd_eval(c, root / "d", {{"model", root / "s"}}, root / "e");
  EXPECT_EQ(snapshot(root / "d"), before);
  fs::remove_all(root);
}

TEST(Pipeline, EvalOfIdenticalDirectoriesIsZero) {
  const auto root = scratch("identical");
  auto c = small_config();
  c.dataset.count = 4;  // below five graphs there is no split
  c.er_baseline = false;
  cmd_gen_data(c, root / "a");
  fs::copy(root / "a", root / "b");
  const auto rep = cmd_eval(c, root / "a", {{"copy", root / "b"}}, root / "e");
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].mmd.degree, 0.0);
  EXPECT_EQ(rep.rows[0].mmd.clustering, 0.0);
  EXPECT_EQ(rep.rows[0].mmd.orbit, 0.0);
  EXPECT_EQ(rep.rows[0].mmd.spectrum, 0.0);
  const json j = json::parse(slurp(root / "e" / "metrics.json"));
  EXPECT_EQ(j["columns"], json(metric_columns()));
  fs::remove_all(root);
}

TEST(Pipeline, SampledHierarchiesConserveWeight) {
  const auto root = scratch("samples");
  const auto c = small_config();
  cmd_run(c, root);
  for (const auto& n : list_files(root / "samples", "hg_", ".json")) {
    const auto hg = deserialize(slurp(root / "samples" / n));
    EXPECT_TRUE(hg.conserves_weight()) << n;
    EXPECT_EQ(hg.leaf(), read_edge_list_text(slurp(root / "samples" / ("graph_" + n.substr(3, 5) + ".txt"))));
  }
  fs::remove_all(root);
}

TEST(Pipeline, EdgeListDirectoryImport) {
  const auto root = scratch("import");
  fs::create_directories(root / "raw");
  write_file((root / "raw" / "b.edges").string(), "10 11\n11 12\n12 10\n");
  write_file((root / "raw" / "a.edges").string(), "# comment\n1 2\n2 3 1\n");
  auto c = run_config_from_json({{"dataset", {{"kind", "edge-list-dir"}, {"dir", (root / "raw").string()}}}});
  EXPECT_EQ(cmd_gen_data(c, root / "d"), 2);
  const auto gs = read_graphs(root / "d");
  EXPECT_EQ(gs[0], multires::testing::make_graph(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(gs[1], multires::testing::make_graph(3, {{0, 1}, {0, 2}, {1, 2}}));
  c.dataset.dir = (root / "missing").string();
  try {
    cmd_gen_data(c, root / "d2");
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), "missing_input");
  }
  fs::remove_all(root);
}

TEST(Pipeline, MissingInputsAndDepthMismatch) {
  const auto root = scratch("missing");
  const auto c = small_config();
  EXPECT_THROW(cmd_build_hg(c, root / "nope", root / "h"), PipelineError);
  EXPECT_THROW(load_model(root), PipelineError);
  cmd_gen_data(c, root / "d");
  cmd_build_hg(c, root / "d", root / "h");
  auto deeper = c;
  deeper.model.depth = 3;
  try {
    cmd_train(deeper, root / "h", root / "m");
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), "invalid_input");
  }
  fs::remove_all(root);
}

TEST(Pipeline, InspectSummaries) {
  const auto root = scratch("inspect");
  const auto c = small_config();
  cmd_gen_data(c, root / "d");
  cmd_build_hg(c, root / "d", root / "h");
  const auto s = cmd_inspect(root / "h" / "hg_00000.json");
  EXPECT_NE(s.find("depth 2"), std::string::npos);
  EXPECT_NE(s.find("weight conserved: yes"), std::string::npos);
  EXPECT_NE(cmd_inspect(root / "h").find("build-hg"), std::string::npos);
  fs::remove_all(root);
}

TEST(Cli, ErrorsAreSingleMachineParsableLines) {
  const auto root = scratch("binary");
  const std::string bin = MULTIRES_CLI_PATH;
  const auto err = (root / "err.txt").string();
  auto run = [&](const std::string& args) {
    const int rc = std::system((bin + " " + args + " 2> " + err + " > /dev/null").c_str());
    return WEXITSTATUS(rc);
  };
  const std::regex line(R"(error: code=[a-z_]+ msg="[^\n]*"\n)");
  EXPECT_EQ(run("--out " + root.string() + " build-hg --in " + (root / "nope").string()), 3);
  EXPECT_TRUE(std::regex_match(slurp(err), line)) << slurp(err);
  write_file((root / "bad.json").string(), "{\"model\": {\"depth\": 0}}");
  EXPECT_EQ(run("--config " + (root / "bad.json").string() + " --out " + root.string() + " run"), 2);
  EXPECT_NE(slurp(err).find("code=config msg=\"model.depth"), std::string::npos) << slurp(err);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_TRUE(std::regex_match(slurp(err), line)) << slurp(err);
  fs::remove_all(root);
}
