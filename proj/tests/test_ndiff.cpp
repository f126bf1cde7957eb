#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "multires/ndiff/adam.hpp"
#include "multires/ndiff/checkpoint.hpp"
#include "multires/ndiff/layers.hpp"
#include "test_util.hpp"

using namespace multires;
using namespace multires::ndiff;
using multires::testing::max_rel_error;

namespace {

// Builds a scalar loss on a fresh tape from the store's current values.
using LossFn = std::function<Var(Tape&)>;

double eval_loss(const ParamStore& ps, const LossFn& f) {
  Tape t(&ps);
  return t.value(f(t)).data.at(0);
}

Grads analytic(const ParamStore& ps, const LossFn& f) {
  Tape t(&ps);
  Var loss = f(t);
  Grads g = ps.zeros_like();
  std::vector<Var> roots{loss};
  t.backward(roots, 1.0, g);
  return g;
}

// Central differences, eps = 1e-5, over every parameter scalar.
double fd_check(ParamStore& ps, const LossFn& f) {
  const Grads g = analytic(ps, f);
  std::vector<double> a, n;
  const double eps = 1e-5;
  for (int p = 0; p < ps.size(); ++p) {
    for (std::size_t i = 0; i < ps.value(p).size(); ++i) {
      double& x = ps.value(p).data[i];
      const double orig = x;
      x = orig + eps;
      const double up = eval_loss(ps, f);
      x = orig - eps;
      const double down = eval_loss(ps, f);
      x = orig;
      a.push_back(g[p].data[i]);
      n.push_back((up - down) / (2 * eps));
    }
  }
  return max_rel_error(a, n, 1e-4);
}

Tensor2 random_tensor(int r, int c, Rng& rng) {
  Tensor2 t(r, c);
  for (double& v : t.data) v = 2 * rng.uniform() - 1;
  return t;
}

// Reduces any output to a scalar through a fixed random projection.
Var project(Tape& t, Var out, const Tensor2& proj) { return sum_rows(t, matmul(t, out, t.constant(proj))); }

}  // namespace

TEST(Tape, OpsHaveCorrectGradients) {
  Rng rng(1);
  ParamStore ps;
  const int a = ps.add("a", random_tensor(3, 4, rng));
  const int b = ps.add("b", random_tensor(4, 2, rng));
  const int c = ps.add("c", random_tensor(1, 2, rng));
  const int s = ps.add("s", random_tensor(5, 1, rng));
  const Tensor2 proj = random_tensor(5, 1, rng);
  LossFn f = [&](Tape& t) {
    Var x = add_bias(t, matmul(t, t.param(a), t.param(b)), t.param(c));  // 3x2
    Var y = sigmoid(t, x);
    Var z = sub(t, add(t, y, x), relu(t, x));
    Var cat = concat_cols(t, z, y);                           // 3x4
    Var wide = concat_broadcast(t, cat, t.param(c));          // 3x6
    Var gathered = gather_rows(t, wide, {2, 0, 0, 1, 2});     // 5x6
    Var scaled = scale_rows(t, gathered, sigmoid(t, t.param(s)));
    Var back = scatter_add_rows(t, scaled, {0, 2, 2, 1, 0}, 3);  // 3x6
    Tensor2 p6(6, 1);
    for (int i = 0; i < 6; ++i) p6(i, 0) = proj(i % 5, 0) + 0.1 * i;
    return project(t, back, p6);
  };
  EXPECT_LT(fd_check(ps, f), 1e-4);
}

TEST(MLP, ZeroWeightsGiveZeroOutput) {
  Rng rng(2);
  ParamStore ps;
  MLP m = MLP::create(ps, "m", {3, 5, 2}, rng);
  for (int p = 0; p < ps.size(); ++p) ps.value(p).fill(0.0);
  Tape t(&ps);
  Var out = m(t, t.constant(random_tensor(4, 3, rng)));
  for (double v : t.value(out).data) EXPECT_EQ(v, 0.0);
}

TEST(MLP, RejectsBadInput) {
  Rng rng(3);
  ParamStore ps;
  MLP m = MLP::create(ps, "m", {3, 4, 2}, rng);
  Tape t(&ps);
  EXPECT_THROW(m(t, t.constant(Tensor2(2, 4))), std::invalid_argument);
  Tensor2 bad(1, 3);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(m(t, t.constant(bad)), std::domain_error);
  EXPECT_THROW(MLP::create(ps, "x", {3}, rng), std::invalid_argument);
}

TEST(MLP, FiniteDifferenceGradients) {
  Rng rng(4);
  ParamStore ps;
  MLP m = MLP::create(ps, "m", {3, 6, 6, 2}, rng);
  const Tensor2 x = random_tensor(5, 3, rng);
  const Tensor2 proj = random_tensor(2, 1, rng);
  LossFn f = [&](Tape& t) { return project(t, m(t, t.constant(x)), proj); };
  EXPECT_LT(fd_check(ps, f), 1e-4);
}

TEST(GNN, NoEdgesActsPerNode) {
  Rng rng(5);
  ParamStore ps;
  GNN g = GNN::create(ps, "g", 2, 4, rng);
  const Tensor2 h = random_tensor(3, 4, rng);
  Tape t(&ps);
  Var all = gnn_forward(t, g, t.constant(h), {});
  for (int r = 0; r < 3; ++r) {
    Tensor2 one(1, 4);
    for (int c = 0; c < 4; ++c) one(0, c) = h(r, c);
    Var single = gnn_forward(t, g, t.constant(one), {});
    for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(t.value(all)(r, c), t.value(single)(0, c));
  }
}

TEST(GNN, PermutationEquivariant) {
  Rng rng(6);
  ParamStore ps;
  GNN g = GNN::create(ps, "g", 3, 4, rng);
  const int n = 5;
  const Tensor2 h = random_tensor(n, 4, rng);
  EdgeList edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 3}};
  const std::vector<int> perm{3, 0, 4, 1, 2};  // old -> new
  Tensor2 hp(n, 4);
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < 4; ++c) hp(perm[v], c) = h(v, c);
  }
  EdgeList ep;
  for (auto [u, v] : edges) ep.emplace_back(perm[u], perm[v]);
  Tape t(&ps);
  const Tensor2 out = t.value(gnn_forward(t, g, t.constant(h), edges));
  const Tensor2 outp = t.value(gnn_forward(t, g, t.constant(hp), ep));
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(out(v, c), outp(perm[v], c), 1e-12);
  }
}

TEST(GNN, DanglingEdgeThrows) {
  Rng rng(7);
  ParamStore ps;
  GNN g = GNN::create(ps, "g", 1, 2, rng);
  Tape t(&ps);
  EXPECT_THROW(gnn_forward(t, g, t.constant(Tensor2(2, 2)), {{0, 2}}), std::out_of_range);
}

TEST(GNN, FiniteDifferenceGradientsOnPath) {
  Rng rng(8);
  ParamStore ps;
  GNN g = GNN::create(ps, "g", 2, 3, rng);
  const int hin = ps.add("h", random_tensor(4, 3, rng));
  const Tensor2 proj = random_tensor(3, 1, rng);
  EdgeList path{{0, 1}, {1, 2}, {2, 3}};
  LossFn f = [&](Tape& t) { return project(t, gnn_forward(t, g, t.param(hin), path), proj); };
  EXPECT_LT(fd_check(ps, f), 1e-4);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamStore ps;
  ps.add("x", Tensor2(1, 3, 0.7));
  AdamState st(ps, 0.1);
  for (int i = 0; i < 5; ++i) adam_step(st, ps, ps.zeros_like());
  for (double v : ps.value(0).data) EXPECT_EQ(v, 0.7);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore ps;
  ps.add("x", Tensor2(1, 2, std::vector<double>{1.0, -2.0}));
  AdamState st(ps, 0.01);
  Grads g = ps.zeros_like();
  g[0].data = {3.0, -0.5};
  adam_step(st, ps, g);
  EXPECT_NEAR(ps.value(0).data[0], 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(ps.value(0).data[1], -2.0 + 0.01, 1e-8);
}

TEST(Adam, DescendsQuadraticBowl) {
  ParamStore ps;
  ps.add("x", Tensor2(1, 1, 1.0));
  AdamState st(ps, 0.001);
  double prev = 1.0;
  for (int i = 0; i < 500; ++i) {
    Grads g = ps.zeros_like();
    g[0].data[0] = 2 * ps.value(0).data[0];
    adam_step(st, ps, g);
    const double x = std::abs(ps.value(0).data[0]);
    EXPECT_LT(x, prev);
    prev = x;
  }
  EXPECT_LT(prev, 0.9);
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(9);
  ParamStore a;
  MLP::create(a, "m", {3, 4, 2}, rng);
  ParamStore b;
  Rng other(10);
  MLP::create(b, "m", {3, 4, 2}, other);
  const auto text = checkpoint_to_json(a).dump();
  checkpoint_from_json(nlohmann::json::parse(text), b);
  for (int p = 0; p < a.size(); ++p) EXPECT_EQ(a.value(p), b.value(p));

  ParamStore c;
  MLP::create(c, "m", {3, 5, 2}, rng);
  EXPECT_THROW(checkpoint_from_json(nlohmann::json::parse(text), c), ParseError);
  EXPECT_THROW(checkpoint_from_json(nlohmann::json::parse("{}"), b), ParseError);
}
