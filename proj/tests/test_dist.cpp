#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "multires/dist.hpp"

using namespace multires;
using namespace multires::dist;

namespace {

// Parameter vectors used across the grid; one contains a zero component.
std::vector<std::vector<double>> thetas_for(int E) {
  std::vector<std::vector<double>> out;
  out.push_back(std::vector<double>(E, 1.0 / E));
  Rng rng(100 + E);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> t(E);
    double s = 0;
    for (auto& v : t) s += (v = 0.05 + rng.uniform());
    for (auto& v : t) v /= s;
    out.push_back(t);
  }
  if (E >= 2) {
    std::vector<double> t(E, 0.0);
    for (int e = 1; e < E; ++e) t[e] = 1.0 / (E - 1);
    out.push_back(t);
  }
  return out;
}

std::vector<GroupSplit> contiguous_splits(int E) {
  std::vector<GroupSplit> out;
  for (int a = 1; a < E; ++a) out.push_back({{a, E - a}});
  for (int a = 1; a < E; ++a) {
    for (int b = 1; a + b < E; ++b) out.push_back({{a, b, E - a - b}});
  }
  return out;
}

// Direct product form, independent of the log-gamma path.
double mn_pmf_direct(const CountVector& x, const std::vector<double>& theta) {
  double p = 1;
  Count n = 0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    for (Count i = 1; i <= x[e]; ++i) {
      ++n;
      p *= static_cast<double>(n) / static_cast<double>(i) * theta[e];
    }
  }
  return p;
}

}  // namespace

TEST(MnLogpmf, Examples) {
  EXPECT_NEAR(mn_logpmf(CountVector{1, 1}, 2, std::vector<double>{0.5, 0.5}), std::log(0.5), 1e-12);
  EXPECT_NEAR(mn_logpmf(CountVector{1, 0, 2}, 3, std::vector<double>{0.2, 0.3, 0.5}), std::log(0.15), 1e-12);
  EXPECT_NEAR(mn_logpmf(CountVector{3}, 3, std::vector<double>{1.0}), 0.0, 1e-12);
  EXPECT_EQ(mn_logpmf(CountVector{1, 1}, 2, std::vector<double>{1.0, 0.0}), kNegInf);
  EXPECT_THROW(mn_logpmf(CountVector{1, 1}, 3, std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST(BiLogpmf, Examples) {
  EXPECT_NEAR(bi_logpmf(1, 2, 0.5), std::log(0.5), 1e-12);
  EXPECT_NEAR(bi_logpmf(0, 5, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(bi_logpmf(2, 3, 0.2), std::log(0.096), 1e-12);
  double s = 0;
  for (int k = 0; k <= 3; ++k) s += std::exp(bi_logpmf(k, 3, 0.2));
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_THROW(bi_logpmf(4, 3, 0.2), std::invalid_argument);
  EXPECT_THROW(bi_logpmf(1, 3, 1.5), std::invalid_argument);
}

TEST(StickChain, Examples) {
  EXPECT_NEAR(stick_chain_logpmf(CountVector{1, 1}, 2, std::vector<double>{0.5, 0.5}), std::log(0.5), 1e-12);
  EXPECT_NEAR(stick_chain_logpmf(CountVector{1, 0, 2}, 3, std::vector<double>{0.2, 0.3, 0.5}), std::log(0.15), 1e-12);
}

TEST(GroupedMarginal, Examples) {
  std::vector<double> th{0.2, 0.3, 0.5};
  auto a = grouped_marginal_params(th, GroupSplit{{1, 2}});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NEAR(a[0], 0.2, 1e-15);
  EXPECT_NEAR(a[1], 0.8, 1e-15);
  EXPECT_EQ(grouped_marginal_params(th, GroupSplit::singletons(3)), th);
  auto w = grouped_marginal_params(th, GroupSplit::whole(3));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NEAR(w[0], 1.0, 1e-15);
}

TEST(ConditionalGroup, Examples) {
  EXPECT_NEAR(conditional_group_logpmf(CountVector{0, 2}, 2, std::vector<double>{0.3, 0.5}), std::log(0.390625), 1e-12);
  EXPECT_EQ(conditional_group_logpmf(CountVector{0, 0}, 0, std::vector<double>{0.3, 0.5}), 0.0);
  EXPECT_NEAR(conditional_group_logpmf(CountVector{1, 1}, 2, std::vector<double>{0.2, 0.2}), std::log(0.5), 1e-12);
  EXPECT_THROW(conditional_group_logpmf(CountVector{1, 0}, 1, std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST(GroupChain, Examples) {
  std::vector<double> th{0.2, 0.3, 0.5};
  CountVector x{1, 0, 2};
  // Hand chain: Bi(1|3,0.2) = 0.384, then Mu([0,2] | 2, [0.375,0.625]) = 0.390625.
  EXPECT_NEAR(std::exp(bi_logpmf(1, 3, 0.2)), 0.384, 1e-12);
  EXPECT_NEAR(group_chain_logpmf(x, 3, th, GroupSplit{{1, 2}}), std::log(0.15), 1e-12);
  EXPECT_NEAR(group_chain_logpmf(x, 3, th, GroupSplit::whole(3)), mn_logpmf(x, 3, th), 1e-12);
  EXPECT_NEAR(group_chain_logpmf(x, 3, th, GroupSplit::singletons(3)), stick_chain_logpmf(x, 3, th), 1e-12);
}

TEST(EnumerateSupport, Examples) {
  EXPECT_EQ(enumerate_support(2, 2), (std::vector<CountVector>{{2, 0}, {1, 1}, {0, 2}}));
  EXPECT_EQ(enumerate_support(0, 3), (std::vector<CountVector>{{0, 0, 0}}));
  EXPECT_EQ(enumerate_support(3, 3).size(), 10u);
  EXPECT_THROW(enumerate_support(200, 10, 1000), std::invalid_argument);
}

// Factorization identities over the whole grid w <= 6, E <= 5.
TEST(FactorizationGrid, ChainsEqualMultinomialAndNormalize) {
  long checked = 0;
  for (int E = 1; E <= 5; ++E) {
    const auto splits = contiguous_splits(E);
    for (const auto& theta : thetas_for(E)) {
      for (Count w = 0; w <= 6; ++w) {
        double mass = 0;
        for (const auto& x : enumerate_support(w, E)) {
          const double ref = mn_logpmf(x, w, theta);
          const double direct = mn_pmf_direct(x, theta);
          EXPECT_NEAR(std::exp(ref), direct, 1e-12);
          mass += std::exp(ref);
          const double stick = stick_chain_logpmf(x, w, theta);
          if (ref == kNegInf) {
            EXPECT_EQ(stick, kNegInf);
          } else {
            EXPECT_NEAR(stick, ref, 1e-9);
          }
          for (const auto& split : splits) {
            const double chain = group_chain_logpmf(x, w, theta, split);
            if (ref == kNegInf) {
              EXPECT_EQ(chain, kNegInf);
            } else {
              EXPECT_NEAR(chain, ref, 1e-9);
            }
            ++checked;
          }
        }
        EXPECT_NEAR(mass, 1.0, 1e-9);
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

// Group sums are multinomial in the group masses, and within-group counts
// given the sum are multinomial in the renormalized group parameters.
TEST(FactorizationGrid, GroupMarginalsAndConditionals) {
  for (int E = 2; E <= 5; ++E) {
    for (const auto& theta : thetas_for(E)) {
      for (const auto& split : contiguous_splits(E)) {
        const auto alpha = grouped_marginal_params(theta, split);
        for (Count w = 0; w <= 6; ++w) {
          std::map<CountVector, double> marginal;
          const auto support = enumerate_support(w, E);
          for (const auto& x : support) marginal[group_sums(x, split)] += std::exp(mn_logpmf(x, w, theta));
          for (const auto& [v, p] : marginal) EXPECT_NEAR(p, std::exp(mn_logpmf(v, w, alpha)), 1e-9);

          for (const auto& x : support) {
            const double joint = std::exp(mn_logpmf(x, w, theta));
            const auto v = group_sums(x, split);
            const double pv = marginal[v];
            if (pv <= 0) continue;
            double cond = 1;
            std::size_t off = 0;
            for (std::size_t m = 0; m < v.size(); ++m) {
              const auto size = static_cast<std::size_t>(split.sizes[m]);
              CountVector u(x.begin() + off, x.begin() + off + size);
              std::vector<double> tm(theta.begin() + off, theta.begin() + off + size);
              double s = 0;
              for (double t : tm) s += t;
              if (v[m] > 0 && s == 0) cond = 0;
              else cond *= std::exp(conditional_group_logpmf(u, v[m], tm));
              off += size;
            }
            EXPECT_NEAR(joint / pv, cond, 1e-9);
          }
        }
      }
    }
  }
}

TEST(Samplers, Trivial) {
  Rng rng(1);
  std::vector<double> th{0.2, 0.3, 0.5};
  EXPECT_EQ(mn_sample(rng, 0, th), (CountVector{0, 0, 0}));
  EXPECT_EQ(group_chain_sample(rng, 0, th, GroupSplit{{1, 2}}), (CountVector{0, 0, 0}));
  std::vector<double> point{1.0, 0.0, 0.0};
  EXPECT_EQ(mn_sample(rng, 5, point), (CountVector{5, 0, 0}));
  EXPECT_EQ(group_chain_sample(rng, 5, point, GroupSplit{{2, 1}}), (CountVector{5, 0, 0}));
}

TEST(Samplers, ConserveTotals) {
  Rng rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    const int E = 1 + static_cast<int>(rng.below(6));
    const Count w = static_cast<Count>(rng.below(500));
    auto th = thetas_for(E)[rng.below(thetas_for(E).size())];
    EXPECT_EQ(total(mn_sample(rng, w, th)), w);
    if (E >= 2) {
      const int a = 1 + static_cast<int>(rng.below(E - 1));
      EXPECT_EQ(total(group_chain_sample(rng, w, th, GroupSplit{{a, E - a}})), w);
    }
  }
}

namespace {

double tv_against_pmf(const std::map<CountVector, long>& counts, long draws, Count w, const std::vector<double>& th) {
  double tv = 0;
  for (const auto& x : enumerate_support(w, static_cast<int>(th.size()))) {
    auto it = counts.find(x);
    const double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / draws;
    tv += std::abs(emp - std::exp(mn_logpmf(x, w, th)));
  }
  return tv / 2;
}

}  // namespace

TEST(Samplers, GroupChainMatchesPmfInTotalVariation) {
  const std::vector<double> th{0.2, 0.3, 0.5};
  const long draws = 200000;
  for (const auto& split : {GroupSplit{{1, 2}}, GroupSplit{{2, 1}}, GroupSplit::singletons(3)}) {
    Rng rng(42);
    std::map<CountVector, long> counts;
    for (long i = 0; i < draws; ++i) ++counts[group_chain_sample(rng, 4, th, split)];
    EXPECT_LT(tv_against_pmf(counts, draws, 4, th), 0.01);
  }
  Rng rng(43);
  std::map<CountVector, long> counts;
  for (long i = 0; i < draws; ++i) ++counts[mn_sample(rng, 4, th)];
  EXPECT_LT(tv_against_pmf(counts, draws, 4, th), 0.01);
}

TEST(Samplers, BinomialMomentsLargeN) {
  Rng rng(5);
  for (auto [n, p] : std::vector<std::pair<Count, double>>{{10, 0.3}, {100, 0.3}, {5000, 0.02}, {5000, 0.9}}) {
    const int draws = 40000;
    double s = 0, s2 = 0;
    for (int i = 0; i < draws; ++i) {
      const Count k = binomial_sample(rng, n, p);
      ASSERT_GE(k, 0);
      ASSERT_LE(k, n);
      s += static_cast<double>(k);
      s2 += static_cast<double>(k) * static_cast<double>(k);
    }
    const double mean = s / draws;
    const double var = s2 / draws - mean * mean;
    const double true_var = static_cast<double>(n) * p * (1 - p);
    EXPECT_NEAR(mean, static_cast<double>(n) * p, 5 * std::sqrt(true_var / draws));
    EXPECT_NEAR(var / true_var, 1.0, 0.05);
  }
  EXPECT_EQ(binomial_sample(rng, 100, 0.0), 0);
  EXPECT_EQ(binomial_sample(rng, 100, 1.0), 100);
}

TEST(Samplers, BinomialExactPmfSmallAndLarge) {
  for (auto [n, p] : std::vector<std::pair<Count, double>>{{6, 0.35}, {80, 0.7}}) {
    Rng rng(17);
    const long draws = 200000;
    std::vector<long> hist(n + 1, 0);
    for (long i = 0; i < draws; ++i) ++hist[binomial_sample(rng, n, p)];
    double tv = 0;
    for (Count k = 0; k <= n; ++k) tv += std::abs(static_cast<double>(hist[k]) / draws - std::exp(bi_logpmf(k, n, p)));
    EXPECT_LT(tv / 2, 0.01);
  }
}

TEST(Samplers, ConditionalBernoulliMatchesEnumeration) {
  const std::vector<double> p{0.1, 0.6, 0.3, 0.8};
  const Count count = 2;
  std::map<CountVector, double> exact;
  double z = 0;
  for (int mask = 0; mask < 16; ++mask) {
    if (__builtin_popcount(mask) != count) continue;
    CountVector x(4);
    double pr = 1;
    for (int i = 0; i < 4; ++i) {
      x[i] = (mask >> i) & 1;
      pr *= x[i] ? p[i] : 1 - p[i];
    }
    exact[x] = pr;
    z += pr;
  }
  Rng rng(9);
  const long draws = 100000;
  std::map<CountVector, long> counts;
  for (long i = 0; i < draws; ++i) {
    auto x = conditional_bernoulli_sample(rng, count, p);
    ASSERT_EQ(total(x), count);
    ++counts[x];
  }
  double tv = 0;
  for (const auto& [x, pr] : exact) tv += std::abs(static_cast<double>(counts[x]) / draws - pr / z);
  EXPECT_LT(tv / 2, 0.01);
}

TEST(Samplers, WithoutReplacementTakesDistinctCells) {
  Rng rng(3);
  std::vector<double> w{0.5, 0.1, 0.2, 0.2};
  for (int i = 0; i < 200; ++i) {
    auto x = sample_without_replacement(rng, 3, w);
    EXPECT_EQ(total(x), 3);
    for (auto c : x) EXPECT_LE(c, 1);
  }
  EXPECT_THROW(sample_without_replacement(rng, 5, w), std::invalid_argument);
}
