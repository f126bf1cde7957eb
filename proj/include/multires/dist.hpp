#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "multires/common.hpp"

namespace multires::dist {

using Count = std::int64_t;
using CountVector = std::vector<Count>;

/// Sizes of contiguous index groups; every size is at least 1.
struct GroupSplit {
  std::vector<int> sizes;

  int total() const { return std::accumulate(sizes.begin(), sizes.end(), 0); }
  int groups() const { return static_cast<int>(sizes.size()); }

  static GroupSplit singletons(int e) { return {std::vector<int>(static_cast<std::size_t>(e), 1)}; }
  static GroupSplit whole(int e) { return {{e}}; }
};

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kDenominatorFloor = 1e-12;

inline void check_simplex(std::span<const double> theta) {
  double s = 0;
  for (double t : theta) {
    if (!(t >= 0)) throw std::invalid_argument("simplex: negative or NaN component");
    s += t;
  }
  if (std::abs(s - 1.0) > kSimplexTolerance) throw std::invalid_argument("simplex: components do not sum to 1");
}

inline Count total(std::span<const Count> x) { return std::accumulate(x.begin(), x.end(), Count{0}); }

inline double log_factorial(Count n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline double log_choose(Count n, Count k) { return log_factorial(n) - log_factorial(k) - log_factorial(n - k); }

// k * log(p) with 0 * log(0) = 0.
inline double xlogy(Count k, double p) {
  if (k == 0) return 0.0;
  if (p <= 0) return kNegInf;
  return static_cast<double>(k) * std::log(p);
}

/// log Mu(x | w, theta).
inline double mn_logpmf(std::span<const Count> x, Count w, std::span<const double> theta) {
  if (x.size() != theta.size()) throw std::invalid_argument("mn_logpmf: length mismatch");
  if (total(x) != w) throw std::invalid_argument("mn_logpmf: counts do not sum to w");
  double lp = log_factorial(w);
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (x[e] < 0) throw std::invalid_argument("mn_logpmf: negative count");
    lp -= log_factorial(x[e]);
    lp += xlogy(x[e], theta[e]);
  }
  return lp;
}

/// log Bi(k | n, p).
inline double bi_logpmf(Count k, Count n, double p) {
  if (n < 0 || k < 0 || k > n) throw std::invalid_argument("bi_logpmf: need 0 <= k <= n");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("bi_logpmf: p outside [0, 1]");
  return log_choose(n, k) + xlogy(k, p) + xlogy(n - k, 1.0 - p);
}

/// Multinomial as a chain of per-component binomials: component e takes
/// Bi(rest, theta_e / sum_{i>=e} theta_i) of what earlier components left.
inline double stick_chain_logpmf(std::span<const Count> x, Count w, std::span<const double> theta) {
  if (x.size() != theta.size()) throw std::invalid_argument("stick_chain_logpmf: length mismatch");
  if (total(x) != w) throw std::invalid_argument("stick_chain_logpmf: counts do not sum to w");
  const std::size_t E = x.size();
  std::vector<double> tail(E + 1, 0.0);
  for (std::size_t e = E; e-- > 0;) tail[e] = tail[e + 1] + theta[e];
  double lp = 0;
  Count rest = w;
  for (std::size_t e = 0; e < E; ++e) {
    double frac = (e + 1 == E) ? 1.0 : std::min(1.0, theta[e] / std::max(tail[e], kDenominatorFloor));
    lp += bi_logpmf(x[e], rest, frac);
    if (lp == kNegInf) return lp;
    rest -= x[e];
  }
  return lp;
}

/// Per-group probability mass alpha_m.
inline std::vector<double> grouped_marginal_params(std::span<const double> theta, const GroupSplit& split) {
  if (split.total() != static_cast<int>(theta.size())) throw std::invalid_argument("grouped_marginal_params: split size");
  std::vector<double> alpha;
  std::size_t e = 0;
  for (int size : split.sizes) {
    if (size < 1) throw std::invalid_argument("GroupSplit: empty group");
    double a = 0;
    for (int i = 0; i < size; ++i) a += theta[e++];
    alpha.push_back(a);
  }
  return alpha;
}

/// Group sums v_m of a count vector.
inline CountVector group_sums(std::span<const Count> x, const GroupSplit& split) {
  if (split.total() != static_cast<int>(x.size())) throw std::invalid_argument("group_sums: split size");
  CountVector v;
  std::size_t e = 0;
  for (int size : split.sizes) {
    Count s = 0;
    for (int i = 0; i < size; ++i) s += x[e++];
    v.push_back(s);
  }
  return v;
}

/// log Mu(u_m | v_m, theta_m / sum(theta_m)).
inline double conditional_group_logpmf(std::span<const Count> u, Count v, std::span<const double> theta_m) {
  if (u.size() != theta_m.size()) throw std::invalid_argument("conditional_group_logpmf: length mismatch");
  if (total(u) != v) throw std::invalid_argument("conditional_group_logpmf: counts do not sum to v");
  const double mass = std::accumulate(theta_m.begin(), theta_m.end(), 0.0);
  if (v == 0) return 0.0;
  if (mass <= 0) throw std::invalid_argument("conditional_group_logpmf: zero group mass with positive count");
  std::vector<double> lambda(theta_m.begin(), theta_m.end());
  for (double& l : lambda) l /= mass;
  return mn_logpmf(u, v, lambda);
}

/// Multinomial as a chain over groups: each group first takes
/// Bi(rest, alpha_m / sum_{i>=m} alpha_i) of the remaining count, then spreads
/// it within the group by Mu(v_m, lambda_m).
inline double group_chain_logpmf(std::span<const Count> x, Count w, std::span<const double> theta,
                                 const GroupSplit& split) {
  if (x.size() != theta.size()) throw std::invalid_argument("group_chain_logpmf: length mismatch");
  if (total(x) != w) throw std::invalid_argument("group_chain_logpmf: counts do not sum to w");
  const auto alpha = grouped_marginal_params(theta, split);
  const auto v = group_sums(x, split);
  const std::size_t M = alpha.size();
  std::vector<double> tail(M + 1, 0.0);
  for (std::size_t m = M; m-- > 0;) tail[m] = tail[m + 1] + alpha[m];
  double lp = 0;
  Count rest = w;
  std::size_t offset = 0;
  for (std::size_t m = 0; m < M; ++m) {
    const double eta = (m + 1 == M) ? 1.0 : std::min(1.0, alpha[m] / std::max(tail[m], kDenominatorFloor));
    lp += bi_logpmf(v[m], rest, eta);
    if (lp == kNegInf) return lp;
    const auto size = static_cast<std::size_t>(split.sizes[m]);
    if (v[m] > 0 && alpha[m] <= 0) return kNegInf;
    lp += conditional_group_logpmf(x.subspan(offset, size), v[m], theta.subspan(offset, size));
    rest -= v[m];
    offset += size;
  }
  return lp;
}

// Samplers --------------------------------------------------------------

/// Exact binomial draw. Small n uses bottom-up inversion; larger n uses
/// inversion that starts at the mode and searches outward, which avoids the
/// underflow of (1-p)^n.
inline Count binomial_sample(Rng& rng, Count n, double p) {
  if (n < 0 || !(p >= 0 && p <= 1)) throw std::invalid_argument("binomial_sample: bad parameters");
  if (n == 0 || p == 0) return 0;
  if (p == 1) return n;
  if (p > 0.5) return n - binomial_sample(rng, n, 1.0 - p);
  const double q = 1.0 - p;
  const double u = rng.uniform();
  if (n < 64) {
    double pmf = std::pow(q, static_cast<double>(n));
    double cdf = pmf;
    Count k = 0;
    const double ratio = p / q;
    while (u >= cdf && k < n) {
      pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cdf += pmf;
    }
    return k;
  }
  const auto mode = static_cast<Count>(std::floor(static_cast<double>(n + 1) * p));
  const double pmode = std::exp(bi_logpmf(mode, n, p));
  // Alternate around the mode, accumulating mass until it exceeds u.
  double acc = pmode;
  if (u < acc) return mode;
  Count lo = mode, hi = mode;
  double plo = pmode, phi = pmode;
  while (lo > 0 || hi < n) {
    if (hi < n) {
      phi *= (p / q) * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
      ++hi;
      acc += phi;
      if (u < acc) return hi;
    }
    if (lo > 0) {
      plo *= (q / p) * static_cast<double>(lo) / static_cast<double>(n - lo + 1);
      --lo;
      acc += plo;
      if (u < acc) return lo;
    }
  }
  return mode;  // u beyond the accumulated mass through rounding
}

/// Draw from Mu(w, theta) by the per-component binomial chain; the last
/// component absorbs the remainder, so the total is exact.
inline CountVector mn_sample(Rng& rng, Count w, std::span<const double> theta) {
  CountVector x(theta.size(), 0);
  if (theta.empty()) {
    if (w != 0) throw std::invalid_argument("mn_sample: positive count over zero cells");
    return x;
  }
  double tail = std::accumulate(theta.begin(), theta.end(), 0.0);
  Count rest = w;
  for (std::size_t e = 0; e + 1 < theta.size() && rest > 0; ++e) {
    const double frac = std::clamp(theta[e] / std::max(tail, kDenominatorFloor), 0.0, 1.0);
    x[e] = binomial_sample(rng, rest, frac);
    rest -= x[e];
    tail -= theta[e];
  }
  if (rest > 0) {
    // Put the remainder on the last cell with positive mass.
    std::size_t last = theta.size() - 1;
    while (last > 0 && theta[last] <= 0) --last;
    x[last] += rest;
  }
  return x;
}

/// Group-wise stick-breaking draw: v_m ~ Bi(rest, eta_m), then Mu(v_m, lambda_m)
/// inside the group. The last group takes whatever remains.
inline CountVector group_chain_sample(Rng& rng, Count w, std::span<const double> theta, const GroupSplit& split) {
  const auto alpha = grouped_marginal_params(theta, split);
  const std::size_t M = alpha.size();
  std::vector<double> tail(M + 1, 0.0);
  for (std::size_t m = M; m-- > 0;) tail[m] = tail[m + 1] + alpha[m];
  CountVector x;
  x.reserve(theta.size());
  Count rest = w;
  std::size_t offset = 0;
  for (std::size_t m = 0; m < M; ++m) {
    const auto size = static_cast<std::size_t>(split.sizes[m]);
    Count v = rest;
    if (m + 1 < M) v = binomial_sample(rng, rest, std::clamp(alpha[m] / std::max(tail[m], kDenominatorFloor), 0.0, 1.0));
    rest -= v;
    auto sub = theta.subspan(offset, size);
    std::vector<double> lambda(sub.begin(), sub.end());
    if (alpha[m] > 0) {
      for (double& l : lambda) l /= alpha[m];
    } else {
      std::fill(lambda.begin(), lambda.end(), 1.0 / static_cast<double>(size));
    }
    auto u = mn_sample(rng, v, lambda);
    x.insert(x.end(), u.begin(), u.end());
    offset += size;
  }
  return x;
}

/// Draw an index with probability proportional to weights (need not be normalized).
inline std::size_t categorical_sample(Rng& rng, std::span<const double> weights) {
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(s > 0)) throw std::invalid_argument("categorical_sample: no positive weight");
  double u = rng.uniform() * s;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

/// Draws `count` distinct cells, sequentially proportional to the weights of
/// the cells not yet taken. Used to place unit edge weights on binary graphs.
inline CountVector sample_without_replacement(Rng& rng, Count count, std::span<const double> weights) {
  if (count < 0 || count > static_cast<Count>(weights.size())) {
    throw std::invalid_argument("sample_without_replacement: count exceeds cells");
  }
  CountVector x(weights.size(), 0);
  std::vector<double> w(weights.begin(), weights.end());
  for (double& v : w) v = std::max(v, 1e-300);
  for (Count c = 0; c < count; ++c) {
    const auto i = categorical_sample(rng, w);
    x[i] = 1;
    w[i] = 0;
  }
  return x;
}

/// Independent Bernoulli(p_e) cells conditioned on exactly `count` successes,
/// sampled exactly by a suffix dynamic programme over success counts.
inline CountVector conditional_bernoulli_sample(Rng& rng, Count count, std::span<const double> p) {
  const auto n = static_cast<Count>(p.size());
  if (count < 0 || count > n) throw std::invalid_argument("conditional_bernoulli_sample: count out of range");
  // ways[i][c]: probability that cells i..n-1 hold exactly c successes, scaled per row.
  std::vector<std::vector<double>> ways(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(count) + 1, 0.0));
  ways[n][0] = 1.0;
  for (Count i = n; i-- > 0;) {
    const double pi = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
    double mx = 0;
    for (Count c = 0; c <= count; ++c) {
      double v = (1.0 - pi) * ways[i + 1][c];
      if (c > 0) v += pi * ways[i + 1][c - 1];
      ways[i][c] = v;
      mx = std::max(mx, v);
    }
    if (mx > 0) {
      for (auto& v : ways[i]) v /= mx;
    }
  }
  CountVector x(static_cast<std::size_t>(n), 0);
  Count need = count;
  for (Count i = 0; i < n && need > 0; ++i) {
    const double pi = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
    const double take = pi * ways[i + 1][need - 1];
    const double skip = (1.0 - pi) * ways[i + 1][need];
    if (rng.uniform() * (take + skip) < take) {
      x[i] = 1;
      --need;
    }
  }
  return x;
}

// Enumeration oracle ----------------------------------------------------

/// All non-negative integer vectors of length E summing to w, in
/// lexicographically descending order. Refuses supports larger than
/// `budget` vectors.
inline std::vector<CountVector> enumerate_support(Count w, int E, std::size_t budget = 1'000'000) {
  if (w < 0 || E < 1) throw std::invalid_argument("enumerate_support: need w >= 0 and E >= 1");
  const double size = std::exp(log_choose(w + E - 1, E - 1));
  if (size > static_cast<double>(budget) + 0.5) throw std::invalid_argument("enumerate_support: budget exceeded");
  std::vector<CountVector> out;
  CountVector cur(static_cast<std::size_t>(E), 0);
  auto rec = [&](auto&& self, int pos, Count rest) -> void {
    if (pos == E - 1) {
      cur[pos] = rest;
      out.push_back(cur);
      return;
    }
    for (Count c = rest; c >= 0; --c) {
      cur[pos] = c;
      self(self, pos + 1, rest - c);
    }
  };
  rec(rec, 0, w);
  return out;
}

}  // namespace multires::dist
