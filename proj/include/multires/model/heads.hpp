#pragma once

// Mixture output heads. A row (or a bipartite block) is scored by
//   log sum_k beta_k * Bi(v | R, eta_k) * Mu(u | v, lambda_k)
// where the binomial factor is dropped when the row absorbs the remaining
// weight, and the Bernoulli head replaces Bi * Mu by prod_e Bern(u_e | p_ek).
// Gradients w.r.t. the logits are analytic and exposed as one tape node.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "multires/dist.hpp"
#include "multires/model/config.hpp"
#include "multires/ndiff/tape.hpp"

namespace multires::model {

using dist::Count;
using dist::CountVector;
using ndiff::Tensor2;

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double log_sigmoid(double x) { return -softplus(-x); }

inline double log_sum_exp(const std::vector<double>& c) {
  double mx = kNegInf;
  for (double x : c) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0;
  for (double x : c) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// Observed counts of one row over its candidate cells.
struct RowTarget {
  CountVector u;
  Count remaining = 0;  // R: weight still to be placed in this block
  bool absorb = false;  // last row takes all of R; no binomial factor
};

struct MixtureGrads {
  Tensor2 dZ;  // C x K
  Tensor2 de;  // 1 x K
  Tensor2 db;  // 1 x K
};

/// Log-likelihood of `tgt` under logits Z (C x K), e (1 x K, eta) and b
/// (1 x K, beta). Fills `g` with the gradient of the returned value.
inline double mixture_loglik(const Tensor2& Z, const Tensor2& e, const Tensor2& b, const RowTarget& tgt,
                             HeadKind kind, MixtureGrads* g = nullptr) {
  const int C = Z.rows;
  const int K = Z.cols;
  if (static_cast<int>(tgt.u.size()) != C) throw std::invalid_argument("mixture_loglik: target length mismatch");
  if (b.cols != K || b.rows != 1 || e.cols != K || e.rows != 1) {
    throw std::invalid_argument("mixture_loglik: mixture width mismatch");
  }
  const Count v = dist::total(tgt.u);
  const Count R = tgt.remaining;
  const bool binomial = !tgt.absorb && kind != HeadKind::bernoulli;
  if (kind != HeadKind::bernoulli && (v > R || (tgt.absorb && v != R))) {
    throw std::invalid_argument("mixture_loglik: row count inconsistent with remaining weight");
  }
  double coef = 0;  // multinomial coefficient, shared by all components
  if (kind != HeadKind::bernoulli) {
    coef = dist::log_factorial(v);
    for (Count x : tgt.u) coef -= dist::log_factorial(x);
  } else {
    for (Count x : tgt.u) {
      if (x < 0 || x > 1) throw std::invalid_argument("mixture_loglik: Bernoulli head needs 0/1 counts");
    }
  }

  const double lse_b = log_sum_exp(b.data);
  std::vector<double> c(static_cast<std::size_t>(K));
  // Per-component normalizers kept for the backward pass.
  std::vector<double> norm(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    double ck = b.data[k] - lse_b;
    if (binomial) {
      ck += dist::log_choose(R, v);
      if (v > 0) ck += static_cast<double>(v) * log_sigmoid(e.data[k]);
      if (R - v > 0) ck += static_cast<double>(R - v) * log_sigmoid(-e.data[k]);
    }
    switch (kind) {
      case HeadKind::softmax: {
        double mx = kNegInf;
        for (int r = 0; r < C; ++r) mx = std::max(mx, Z(r, k));
        double s = 0;
        for (int r = 0; r < C; ++r) s += std::exp(Z(r, k) - mx);
        const double lse = mx + std::log(s);
        norm[k] = lse;
        ck += coef;
        for (int r = 0; r < C; ++r) {
          if (tgt.u[r] > 0) ck += static_cast<double>(tgt.u[r]) * (Z(r, k) - lse);
        }
        break;
      }
      case HeadKind::multihot: {
        double s = 0;
        for (int r = 0; r < C; ++r) s += 1.0 / (1.0 + std::exp(-Z(r, k)));
        norm[k] = s;
        const double log_s = std::log(s);
        ck += coef;
        for (int r = 0; r < C; ++r) {
          if (tgt.u[r] > 0) ck += static_cast<double>(tgt.u[r]) * (log_sigmoid(Z(r, k)) - log_s);
        }
        break;
      }
      case HeadKind::bernoulli: {
        for (int r = 0; r < C; ++r) ck += tgt.u[r] ? log_sigmoid(Z(r, k)) : log_sigmoid(-Z(r, k));
        break;
      }
    }
    c[k] = ck;
  }
  const double L = log_sum_exp(c);
  if (!g) return L;

  g->dZ = Tensor2(C, K);
  g->de = Tensor2(1, K);
  g->db = Tensor2(1, K);
  for (int k = 0; k < K; ++k) {
    const double rk = std::exp(c[k] - L);  // posterior responsibility
    g->db.data[k] = rk - std::exp(b.data[k] - lse_b);
    if (binomial) g->de.data[k] = rk * (static_cast<double>(v) - static_cast<double>(R) * ndiff::sigmoid(e.data[k]));
    for (int r = 0; r < C; ++r) {
      const double u = static_cast<double>(tgt.u[r]);
      double d = 0;
      switch (kind) {
        case HeadKind::softmax:
          d = u - static_cast<double>(v) * std::exp(Z(r, k) - norm[k]);
          break;
        case HeadKind::multihot: {
          const double s = ndiff::sigmoid(Z(r, k));
          d = u * (1 - s) - static_cast<double>(v) * s * (1 - s) / norm[k];
          break;
        }
        case HeadKind::bernoulli:
          d = u - ndiff::sigmoid(Z(r, k));
          break;
      }
      g->dZ(r, k) = rk * d;
    }
  }
  return L;
}

/// Tape node wrapping mixture_loglik; output is 1 x 1.
inline ndiff::Var mixture_loglik_op(ndiff::Tape& t, ndiff::Var Z, ndiff::Var e, ndiff::Var b, const RowTarget& tgt,
                                    HeadKind kind) {
  MixtureGrads g;
  const double L = mixture_loglik(t.value(Z), t.value(e), t.value(b), tgt, kind, &g);
  return t.push(Tensor2(1, 1, L), {Z, e, b}, [Z, e, b, g = std::move(g)](ndiff::Tape& tp, const Tensor2& og) {
    const double s = og.data[0];
    auto acc = [&](ndiff::Var x, const Tensor2& d) {
      if (!tp.needs_grad(x)) return;
      auto& gx = tp.grad(x);
      for (std::size_t i = 0; i < d.size(); ++i) gx.data[i] += s * d.data[i];
    };
    acc(Z, g.dZ);
    acc(e, g.de);
    acc(b, g.db);
  });
}

/// Normalized mixture parameters of one row.
struct RowDistribution {
  HeadKind kind = HeadKind::softmax;
  std::vector<double> beta;                // K, on the simplex
  std::vector<double> eta;                 // K, in (0, 1)
  std::vector<std::vector<double>> cells;  // K x C: lambda_k, or Bernoulli p_k
};

inline RowDistribution row_distribution(const Tensor2& Z, const Tensor2& e, const Tensor2& b, HeadKind kind) {
  const int C = Z.rows;
  const int K = Z.cols;
  RowDistribution rd;
  rd.kind = kind;
  const double lse_b = log_sum_exp(b.data);
  for (int k = 0; k < K; ++k) {
    rd.beta.push_back(std::exp(b.data[k] - lse_b));
    rd.eta.push_back(ndiff::sigmoid(e.data[k]));
    std::vector<double> cell(static_cast<std::size_t>(C));
    if (kind == HeadKind::softmax) {
      double mx = kNegInf;
      for (int r = 0; r < C; ++r) mx = std::max(mx, Z(r, k));
      double s = 0;
      for (int r = 0; r < C; ++r) s += (cell[r] = std::exp(Z(r, k) - mx));
      for (double& x : cell) x /= s;
    } else if (kind == HeadKind::multihot) {
      double s = 0;
      for (int r = 0; r < C; ++r) s += (cell[r] = ndiff::sigmoid(Z(r, k)));
      for (double& x : cell) x /= s;
    } else {
      for (int r = 0; r < C; ++r) cell[r] = ndiff::sigmoid(Z(r, k));
    }
    rd.cells.push_back(std::move(cell));
  }
  return rd;
}

/// Probability-domain counterpart of mixture_loglik.
inline double row_loglik(const RowDistribution& rd, const CountVector& u, Count remaining, bool absorb = false) {
  const Count v = dist::total(u);
  std::vector<double> c;
  for (std::size_t k = 0; k < rd.beta.size(); ++k) {
    double ck = std::log(rd.beta[k]);
    if (rd.kind == HeadKind::bernoulli) {
      for (std::size_t r = 0; r < u.size(); ++r) {
        ck += u[r] ? std::log(rd.cells[k][r]) : std::log1p(-rd.cells[k][r]);
      }
    } else {
      if (!absorb) ck += dist::bi_logpmf(v, remaining, rd.eta[k]);
      if (v > 0) ck += dist::mn_logpmf(u, v, rd.cells[k]);
    }
    c.push_back(ck);
  }
  return log_sum_exp(c);
}

}  // namespace multires::model
