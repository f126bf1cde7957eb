#pragma once

#include <cmath>
#include <stdexcept>

#include "multires/ndiff/tape.hpp"

namespace multires::ndiff {

struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  Grads m;
  Grads v;

  explicit AdamState(const ParamStore& ps, double learning_rate = 5e-4)
      : lr(learning_rate), m(ps.zeros_like()), v(ps.zeros_like()) {}
};

/// One bias-corrected Adam update of every parameter in `ps`.
inline void adam_step(AdamState& s, ParamStore& ps, const Grads& grads) {
  if (static_cast<int>(grads.size()) != ps.size() || s.m.size() != grads.size()) {
    throw std::invalid_argument("adam_step: gradient count does not match parameters");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (int p = 0; p < ps.size(); ++p) {
    auto& w = ps.value(p);
    const auto& g = grads[p];
    if (!g.same_shape(w)) throw std::invalid_argument("adam_step: shape mismatch for " + ps.name(p));
    auto& m = s.m[p];
    auto& v = s.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.data[i] = s.beta1 * m.data[i] + (1.0 - s.beta1) * g.data[i];
      v.data[i] = s.beta2 * v.data[i] + (1.0 - s.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / c1;
      const double vhat = v.data[i] / c2;
      w.data[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

}  // namespace multires::ndiff
