#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "multires/model/likelihood.hpp"
#include "multires/parallel.hpp"
#include "multires/ndiff/adam.hpp"

namespace multires::model {

/// Mean of -hg_loglik over `hgs`.
inline double mean_nll(const MRGModel& m, const std::vector<HierarchicalGraph>& hgs, int threads = 1) {
  std::vector<double> v(hgs.size());
  parallel_for(static_cast<int>(hgs.size()), threads, [&](int i) { v[i] = -hg_loglik(m, hgs[i]); });
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(std::max<std::size_t>(1, hgs.size()));
}

struct TrainOptions {
  int threads = 1;
  /// Called after every epoch with (epoch, mean training NLL of that epoch).
  std::function<void(int, double)> on_epoch;
};

struct TrainResult {
  double initial_nll = 0;
  std::vector<double> loss_trace;  // one entry per epoch: mean -hg_loglik over its batches
};

/// Fits the empirical histograms, then minimizes the mean negative
/// log-likelihood with Adam under teacher forcing. Deterministic given the
/// config seed; the thread count does not change the result because
/// per-graph gradients are summed in a fixed order.
inline TrainResult train(MRGModel& m, const std::vector<HierarchicalGraph>& hgs, const TrainOptions& opt = {}) {
  if (hgs.empty()) throw std::invalid_argument("train: empty training set");
  m.fit_histograms(hgs);
  TrainResult res;
  res.initial_nll = mean_nll(m, hgs, opt.threads);
  ndiff::AdamState adam(m.params, m.config.lr);
  const int n = static_cast<int>(hgs.size());
  const int bs = m.config.batch_size;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int epoch = 1; epoch <= m.config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(m.config.seed, 0x747261696eULL + static_cast<std::uint64_t>(epoch));
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
    double epoch_sum = 0;
    for (int start = 0; start < n; start += bs) {
      const int cnt = std::min(bs, n - start);
      std::vector<ndiff::Grads> g(static_cast<std::size_t>(cnt));
      std::vector<double> ll(static_cast<std::size_t>(cnt));
      parallel_for(cnt, opt.threads, [&](int j) {
        g[j] = m.params.zeros_like();
        ll[j] = hg_loglik_grad(m, hgs[order[start + j]], g[j], -1.0 / cnt);
      });
      ndiff::Grads total = m.params.zeros_like();
      for (int j = 0; j < cnt; ++j) {
        if (!std::isfinite(ll[j])) {
          std::ostringstream msg;
          msg << "train: non-finite log-likelihood at epoch " << epoch << ", graph " << order[start + j];
          throw std::runtime_error(msg.str());
        }
        epoch_sum -= ll[j];
        for (std::size_t p = 0; p < total.size(); ++p) total[p] += g[j][p];
      }
      for (const auto& t : total) {
        if (!t.all_finite()) {
          std::ostringstream msg;
          msg << "train: non-finite gradient at epoch " << epoch << ", batch starting " << start;
          throw std::runtime_error(msg.str());
        }
      }
      ndiff::adam_step(adam, m.params, total);
    }
    res.loss_trace.push_back(epoch_sum / n);
    if (opt.on_epoch) opt.on_epoch(epoch, res.loss_trace.back());
  }
  return res;
}

}  // namespace multires::model
