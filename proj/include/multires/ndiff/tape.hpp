#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "multires/ndiff/tensor.hpp"

namespace multires::ndiff {

/// Named parameter tensors. Layers refer to entries by index.
class ParamStore {
 public:
  int add(std::string name, Tensor2 init) {
    if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    index_[name] = static_cast<int>(values_.size());
    names_.push_back(std::move(name));
    values_.push_back(std::move(init));
    return static_cast<int>(values_.size()) - 1;
  }

  int size() const { return static_cast<int>(values_.size()); }
  Tensor2& value(int id) { return values_.at(static_cast<std::size_t>(id)); }
  const Tensor2& value(int id) const { return values_.at(static_cast<std::size_t>(id)); }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  std::vector<Tensor2> zeros_like() const {
    std::vector<Tensor2> g;
    g.reserve(values_.size());
    for (const auto& v : values_) g.emplace_back(v.rows, v.cols);
    return g;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor2> values_;
  std::unordered_map<std::string, int> index_;
};

using Grads = std::vector<Tensor2>;

struct Var {
  int id = -1;
};

/// Reverse-mode tape over matrix-valued nodes. Parameters enter as leaves
/// that alias the store's tensors; backward() accumulates their gradients
/// into a caller-owned buffer, so one store can be shared by many tapes.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor2& out_grad)>;

  explicit Tape(const ParamStore* params = nullptr) : params_(params) {}

  Var constant(Tensor2 v) {
    nodes_.push_back(Node{std::move(v), nullptr, {}, {}, -1, false});
    return {static_cast<int>(nodes_.size()) - 1};
  }

  Var param(int id) {
    if (!params_) throw std::logic_error("Tape: no parameter store bound");
    auto it = param_nodes_.find(id);
    if (it != param_nodes_.end()) return {it->second};
    nodes_.push_back(Node{{}, &params_->value(id), {}, {}, id, true});
    const int nid = static_cast<int>(nodes_.size()) - 1;
    param_nodes_[id] = nid;
    return {nid};
  }

  /// Appends an op node. `inputs` decides whether gradients flow through it.
  Var push(Tensor2 value, std::initializer_list<Var> inputs, Backward back) {
    bool needs = false;
    for (Var v : inputs) needs = needs || nodes_.at(static_cast<std::size_t>(v.id)).needs_grad;
    nodes_.push_back(Node{std::move(value), nullptr, {}, needs ? std::move(back) : Backward{}, -1, needs});
    return {static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor2& value(Var v) const {
    const auto& n = nodes_.at(static_cast<std::size_t>(v.id));
    return n.ref ? *n.ref : n.value;
  }

  bool needs_grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).needs_grad; }

  /// Gradient accumulator of node v, allocated on first use.
  Tensor2& grad(Var v) {
    auto& n = nodes_.at(static_cast<std::size_t>(v.id));
    if (n.grad.size() == 0 && value(v).size() != 0) n.grad = Tensor2(value(v).rows, value(v).cols);
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  /// Seeds every root (any shape) with `seed` in each entry, propagates,
  /// and adds parameter gradients into `out` (indexed like the store).
  void backward(std::span<const Var> roots, double seed, Grads& out) {
    for (Var r : roots) {
      if (!needs_grad(r)) continue;
      auto& g = grad(r);
      for (double& x : g.data) x += seed;
    }
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      if (n.param >= 0) {
        out.at(static_cast<std::size_t>(n.param)) += n.grad;
      } else if (n.back) {
        Tensor2 g = std::move(n.grad);
        n.back(*this, g);
      }
    }
  }

 private:
  struct Node {
    Tensor2 value;
    const Tensor2* ref;
    Tensor2 grad;
    Backward back;
    int param;
    bool needs_grad;
  };
  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::unordered_map<int, int> param_nodes_;
};

// Ops --------------------------------------------------------------------

namespace detail {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
inline Eigen::Map<const RowMat> view(const Tensor2& t) { return {t.data.data(), t.rows, t.cols}; }
inline Eigen::Map<RowMat> view(Tensor2& t) { return {t.data.data(), t.rows, t.cols}; }

inline void require(bool ok, const char* op, const Tensor2& a, const Tensor2& b) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}
}  // namespace detail

inline Var matmul(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.cols == B.rows, "matmul", A, B);
  Tensor2 out(A.rows, B.cols);
  detail::view(out).noalias() = detail::view(A) * detail::view(B);
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) detail::view(tp.grad(a)).noalias() += detail::view(g) * detail::view(tp.value(b)).transpose();
    if (tp.needs_grad(b)) detail::view(tp.grad(b)).noalias() += detail::view(tp.value(a)).transpose() * detail::view(g);
  });
}

/// a (n x m) + row vector b (1 x m) broadcast over rows.
inline Var add_bias(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(B.rows == 1 && B.cols == A.cols, "add_bias", A, B);
  Tensor2 out = A;
  for (int r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    for (int c = 0; c < out.cols; ++c) row[c] += B.data[c];
  }
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) tp.grad(a) += g;
    if (tp.needs_grad(b)) {
      auto& gb = tp.grad(b);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) gb.data[c] += g(r, c);
      }
    }
  });
}

inline Var add(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.same_shape(B), "add", A, B);
  Tensor2 out = A;
  out += B;
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) tp.grad(a) += g;
    if (tp.needs_grad(b)) tp.grad(b) += g;
  });
}

inline Var sub(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.same_shape(B), "sub", A, B);
  Tensor2 out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= B.data[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) tp.grad(a) += g;
    if (tp.needs_grad(b)) {
      auto& gb = tp.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
    }
  });
}

inline Var relu(Tape& t, Var a) {
  Tensor2 out = t.value(a);
  for (double& v : out.data) v = v > 0 ? v : 0.0;
  return t.push(std::move(out), {a}, [a](Tape& tp, const Tensor2& g) {
    const auto& x = tp.value(a);
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x.data[i] > 0) ga.data[i] += g.data[i];
    }
  });
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline Var sigmoid(Tape& t, Var a) {
  Tensor2 out = t.value(a);
  for (double& v : out.data) v = sigmoid(v);
  const int self = static_cast<int>(t.size());
  return t.push(std::move(out), {a}, [a, self](Tape& tp, const Tensor2& g) {
    const auto& s = tp.value(Var{self});
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * s.data[i] * (1.0 - s.data[i]);
  });
}

inline Var concat_cols(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.rows == B.rows, "concat_cols", A, B);
  Tensor2 out(A.rows, A.cols + B.cols);
  for (int r = 0; r < A.rows; ++r) {
    std::copy(A.row(r).begin(), A.row(r).end(), out.row(r).begin());
    std::copy(B.row(r).begin(), B.row(r).end(), out.row(r).begin() + A.cols);
  }
  const int ac = A.cols;
  return t.push(std::move(out), {a, b}, [a, b, ac](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) {
      auto& ga = tp.grad(a);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < ac; ++c) ga(r, c) += g(r, c);
      }
    }
    if (tp.needs_grad(b)) {
      auto& gb = tp.grad(b);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < gb.cols; ++c) gb(r, c) += g(r, ac + c);
      }
    }
  });
}

/// [a ; c] where the single row c is appended to every row of a.
inline Var concat_broadcast(Tape& t, Var a, Var c) {
  const auto& A = t.value(a);
  const auto& C = t.value(c);
  detail::require(C.rows == 1, "concat_broadcast", A, C);
  Tensor2 out(A.rows, A.cols + C.cols);
  for (int r = 0; r < A.rows; ++r) {
    std::copy(A.row(r).begin(), A.row(r).end(), out.row(r).begin());
    std::copy(C.data.begin(), C.data.end(), out.row(r).begin() + A.cols);
  }
  const int ac = A.cols;
  return t.push(std::move(out), {a, c}, [a, c, ac](Tape& tp, const Tensor2& g) {
    if (tp.needs_grad(a)) {
      auto& ga = tp.grad(a);
      for (int r = 0; r < g.rows; ++r) {
        for (int k = 0; k < ac; ++k) ga(r, k) += g(r, k);
      }
    }
    if (tp.needs_grad(c)) {
      auto& gc = tp.grad(c);
      for (int r = 0; r < g.rows; ++r) {
        for (int k = 0; k < gc.cols; ++k) gc.data[k] += g(r, ac + k);
      }
    }
  });
}

inline Var gather_rows(Tape& t, Var a, std::vector<int> idx) {
  const auto& A = t.value(a);
  Tensor2 out(static_cast<int>(idx.size()), A.cols);
  for (int r = 0; r < out.rows; ++r) {
    if (idx[r] < 0 || idx[r] >= A.rows) throw std::out_of_range("gather_rows: index out of range");
    std::copy(A.row(idx[r]).begin(), A.row(idx[r]).end(), out.row(r).begin());
  }
  return t.push(std::move(out), {a}, [a, idx = std::move(idx)](Tape& tp, const Tensor2& g) {
    auto& ga = tp.grad(a);
    for (int r = 0; r < g.rows; ++r) {
      auto dst = ga.row(idx[r]);
      auto src = g.row(r);
      for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
    }
  });
}

/// out[idx[r]] += a[r]; output has n rows.
inline Var scatter_add_rows(Tape& t, Var a, std::vector<int> idx, int n) {
  const auto& A = t.value(a);
  if (static_cast<int>(idx.size()) != A.rows) throw std::invalid_argument("scatter_add_rows: index count");
  Tensor2 out(n, A.cols);
  for (int r = 0; r < A.rows; ++r) {
    if (idx[r] < 0 || idx[r] >= n) throw std::out_of_range("scatter_add_rows: index out of range");
    auto dst = out.row(idx[r]);
    auto src = A.row(r);
    for (int c = 0; c < A.cols; ++c) dst[c] += src[c];
  }
  return t.push(std::move(out), {a}, [a, idx = std::move(idx)](Tape& tp, const Tensor2& g) {
    auto& ga = tp.grad(a);
    for (int r = 0; r < ga.rows; ++r) {
      auto src = g.row(idx[r]);
      auto dst = ga.row(r);
      for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
    }
  });
}

/// Row r of a scaled by s(r, 0).
inline Var scale_rows(Tape& t, Var a, Var s) {
  const auto& A = t.value(a);
  const auto& S = t.value(s);
  detail::require(S.cols == 1 && S.rows == A.rows, "scale_rows", A, S);
  Tensor2 out = A;
  for (int r = 0; r < A.rows; ++r) {
    for (double& v : out.row(r)) v *= S.data[r];
  }
  return t.push(std::move(out), {a, s}, [a, s](Tape& tp, const Tensor2& g) {
    const auto& A2 = tp.value(a);
    const auto& S2 = tp.value(s);
    if (tp.needs_grad(a)) {
      auto& ga = tp.grad(a);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) ga(r, c) += g(r, c) * S2.data[r];
      }
    }
    if (tp.needs_grad(s)) {
      auto& gs = tp.grad(s);
      for (int r = 0; r < g.rows; ++r) {
        double acc = 0;
        for (int c = 0; c < g.cols; ++c) acc += g(r, c) * A2(r, c);
        gs.data[r] += acc;
      }
    }
  });
}

/// Column sums as a 1 x m row (add-pooling).
inline Var sum_rows(Tape& t, Var a) {
  const auto& A = t.value(a);
  Tensor2 out(1, A.cols);
  for (int r = 0; r < A.rows; ++r) {
    for (int c = 0; c < A.cols; ++c) out.data[c] += A(r, c);
  }
  return t.push(std::move(out), {a}, [a](Tape& tp, const Tensor2& g) {
    auto& ga = tp.grad(a);
    for (int r = 0; r < ga.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga(r, c) += g.data[c];
    }
  });
}

}  // namespace multires::ndiff
