// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_AD_TENSOR_HPP
#define FGNET_AD_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace fgnet::ad {

namespace detail {

struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::string name;  // parameters carry one for diagnostics
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // accumulates node.grad into parents

  std::size_t count() const { return values.size(); }
  void ensure_grad() {
    if (requires_grad && grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

inline std::string shape_str(int r, int c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

[[noreturn]] inline void shape_error(const std::string& op, const Node& a, const Node& b) {
  throw std::invalid_argument(op + ": shape mismatch (" + shape_str(a.rows, a.cols) + " vs " +
                              shape_str(b.rows, b.cols) + ")");
}

}  // namespace detail

/// Dense 2-D tensor with reverse-mode differentiation. Copying a Tensor
/// copies the handle; the underlying node is shared. A computation graph
/// is single-owner during forward/backward.
class Tensor {
 public:
  Tensor() : node_(std::make_shared<detail::Node>()) {}

  static Tensor zeros(int rows, int cols, bool requires_grad = false) {
    return filled(rows, cols, 0.0, requires_grad);
  }

  static Tensor filled(int rows, int cols, double v, bool requires_grad = false) {
    Tensor t;
    t.node_->rows = rows;
    t.node_->cols = cols;
    t.node_->values.assign(static_cast<std::size_t>(rows) * cols, v);
    t.node_->requires_grad = requires_grad;
    t.node_->ensure_grad();
    return t;
  }

  static Tensor from_values(int rows, int cols, std::vector<double> v,
                            bool requires_grad = false) {
    if (v.size() != static_cast<std::size_t>(rows) * cols)
      throw std::invalid_argument("tensor: value buffer does not match " +
                                  detail::shape_str(rows, cols));
    Tensor t;
    t.node_->rows = rows;
    t.node_->cols = cols;
    t.node_->values = std::move(v);
    t.node_->requires_grad = requires_grad;
    t.node_->ensure_grad();
    return t;
  }

  /// Named learnable leaf.
  static Tensor param(int rows, int cols, std::vector<double> v, std::string name) {
    Tensor t = from_values(rows, cols, std::move(v), true);
    t.node_->name = std::move(name);
    return t;
  }

  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  std::size_t count() const { return node_->count(); }
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& name() const { return node_->name; }

  const std::vector<double>& values() const { return node_->values; }
  std::vector<double>& mutable_values() { return node_->values; }
  const std::vector<double>& grad() const { return node_->grad; }

  double at(int r, int c) const { return node_->values[static_cast<std::size_t>(r) * cols() + c]; }
  double grad_at(int r, int c) const {
    return node_->grad[static_cast<std::size_t>(r) * cols() + c];
  }

  /// Scalar value of a 1x1 tensor.
  double item() const {
    if (rows() != 1 || cols() != 1)
      throw std::invalid_argument("tensor: item() requires 1x1, got " +
                                  detail::shape_str(rows(), cols()));
    return node_->values[0];
  }

  void zero_grad() {
    if (node_->requires_grad) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
  }

  /// Reverse pass from this scalar node. Every reachable node is visited
  /// exactly once, in reverse topological order, so each gradient is fully
  /// accumulated before being propagated.
  void backward() const {
    if (rows() != 1 || cols() != 1)
      throw std::invalid_argument("backward: root must be 1x1, got " +
                                  detail::shape_str(rows(), cols()));
    if (!node_->requires_grad)
      throw std::invalid_argument("backward: root does not require gradients");

    std::vector<detail::Node*> topo;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        detail::Node* p = n->parents[next].get();
        ++next;
        if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      } else {
        topo.push_back(n);
        stack.pop_back();
      }
    }

    for (detail::Node* n : topo) n->ensure_grad();
    node_->grad[0] = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      detail::Node* n = *it;
      if (n->backward_fn) n->backward_fn(*n);
    }
  }

  std::shared_ptr<detail::Node> node() const { return node_; }

  static Tensor wrap(std::shared_ptr<detail::Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

inline std::shared_ptr<Node> make_op(int rows, int cols,
                                     std::vector<std::shared_ptr<Node>> parents) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  for (const auto& p : parents)
    if (p->requires_grad) n->requires_grad = true;
  n->parents = std::move(parents);
  return n;
}

enum class Broadcast { none, row, col };

inline Broadcast broadcast_kind(const Node& a, const Node& b, const char* op) {
  if (a.rows == b.rows && a.cols == b.cols) return Broadcast::none;
  if (b.rows == 1 && b.cols == a.cols) return Broadcast::row;
  if (b.cols == 1 && b.rows == a.rows) return Broadcast::col;
  shape_error(op, a, b);
}

}  // namespace detail

// ---- elementwise binary ops (second operand may be a broadcast row/col vector)

inline Tensor add(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  const auto kind = detail::broadcast_kind(*an, *bn, "add");
  auto out = detail::make_op(an->rows, an->cols, {an, bn});
  const int R = an->rows, C = an->cols;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * C + c;
      const std::size_t j = kind == detail::Broadcast::none ? i
                            : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                             : static_cast<std::size_t>(r);
      out->values[i] = an->values[i] + bn->values[j];
    }
  if (out->requires_grad)
    out->backward_fn = [an, bn, kind, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
          const std::size_t i = static_cast<std::size_t>(r) * C + c;
          if (an->requires_grad) an->grad[i] += o.grad[i];
          if (bn->requires_grad) {
            const std::size_t j = kind == detail::Broadcast::none ? i
                                  : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                                   : static_cast<std::size_t>(r);
            bn->grad[j] += o.grad[i];
          }
        }
    };
  return Tensor::wrap(out);
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  const auto kind = detail::broadcast_kind(*an, *bn, "sub");
  auto out = detail::make_op(an->rows, an->cols, {an, bn});
  const int R = an->rows, C = an->cols;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * C + c;
      const std::size_t j = kind == detail::Broadcast::none ? i
                            : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                             : static_cast<std::size_t>(r);
      out->values[i] = an->values[i] - bn->values[j];
    }
  if (out->requires_grad)
    out->backward_fn = [an, bn, kind, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
          const std::size_t i = static_cast<std::size_t>(r) * C + c;
          if (an->requires_grad) an->grad[i] += o.grad[i];
          if (bn->requires_grad) {
            const std::size_t j = kind == detail::Broadcast::none ? i
                                  : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                                   : static_cast<std::size_t>(r);
            bn->grad[j] -= o.grad[i];
          }
        }
    };
  return Tensor::wrap(out);
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  const auto kind = detail::broadcast_kind(*an, *bn, "mul");
  auto out = detail::make_op(an->rows, an->cols, {an, bn});
  const int R = an->rows, C = an->cols;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * C + c;
      const std::size_t j = kind == detail::Broadcast::none ? i
                            : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                             : static_cast<std::size_t>(r);
      out->values[i] = an->values[i] * bn->values[j];
    }
  if (out->requires_grad)
    out->backward_fn = [an, bn, kind, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
          const std::size_t i = static_cast<std::size_t>(r) * C + c;
          const std::size_t j = kind == detail::Broadcast::none ? i
                                : kind == detail::Broadcast::row ? static_cast<std::size_t>(c)
                                                                 : static_cast<std::size_t>(r);
          if (an->requires_grad) an->grad[i] += o.grad[i] * bn->values[j];
          if (bn->requires_grad) bn->grad[j] += o.grad[i] * an->values[i];
        }
    };
  return Tensor::wrap(out);
}

// ---- scalar ops

inline Tensor scalar_mul(const Tensor& a, double s) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = an->values[i] * s;
  if (out->requires_grad)
    out->backward_fn = [an, s](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i) an->grad[i] += o.grad[i] * s;
    };
  return Tensor::wrap(out);
}

inline Tensor add_scalar(const Tensor& a, double s) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = an->values[i] + s;
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i) an->grad[i] += o.grad[i];
    };
  return Tensor::wrap(out);
}

// ---- matrix ops

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  if (an->cols != bn->rows) detail::shape_error("matmul", *an, *bn);
  const int R = an->rows, K = an->cols, C = bn->cols;
  auto out = detail::make_op(R, C, {an, bn});
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k) {
      const double av = an->values[static_cast<std::size_t>(r) * K + k];
      if (av == 0.0) continue;
      const double* brow = bn->values.data() + static_cast<std::size_t>(k) * C;
      double* orow = out->values.data() + static_cast<std::size_t>(r) * C;
      for (int c = 0; c < C; ++c) orow[c] += av * brow[c];
    }
  if (out->requires_grad)
    out->backward_fn = [an, bn, R, K, C](detail::Node& o) {
      if (an->requires_grad) {
        // dA = dO * B^T
        for (int r = 0; r < R; ++r)
          for (int k = 0; k < K; ++k) {
            const double* orow = o.grad.data() + static_cast<std::size_t>(r) * C;
            const double* brow = bn->values.data() + static_cast<std::size_t>(k) * C;
            double acc = 0.0;
            for (int c = 0; c < C; ++c) acc += orow[c] * brow[c];
            an->grad[static_cast<std::size_t>(r) * K + k] += acc;
          }
      }
      if (bn->requires_grad) {
        // dB = A^T * dO
        for (int k = 0; k < K; ++k)
          for (int r = 0; r < R; ++r) {
            const double av = an->values[static_cast<std::size_t>(r) * K + k];
            if (av == 0.0) continue;
            const double* orow = o.grad.data() + static_cast<std::size_t>(r) * C;
            double* brow = bn->grad.data() + static_cast<std::size_t>(k) * C;
            for (int c = 0; c < C; ++c) brow[c] += av * orow[c];
          }
      }
    };
  return Tensor::wrap(out);
}

inline Tensor transpose(const Tensor& a) {
  auto an = a.node();
  const int R = an->rows, C = an->cols;
  auto out = detail::make_op(C, R, {an});
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c)
      out->values[static_cast<std::size_t>(c) * R + r] =
          an->values[static_cast<std::size_t>(r) * C + c];
  if (out->requires_grad)
    out->backward_fn = [an, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
          an->grad[static_cast<std::size_t>(r) * C + c] +=
              o.grad[static_cast<std::size_t>(c) * R + r];
    };
  return Tensor::wrap(out);
}

/// Reinterpret the same row-major buffer with a new shape.
inline Tensor reshape(const Tensor& a, int rows, int cols) {
  auto an = a.node();
  if (static_cast<std::size_t>(rows) * cols != an->count())
    throw std::invalid_argument("reshape: cannot view " + detail::shape_str(an->rows, an->cols) +
                                " as " + detail::shape_str(rows, cols));
  auto out = detail::make_op(rows, cols, {an});
  out->values = an->values;
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i) an->grad[i] += o.grad[i];
    };
  return Tensor::wrap(out);
}

// ---- elementwise unary ops

inline Tensor exp_(const Tensor& a) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = std::exp(an->values[i]);
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i) an->grad[i] += o.grad[i] * o.values[i];
    };
  return Tensor::wrap(out);
}

/// log(x + eps). With eps == 0 any non-positive entry is an error.
inline Tensor log_(const Tensor& a, double eps = 0.0) {
  auto an = a.node();
  if (eps == 0.0)
    for (std::size_t i = 0; i < an->count(); ++i)
      if (an->values[i] <= 0.0)
        throw std::invalid_argument("log: non-positive entry without epsilon guard");
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = std::log(an->values[i] + eps);
  if (out->requires_grad)
    out->backward_fn = [an, eps](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i)
        an->grad[i] += o.grad[i] / (an->values[i] + eps);
    };
  return Tensor::wrap(out);
}

inline Tensor square(const Tensor& a) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = an->values[i] * an->values[i];
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i) an->grad[i] += o.grad[i] * 2.0 * an->values[i];
    };
  return Tensor::wrap(out);
}

inline Tensor relu(const Tensor& a) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i)
    out->values[i] = an->values[i] > 0.0 ? an->values[i] : 0.0;
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i)
        if (an->values[i] > 0.0) an->grad[i] += o.grad[i];
    };
  return Tensor::wrap(out);
}

/// 1 / (x + eps). With eps == 0 any zero entry is an error.
inline Tensor reciprocal(const Tensor& a, double eps = 0.0) {
  auto an = a.node();
  if (eps == 0.0)
    for (std::size_t i = 0; i < an->count(); ++i)
      if (an->values[i] == 0.0)
        throw std::invalid_argument("reciprocal: zero entry without epsilon guard");
  auto out = detail::make_op(an->rows, an->cols, {an});
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] = 1.0 / (an->values[i] + eps);
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < o.count(); ++i)
        an->grad[i] -= o.grad[i] * o.values[i] * o.values[i];
    };
  return Tensor::wrap(out);
}

// ---- reductions

inline Tensor sum_all(const Tensor& a) {
  auto an = a.node();
  auto out = detail::make_op(1, 1, {an});
  double acc = 0.0;
  for (const double v : an->values) acc += v;
  out->values[0] = acc;
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      for (std::size_t i = 0; i < an->count(); ++i) an->grad[i] += o.grad[0];
    };
  return Tensor::wrap(out);
}

/// Row sums -> rows x 1.
inline Tensor sum_rows(const Tensor& a) {
  auto an = a.node();
  const int R = an->rows, C = an->cols;
  auto out = detail::make_op(R, 1, {an});
  for (int r = 0; r < R; ++r) {
    double acc = 0.0;
    const double* row = an->values.data() + static_cast<std::size_t>(r) * C;
    for (int c = 0; c < C; ++c) acc += row[c];
    out->values[r] = acc;
  }
  if (out->requires_grad)
    out->backward_fn = [an, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) an->grad[static_cast<std::size_t>(r) * C + c] += o.grad[r];
    };
  return Tensor::wrap(out);
}

/// Column sums -> 1 x cols.
inline Tensor sum_cols(const Tensor& a) {
  auto an = a.node();
  const int R = an->rows, C = an->cols;
  auto out = detail::make_op(1, C, {an});
  for (int r = 0; r < R; ++r) {
    const double* row = an->values.data() + static_cast<std::size_t>(r) * C;
    for (int c = 0; c < C; ++c) out->values[c] += row[c];
  }
  if (out->requires_grad)
    out->backward_fn = [an, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) an->grad[static_cast<std::size_t>(r) * C + c] += o.grad[c];
    };
  return Tensor::wrap(out);
}

// ---- structure ops

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  if (an->rows != bn->rows) detail::shape_error("concat_cols", *an, *bn);
  const int R = an->rows, Ca = an->cols, Cb = bn->cols;
  auto out = detail::make_op(R, Ca + Cb, {an, bn});
  for (int r = 0; r < R; ++r) {
    std::copy_n(an->values.data() + static_cast<std::size_t>(r) * Ca, Ca,
                out->values.data() + static_cast<std::size_t>(r) * (Ca + Cb));
    std::copy_n(bn->values.data() + static_cast<std::size_t>(r) * Cb, Cb,
                out->values.data() + static_cast<std::size_t>(r) * (Ca + Cb) + Ca);
  }
  if (out->requires_grad)
    out->backward_fn = [an, bn, R, Ca, Cb](detail::Node& o) {
      for (int r = 0; r < R; ++r) {
        const double* orow = o.grad.data() + static_cast<std::size_t>(r) * (Ca + Cb);
        if (an->requires_grad) {
          double* arow = an->grad.data() + static_cast<std::size_t>(r) * Ca;
          for (int c = 0; c < Ca; ++c) arow[c] += orow[c];
        }
        if (bn->requires_grad) {
          double* brow = bn->grad.data() + static_cast<std::size_t>(r) * Cb;
          for (int c = 0; c < Cb; ++c) brow[c] += orow[Ca + c];
        }
      }
    };
  return Tensor::wrap(out);
}

/// Row gather; indices may repeat.
inline Tensor gather_rows(const Tensor& a, const std::vector<int>& indices) {
  auto an = a.node();
  const int C = an->cols;
  for (int idx : indices)
    if (idx < 0 || idx >= an->rows)
      throw std::invalid_argument("gather_rows: index " + std::to_string(idx) +
                                  " out of range for " + detail::shape_str(an->rows, an->cols));
  auto out = detail::make_op(static_cast<int>(indices.size()), C, {an});
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::copy_n(an->values.data() + static_cast<std::size_t>(indices[r]) * C, C,
                out->values.data() + r * C);
  if (out->requires_grad)
    out->backward_fn = [an, indices, C](detail::Node& o) {
      for (std::size_t r = 0; r < indices.size(); ++r) {
        const double* orow = o.grad.data() + r * C;
        double* arow = an->grad.data() + static_cast<std::size_t>(indices[r]) * C;
        for (int c = 0; c < C; ++c) arow[c] += orow[c];
      }
    };
  return Tensor::wrap(out);
}

/// Adjoint of gather: out[indices[r]] += a[r]. Rows not hit stay zero.
inline Tensor scatter_add_rows(const Tensor& a, const std::vector<int>& indices, int out_rows) {
  auto an = a.node();
  const int C = an->cols;
  if (indices.size() != static_cast<std::size_t>(an->rows))
    throw std::invalid_argument("scatter_add_rows: need one index per row, got " +
                                std::to_string(indices.size()) + " for " +
                                detail::shape_str(an->rows, an->cols));
  for (int idx : indices)
    if (idx < 0 || idx >= out_rows)
      throw std::invalid_argument("scatter_add_rows: index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(out_rows) + " rows");
  auto out = detail::make_op(out_rows, C, {an});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const double* arow = an->values.data() + r * C;
    double* orow = out->values.data() + static_cast<std::size_t>(indices[r]) * C;
    for (int c = 0; c < C; ++c) orow[c] += arow[c];
  }
  if (out->requires_grad)
    out->backward_fn = [an, indices, C](detail::Node& o) {
      for (std::size_t r = 0; r < indices.size(); ++r) {
        double* arow = an->grad.data() + r * C;
        const double* orow = o.grad.data() + static_cast<std::size_t>(indices[r]) * C;
        for (int c = 0; c < C; ++c) arow[c] += orow[c];
      }
    };
  return Tensor::wrap(out);
}

// ---- softmax

/// Row-wise softmax with per-row max subtraction.
inline Tensor softmax_rows(const Tensor& a) {
  auto an = a.node();
  const int R = an->rows, C = an->cols;
  auto out = detail::make_op(R, C, {an});
  for (int r = 0; r < R; ++r) {
    const double* row = an->values.data() + static_cast<std::size_t>(r) * C;
    double* orow = out->values.data() + static_cast<std::size_t>(r) * C;
    double mx = row[0];
    for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (int c = 0; c < C; ++c) {
      orow[c] = std::exp(row[c] - mx);
      z += orow[c];
    }
    for (int c = 0; c < C; ++c) orow[c] /= z;
  }
  if (out->requires_grad)
    out->backward_fn = [an, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r) {
        const double* y = o.values.data() + static_cast<std::size_t>(r) * C;
        const double* g = o.grad.data() + static_cast<std::size_t>(r) * C;
        double dot = 0.0;
        for (int c = 0; c < C; ++c) dot += y[c] * g[c];
        double* arow = an->grad.data() + static_cast<std::size_t>(r) * C;
        for (int c = 0; c < C; ++c) arow[c] += y[c] * (g[c] - dot);
      }
    };
  return Tensor::wrap(out);
}

/// Softmax normalized over every entry of the matrix; the output sums to 1.
inline Tensor softmax_full(const Tensor& a) {
  auto an = a.node();
  auto out = detail::make_op(an->rows, an->cols, {an});
  double mx = an->values[0];
  for (const double v : an->values) mx = std::max(mx, v);
  double z = 0.0;
  for (std::size_t i = 0; i < an->count(); ++i) {
    out->values[i] = std::exp(an->values[i] - mx);
    z += out->values[i];
  }
  for (std::size_t i = 0; i < an->count(); ++i) out->values[i] /= z;
  if (out->requires_grad)
    out->backward_fn = [an](detail::Node& o) {
      double dot = 0.0;
      for (std::size_t i = 0; i < o.count(); ++i) dot += o.values[i] * o.grad[i];
      for (std::size_t i = 0; i < o.count(); ++i)
        an->grad[i] += o.values[i] * (o.grad[i] - dot);
    };
  return Tensor::wrap(out);
}

/// Euclidean norm of each row -> rows x 1. Gradient at an all-zero row is 0.
inline Tensor norm_rows(const Tensor& a) {
  auto an = a.node();
  const int R = an->rows, C = an->cols;
  auto out = detail::make_op(R, 1, {an});
  for (int r = 0; r < R; ++r) {
    const double* row = an->values.data() + static_cast<std::size_t>(r) * C;
    double acc = 0.0;
    for (int c = 0; c < C; ++c) acc += row[c] * row[c];
    out->values[r] = std::sqrt(acc);
  }
  if (out->requires_grad)
    out->backward_fn = [an, R, C](detail::Node& o) {
      for (int r = 0; r < R; ++r) {
        if (o.values[r] == 0.0) continue;
        const double s = o.grad[r] / o.values[r];
        const double* row = an->values.data() + static_cast<std::size_t>(r) * C;
        double* arow = an->grad.data() + static_cast<std::size_t>(r) * C;
        for (int c = 0; c < C; ++c) arow[c] += s * row[c];
      }
    };
  return Tensor::wrap(out);
}

}  // namespace fgnet::ad

#endif  // FGNET_AD_TENSOR_HPP
