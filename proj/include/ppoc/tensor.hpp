#ifndef PPOC_TENSOR_HPP_
#define PPOC_TENSOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ppoc/common.hpp"

namespace ppoc {

// Dense row-major array of doubles. Rank 0 (scalar), 1 (vector) or
// 2 (matrix). `node` is a handle into the tape that produced the value,
// or -1 for a detached tensor.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  int node = -1;

  Tensor() = default;

  static Tensor scalar(double v) {
    Tensor t;
    t.values = {v};
    return t;
  }
  static Tensor vector(std::vector<double> v) {
    Tensor t;
    t.shape = {static_cast<int>(v.size())};
    t.values = std::move(v);
    return t;
  }
  static Tensor matrix(int rows, int cols, double fill = 0.0) {
    Tensor t;
    t.shape = {rows, cols};
    t.values.assign(static_cast<size_t>(rows) * cols, fill);
    return t;
  }
  static Tensor zeros_like(const Tensor& o) {
    Tensor t;
    t.shape = o.shape;
    t.values.assign(o.values.size(), 0.0);
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  // Row/column view: scalars and vectors count as one row.
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const {
    if (rank() == 2) return shape[1];
    if (rank() == 1) return shape[0];
    return 1;
  }
  size_t size() const { return values.size(); }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols() + c]; }

  std::string shape_str() const;
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// A named parameter with its gradient accumulator and optimizer moments,
// all shaped like the value.
struct Param {
  std::string name;
  Tensor value;
  std::vector<double> grad, m, v;

  explicit Param(std::string n, Tensor init) : name(std::move(n)), value(std::move(init)) {
    grad.assign(value.size(), 0.0);
    m.assign(value.size(), 0.0);
    v.assign(value.size(), 0.0);
  }
  void zero_grad() { grad.assign(grad.size(), 0.0); }
};

// Plain (untracked) forward kernels. The tape ops call the same kernels,
// so evaluation with or without a tape is arithmetically identical.
namespace eval {
Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b);
Tensor tanh_act(const Tensor& x);
Tensor sigmoid_act(const Tensor& x);
Tensor softmax_act(const Tensor& x);  // row-wise, max-subtracted
// Sum of per-dimension diagonal-Gaussian log densities; a, mean and
// log_std must share the number of columns.
double gaussian_log_prob(const std::vector<double>& a, const std::vector<double>& mean,
                         const std::vector<double>& log_std);
}  // namespace eval

enum class Op : uint8_t {
  kConst,
  kParam,
  kAffine,
  kTanh,
  kSigmoid,
  kSoftmax,
  kExp,
  kLog,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kSquare,
  kMin,
  kClip,
  kScale,
  kAddScalar,
  kBroadcastRows,
  kRowSum,
  kGather,
  kSum,
  kMean,
};

// Reverse-mode tape: an append-only record of operations in topological
// order. One tape is owned by one training run; clear() between updates
// keeps memory flat across iterations.
class Tape {
 public:
  Tensor constant(Tensor t);
  Tensor parameter(Param& p);

  // y = W x + b (vector x) or Y = X W^T + 1 b^T (matrix X, one row per sample).
  Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b);
  Tensor tanh(const Tensor& x);
  Tensor sigmoid(const Tensor& x);
  Tensor softmax(const Tensor& x);
  Tensor exp(const Tensor& x);
  Tensor log(const Tensor& x);
  Tensor neg(const Tensor& x);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor square(const Tensor& x);
  // Elementwise minimum; ties follow the first argument's branch.
  Tensor min(const Tensor& a, const Tensor& b);
  // Gradient passes only strictly inside (lo, hi).
  Tensor clip(const Tensor& x, double lo, double hi);
  Tensor scale(const Tensor& x, double c);
  Tensor add_scalar(const Tensor& x, double c);
  // [n] -> [rows x n]
  Tensor broadcast_rows(const Tensor& v, int rows);
  // [B x n] -> [B]
  Tensor row_sum(const Tensor& x);
  // [B x n] + per-row column index -> [B]; on a vector, idx has one entry
  // and the result is a scalar.
  Tensor gather(const Tensor& x, std::vector<int> idx);
  Tensor sum(const Tensor& x);
  Tensor mean(const Tensor& x);

  // Accumulates d(loss)/d(param) into every reachable Param::grad (+=).
  // `loss` must be a scalar produced by this tape.
  void backward(const Tensor& loss);

  void clear();
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    double p0 = 0.0, p1 = 0.0;
    std::vector<int> idx;
    Tensor out;
    Param* param = nullptr;
  };

  int push(Node n);
  const Tensor& in(int id) const { return nodes_[id].out; }
  static void require_on_tape(const Tensor& t, const char* op);

  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;  // scratch, reused across backward calls
};

// log N(a | mean, exp(log_std)^2) summed over action dimensions, built from
// tape primitives. Batched inputs [B x d] give a [B] result; vectors give a
// scalar. log_std is rank 1 and is broadcast across rows.
Tensor gaussian_log_prob(Tape& tape, const Tensor& a, const Tensor& mean, const Tensor& log_std);

}  // namespace ppoc

#endif  // PPOC_TENSOR_HPP_
