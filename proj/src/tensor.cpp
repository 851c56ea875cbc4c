#include "ppoc/tensor.hpp"

#include <cmath>
#include <utility>

namespace ppoc {

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace eval {

Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (W.rank() != 2)
    throw ContractViolation("affine: weight must be rank 2, got " + W.shape_str());
  const int out_dim = W.shape[0];
  const int in_dim = W.shape[1];
  if (x.cols() != in_dim || b.cols() != out_dim || b.rank() != 1)
    throw ContractViolation("affine: shapes do not conform: x=" + x.shape_str() +
                            " W=" + W.shape_str() + " b=" + b.shape_str());
  const int batch = x.rows();
  Tensor y = (x.rank() == 2) ? Tensor::matrix(batch, out_dim) : Tensor::vector(std::vector<double>(out_dim, 0.0));
  for (int r = 0; r < batch; ++r) {
    const double* xr = x.values.data() + static_cast<size_t>(r) * in_dim;
    double* yr = y.values.data() + static_cast<size_t>(r) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double* wo = W.values.data() + static_cast<size_t>(o) * in_dim;
      double acc = 0.0;
      for (int j = 0; j < in_dim; ++j) acc += wo[j] * xr[j];
      yr[o] = acc + b.values[o];
    }
  }
  return y;
}

Tensor tanh_act(const Tensor& x) {
  Tensor y = x;
  y.node = -1;
  for (double& v : y.values) v = std::tanh(v);
  return y;
}

Tensor sigmoid_act(const Tensor& x) {
  Tensor y = x;
  y.node = -1;
  for (double& v : y.values) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

Tensor softmax_act(const Tensor& x) {
  Tensor y = x;
  y.node = -1;
  const int n = x.cols();
  for (int r = 0; r < x.rows(); ++r) {
    double* row = y.values.data() + static_cast<size_t>(r) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (int j = 0; j < n; ++j) row[j] /= sum;
  }
  return y;
}

double gaussian_log_prob(const std::vector<double>& a, const std::vector<double>& mean,
                         const std::vector<double>& log_std) {
  if (a.size() != mean.size() || a.size() != log_std.size())
    throw ContractViolation("gaussian_log_prob: dimension mismatch");
  constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;  // ln(2*pi)/2
  double lp = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -log_std[i] - kHalfLog2Pi - 0.5 * z * z;
  }
  return lp;
}

}  // namespace eval

void Tape::require_on_tape(const Tensor& t, const char* op) {
  if (t.node < 0)
    throw ContractViolation(std::string(op) + ": input tensor is not on the tape");
}

int Tape::push(Node n) {
  const int id = static_cast<int>(nodes_.size());
  n.out.node = id;
  nodes_.push_back(std::move(n));
  return id;
}

Tensor Tape::constant(Tensor t) {
  Node n;
  n.op = Op::kConst;
  n.out = std::move(t);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::parameter(Param& p) {
  Node n;
  n.op = Op::kParam;
  n.out = p.value;
  n.param = &p;
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::affine(const Tensor& x, const Tensor& W, const Tensor& b) {
  require_on_tape(x, "affine");
  require_on_tape(W, "affine");
  require_on_tape(b, "affine");
  Node n;
  n.op = Op::kAffine;
  n.a = x.node;
  n.b = W.node;
  n.c = b.node;
  n.out = eval::affine(x, W, b);
  push(std::move(n));
  return nodes_.back().out;
}

#define PPOC_UNARY(NAME, OPK, EXPR)                  \
  Tensor Tape::NAME(const Tensor& x) {               \
    require_on_tape(x, #NAME);                       \
    Node n;                                          \
    n.op = OPK;                                      \
    n.a = x.node;                                    \
    n.out = (EXPR);                                  \
    push(std::move(n));                              \
    return nodes_.back().out;                        \
  }

PPOC_UNARY(tanh, Op::kTanh, eval::tanh_act(x))
PPOC_UNARY(sigmoid, Op::kSigmoid, eval::sigmoid_act(x))
PPOC_UNARY(softmax, Op::kSoftmax, eval::softmax_act(x))
#undef PPOC_UNARY

Tensor Tape::exp(const Tensor& x) {
  require_on_tape(x, "exp");
  Node n;
  n.op = Op::kExp;
  n.a = x.node;
  n.out = x;
  for (double& v : n.out.values) v = std::exp(v);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::log(const Tensor& x) {
  require_on_tape(x, "log");
  Node n;
  n.op = Op::kLog;
  n.a = x.node;
  n.out = x;
  for (double& v : n.out.values) v = std::log(v);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::neg(const Tensor& x) {
  require_on_tape(x, "neg");
  Node n;
  n.op = Op::kNeg;
  n.a = x.node;
  n.out = x;
  for (double& v : n.out.values) v = -v;
  push(std::move(n));
  return nodes_.back().out;
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ContractViolation(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                            b.shape_str());
}

#define PPOC_BINARY(NAME, OPK, EXPR)                        \
  Tensor Tape::NAME(const Tensor& a, const Tensor& b) {     \
    require_on_tape(a, #NAME);                              \
    require_on_tape(b, #NAME);                              \
    check_same_shape(a, b, #NAME);                          \
    Node n;                                                 \
    n.op = OPK;                                             \
    n.a = a.node;                                           \
    n.b = b.node;                                           \
    n.out = a;                                              \
    for (size_t i = 0; i < a.values.size(); ++i)            \
      n.out.values[i] = (EXPR);                             \
    push(std::move(n));                                     \
    return nodes_.back().out;                               \
  }

PPOC_BINARY(add, Op::kAdd, a.values[i] + b.values[i])
PPOC_BINARY(sub, Op::kSub, a.values[i] - b.values[i])
PPOC_BINARY(mul, Op::kMul, a.values[i] * b.values[i])
PPOC_BINARY(min, Op::kMin, a.values[i] <= b.values[i] ? a.values[i] : b.values[i])
#undef PPOC_BINARY

Tensor Tape::square(const Tensor& x) {
  require_on_tape(x, "square");
  Node n;
  n.op = Op::kSquare;
  n.a = x.node;
  n.out = x;
  for (double& v : n.out.values) v = v * v;
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::clip(const Tensor& x, double lo, double hi) {
  require_on_tape(x, "clip");
  Node n;
  n.op = Op::kClip;
  n.a = x.node;
  n.p0 = lo;
  n.p1 = hi;
  n.out = x;
  for (double& v : n.out.values) v = clamp(v, lo, hi);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::scale(const Tensor& x, double c) {
  require_on_tape(x, "scale");
  Node n;
  n.op = Op::kScale;
  n.a = x.node;
  n.p0 = c;
  n.out = x;
  for (double& v : n.out.values) v *= c;
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::add_scalar(const Tensor& x, double c) {
  require_on_tape(x, "add_scalar");
  Node n;
  n.op = Op::kAddScalar;
  n.a = x.node;
  n.p0 = c;
  n.out = x;
  for (double& v : n.out.values) v += c;
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::broadcast_rows(const Tensor& v, int rows) {
  require_on_tape(v, "broadcast_rows");
  if (v.rank() != 1)
    throw ContractViolation("broadcast_rows: expected rank-1 input, got " + v.shape_str());
  Node n;
  n.op = Op::kBroadcastRows;
  n.a = v.node;
  n.out = Tensor::matrix(rows, v.cols());
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < v.cols(); ++j) n.out.at(r, j) = v.values[j];
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::row_sum(const Tensor& x) {
  require_on_tape(x, "row_sum");
  if (x.rank() != 2)
    throw ContractViolation("row_sum: expected rank-2 input, got " + x.shape_str());
  Node n;
  n.op = Op::kRowSum;
  n.a = x.node;
  std::vector<double> sums(x.rows(), 0.0);
  for (int r = 0; r < x.rows(); ++r) {
    double acc = 0.0;
    for (int j = 0; j < x.cols(); ++j) acc += x.at(r, j);
    sums[r] = acc;
  }
  n.out = Tensor::vector(std::move(sums));
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::gather(const Tensor& x, std::vector<int> idx) {
  require_on_tape(x, "gather");
  if (static_cast<int>(idx.size()) != x.rows())
    throw ContractViolation("gather: need one index per row");
  for (int i : idx)
    if (i < 0 || i >= x.cols()) throw ContractViolation("gather: index out of range");
  Node n;
  n.op = Op::kGather;
  n.a = x.node;
  if (x.rank() == 2) {
    std::vector<double> picked(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) picked[r] = x.at(static_cast<int>(r), idx[r]);
    n.out = Tensor::vector(std::move(picked));
  } else {
    n.out = Tensor::scalar(x.values[idx[0]]);
  }
  n.idx = std::move(idx);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::sum(const Tensor& x) {
  require_on_tape(x, "sum");
  Node n;
  n.op = Op::kSum;
  n.a = x.node;
  double acc = 0.0;
  for (double v : x.values) acc += v;
  n.out = Tensor::scalar(acc);
  push(std::move(n));
  return nodes_.back().out;
}

Tensor Tape::mean(const Tensor& x) {
  require_on_tape(x, "mean");
  if (x.values.empty()) throw ContractViolation("mean: empty tensor");
  Node n;
  n.op = Op::kMean;
  n.a = x.node;
  double acc = 0.0;
  for (double v : x.values) acc += v;
  n.out = Tensor::scalar(acc / static_cast<double>(x.values.size()));
  push(std::move(n));
  return nodes_.back().out;
}

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
}

void Tape::backward(const Tensor& loss) {
  if (loss.node < 0 || loss.node >= static_cast<int>(nodes_.size()))
    throw ContractViolation("backward: loss is not on this tape");
  if (loss.size() != 1 || loss.rank() != 0)
    throw ContractViolation("backward: loss must be a scalar, got shape " + loss.shape_str());

  grads_.resize(nodes_.size());
  for (size_t i = 0; i <= static_cast<size_t>(loss.node); ++i)
    grads_[i].assign(nodes_[i].out.size(), 0.0);
  grads_[loss.node][0] = 1.0;

  for (int id = loss.node; id >= 0; --id) {
    const Node& n = nodes_[id];
    const std::vector<double>& g = grads_[id];
    switch (n.op) {
      case Op::kConst:
        break;
      case Op::kParam:
        for (size_t i = 0; i < g.size(); ++i) n.param->grad[i] += g[i];
        break;
      case Op::kAffine: {
        const Tensor& x = in(n.a);
        const Tensor& W = in(n.b);
        const int out_dim = W.shape[0];
        const int in_dim = W.shape[1];
        const int batch = x.rows();
        std::vector<double>& gx = grads_[n.a];
        std::vector<double>& gW = grads_[n.b];
        std::vector<double>& gb = grads_[n.c];
        for (int r = 0; r < batch; ++r) {
          const double* gyr = g.data() + static_cast<size_t>(r) * out_dim;
          const double* xr = x.values.data() + static_cast<size_t>(r) * in_dim;
          double* gxr = gx.data() + static_cast<size_t>(r) * in_dim;
          for (int o = 0; o < out_dim; ++o) {
            const double go = gyr[o];
            if (go == 0.0) continue;
            const double* wo = W.values.data() + static_cast<size_t>(o) * in_dim;
            double* gwo = gW.data() + static_cast<size_t>(o) * in_dim;
            for (int j = 0; j < in_dim; ++j) {
              gxr[j] += go * wo[j];
              gwo[j] += go * xr[j];
            }
            gb[o] += go;
          }
        }
        break;
      }
      case Op::kTanh: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) {
          const double y = n.out.values[i];
          ga[i] += g[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::kSigmoid: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) {
          const double y = n.out.values[i];
          ga[i] += g[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::kSoftmax: {
        std::vector<double>& ga = grads_[n.a];
        const int ncols = n.out.cols();
        for (int r = 0; r < n.out.rows(); ++r) {
          const double* y = n.out.values.data() + static_cast<size_t>(r) * ncols;
          const double* gr = g.data() + static_cast<size_t>(r) * ncols;
          double dot = 0.0;
          for (int j = 0; j < ncols; ++j) dot += gr[j] * y[j];
          double* gar = ga.data() + static_cast<size_t>(r) * ncols;
          for (int j = 0; j < ncols; ++j) gar[j] += y[j] * (gr[j] - dot);
        }
        break;
      }
      case Op::kExp: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.out.values[i];
        break;
      }
      case Op::kLog: {
        std::vector<double>& ga = grads_[n.a];
        const Tensor& x = in(n.a);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x.values[i];
        break;
      }
      case Op::kNeg: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
        break;
      }
      case Op::kAdd: {
        std::vector<double>& ga = grads_[n.a];
        std::vector<double>& gb = grads_[n.b];
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        std::vector<double>& ga = grads_[n.a];
        std::vector<double>& gb = grads_[n.b];
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        std::vector<double>& ga = grads_[n.a];
        std::vector<double>& gb = grads_[n.b];
        const Tensor& a = in(n.a);
        const Tensor& b = in(n.b);
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * b.values[i];
          gb[i] += g[i] * a.values[i];
        }
        break;
      }
      case Op::kSquare: {
        std::vector<double>& ga = grads_[n.a];
        const Tensor& x = in(n.a);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 2.0 * x.values[i];
        break;
      }
      case Op::kMin: {
        std::vector<double>& ga = grads_[n.a];
        std::vector<double>& gb = grads_[n.b];
        const Tensor& a = in(n.a);
        const Tensor& b = in(n.b);
        for (size_t i = 0; i < g.size(); ++i) {
          if (a.values[i] <= b.values[i])
            ga[i] += g[i];
          else
            gb[i] += g[i];
        }
        break;
      }
      case Op::kClip: {
        std::vector<double>& ga = grads_[n.a];
        const Tensor& x = in(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          if (x.values[i] > n.p0 && x.values[i] < n.p1) ga[i] += g[i];
        break;
      }
      case Op::kScale: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.p0;
        break;
      }
      case Op::kAddScalar: {
        std::vector<double>& ga = grads_[n.a];
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        break;
      }
      case Op::kBroadcastRows: {
        std::vector<double>& ga = grads_[n.a];
        const int ncols = n.out.cols();
        for (int r = 0; r < n.out.rows(); ++r)
          for (int j = 0; j < ncols; ++j) ga[j] += g[static_cast<size_t>(r) * ncols + j];
        break;
      }
      case Op::kRowSum: {
        std::vector<double>& ga = grads_[n.a];
        const Tensor& x = in(n.a);
        const int ncols = x.cols();
        for (int r = 0; r < x.rows(); ++r)
          for (int j = 0; j < ncols; ++j) ga[static_cast<size_t>(r) * ncols + j] += g[r];
        break;
      }
      case Op::kGather: {
        std::vector<double>& ga = grads_[n.a];
        const Tensor& x = in(n.a);
        const int ncols = x.cols();
        for (size_t r = 0; r < n.idx.size(); ++r) ga[r * ncols + n.idx[r]] += g[r];
        break;
      }
      case Op::kSum: {
        std::vector<double>& ga = grads_[n.a];
        for (double& v : ga) v += g[0];
        break;
      }
      case Op::kMean: {
        std::vector<double>& ga = grads_[n.a];
        const double gi = g[0] / static_cast<double>(ga.size());
        for (double& v : ga) v += gi;
        break;
      }
    }
  }
}

Tensor gaussian_log_prob(Tape& tape, const Tensor& a, const Tensor& mean, const Tensor& log_std) {
  if (a.cols() != mean.cols() || a.cols() != log_std.cols() || a.rows() != mean.rows())
    throw ContractViolation("gaussian_log_prob: shapes do not conform: a=" + a.shape_str() +
                            " mean=" + mean.shape_str() + " log_std=" + log_std.shape_str());
  const int d = a.cols();
  const bool batched = a.rank() == 2;
  const int rows = a.rows();

  Tensor ls = batched ? tape.broadcast_rows(log_std, rows) : log_std;
  Tensor diff = tape.sub(a, mean);
  Tensor z = tape.mul(diff, tape.exp(tape.neg(ls)));
  Tensor zsq = tape.square(z);
  constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;
  if (batched) {
    Tensor quad = tape.scale(tape.row_sum(zsq), -0.5);
    Tensor lsum = tape.neg(tape.row_sum(ls));
    return tape.add_scalar(tape.add(lsum, quad), -kHalfLog2Pi * d);
  }
  Tensor quad = tape.scale(tape.sum(zsq), -0.5);
  Tensor lsum = tape.neg(tape.sum(ls));
  return tape.add_scalar(tape.add(lsum, quad), -kHalfLog2Pi * d);
}

}  // namespace ppoc
