#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spanie/errors.hpp"
#include "spanie/rng.hpp"

namespace spanie {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace ad {

// A trainable array. Lives outside any tape; tapes accumulate into `grad`
// on backward, and the optimizer consumes and clears it.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}

  Param(const Param&) = delete;
  Param& operator=(const Param&) = delete;
  Param(Param&&) = default;
  Param& operator=(Param&&) = default;

  void zero_grad() { grad.setZero(); }
  long long size() const { return value.size(); }
};

inline void init_normal(Param& p, Rng& rng, double stddev) {
  for (long i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng_normal(rng, 0.0, stddev);
}

inline void init_constant(Param& p, double v) { p.value.setConstant(v); }

class Tape;

// Lightweight handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int index = -1;

  bool valid() const { return tape != nullptr; }
  const Mat& value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  double scalar() const;
};

// Reverse-mode tape over dense double matrices. Nodes are created in
// topological order by construction; backward walks the tape in reverse.
class Tape {
 public:
  // back(tape, grad_of_this_node, value_of_this_node)
  using BackFn = std::function<void(Tape&, const Mat&, const Mat&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf with no gradient tracking.
  Var constant(Mat v) { return make(std::move(v), false, nullptr, nullptr); }

  // Leaf that tracks gradients but is not bound to a Param (tests, probes).
  Var leaf(Mat v) { return make(std::move(v), true, nullptr, nullptr); }

  // Leaf bound to a Param: backward adds the node gradient into p.grad.
  Var param(Param& p) { return make(p.value, true, nullptr, &p); }

  Var make(Mat value, bool needs_grad, BackFn back, Param* bound = nullptr) {
    nodes_.push_back(Node{std::move(value), Mat(), std::move(back), needs_grad, bound});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  const Mat& value(const Var& v) const { return nodes_[v.index].value; }
  const Mat& grad(const Var& v) const {
    const Node& n = nodes_[v.index];
    if (n.grad.size() == 0) {
      static const Mat empty;
      return empty;
    }
    return n.grad;
  }
  bool needs_grad(const Var& v) const { return nodes_[v.index].needs_grad; }

  // Adds g into the gradient buffer of node v (no-op for constants).
  template <typename Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.index];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  // Row-scatter: row k of g is added to row rows[k] of v's gradient.
  template <typename Derived>
  void accumulate_rows(const Var& v, const std::vector<int>& rows,
                       const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.index];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) n.grad.row(rows[k]) += g.row(k);
  }

  // Block scatter: g is added to the (r0, c0) block of v's gradient.
  template <typename Derived>
  void accumulate_block(const Var& v, int r0, int c0, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.index];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad.block(r0, c0, g.rows(), g.cols()) += g;
  }

  // Seeds d(loss)/d(loss) = seed and propagates to every reachable leaf.
  // Param-bound leaves receive their share in Param::grad.
  void backward(const Var& loss, double seed = 1.0) {
    if (loss.tape != this) throw ConfigError("backward: variable from another tape");
    Node& last = nodes_[loss.index];
    if (last.value.size() != 1) throw ConfigError("backward: loss must be a 1x1 node");
    if (last.grad.size() == 0)
      last.grad = Mat::Constant(1, 1, seed);
    else
      last.grad.array() += seed;
    for (int i = loss.index; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      if (n.back) n.back(*this, n.grad, n.value);
      if (n.bound != nullptr) n.bound->grad += n.grad;
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    BackFn back;
    bool needs_grad = false;
    Param* bound = nullptr;
  };
  std::vector<Node> nodes_;
};

inline const Mat& Var::value() const { return tape->value(*this); }
inline double Var::scalar() const {
  const Mat& v = value();
  if (v.size() != 1) throw ConfigError("scalar() on a non-1x1 variable");
  return v(0, 0);
}

namespace detail {
inline Tape& same_tape(const Var& a, const Var& b) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw ConfigError("operands live on different tapes");
  return *a.tape;
}
inline void check_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
}
}  // namespace detail

// ---- primitive ops -------------------------------------------------------

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions disagree");
  Mat y = t.value(a) * t.value(b);
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  Var va = a, vb = b;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
    tp.accumulate(va, g * tp.value(vb).transpose());
    tp.accumulate(vb, tp.value(va).transpose() * g);
  });
}

// A * B^T without materialising the transpose.
inline Var matmul_bt(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  if (a.cols() != b.cols()) throw ConfigError("matmul_bt: inner dimensions disagree");
  Mat y = t.value(a) * t.value(b).transpose();
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  Var va = a, vb = b;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
    tp.accumulate(va, g * tp.value(vb));
    tp.accumulate(vb, g.transpose() * tp.value(va));
  });
}

inline Var add(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::check_shape(a, b, "add");
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  Var va = a, vb = b;
  return t.make(t.value(a) + t.value(b), ng,
                !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, g);
                  tp.accumulate(vb, g);
                });
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::check_shape(a, b, "sub");
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  Var va = a, vb = b;
  return t.make(t.value(a) - t.value(b), ng,
                !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, g);
                  tp.accumulate(vb, -g);
                });
}

inline Var cmul(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::check_shape(a, b, "cmul");
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  Var va = a, vb = b;
  return t.make(t.value(a).cwiseProduct(t.value(b)), ng,
                !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, g.cwiseProduct(tp.value(vb)));
                  tp.accumulate(vb, g.cwiseProduct(tp.value(va)));
                });
}

// k*A + c, elementwise.
inline Var affine(const Var& a, double k, double c) {
  Tape& t = *a.tape;
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make((t.value(a).array() * k + c).matrix(), ng,
                !ng ? Tape::BackFn() : [va, k](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, (g.array() * k).matrix());
                });
}

inline Var scale(const Var& a, double k) { return affine(a, k, 0.0); }

// Adds a 1 x cols bias row to every row of a.
inline Var add_rowwise(const Var& a, const Var& bias) {
  Tape& t = detail::same_tape(a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw ConfigError("add_rowwise: bias must be 1x" + std::to_string(a.cols()));
  Mat y = t.value(a);
  y.rowwise() += t.value(bias).row(0);
  const bool ng = t.needs_grad(a) || t.needs_grad(bias);
  Var va = a, vb = bias;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va, vb](Tape& tp, const Mat& g, const Mat&) {
    tp.accumulate(va, g);
    tp.accumulate(vb, g.colwise().sum());
  });
}

inline Var transpose(const Var& a) {
  Tape& t = *a.tape;
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make(t.value(a).transpose(), ng,
                !ng ? Tape::BackFn() : [va](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, g.transpose());
                });
}

inline Var slice_rows(const Var& a, int r0, int nrows) {
  Tape& t = *a.tape;
  if (r0 < 0 || nrows < 0 || r0 + nrows > a.rows()) throw ConfigError("slice_rows: out of range");
  const bool ng = t.needs_grad(a);
  Var va = a;
  const int cols = a.cols();
  return t.make(t.value(a).block(r0, 0, nrows, cols), ng,
                !ng ? Tape::BackFn() : [va, r0](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate_block(va, r0, 0, g);
                });
}

inline Var slice_cols(const Var& a, int c0, int ncols) {
  Tape& t = *a.tape;
  if (c0 < 0 || ncols < 0 || c0 + ncols > a.cols()) throw ConfigError("slice_cols: out of range");
  const bool ng = t.needs_grad(a);
  Var va = a;
  const int rows = a.rows();
  return t.make(t.value(a).block(0, c0, rows, ncols), ng,
                !ng ? Tape::BackFn() : [va, c0](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate_block(va, 0, c0, g);
                });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no parts");
  Tape& t = *parts.front().tape;
  const int rows = parts.front().rows();
  int cols = 0;
  bool ng = false;
  for (const auto& p : parts) {
    if (p.tape != &t || p.rows() != rows) throw ConfigError("concat_cols: incompatible parts");
    cols += p.cols();
    ng = ng || t.needs_grad(p);
  }
  Mat y(rows, cols);
  int at = 0;
  for (const auto& p : parts) {
    y.block(0, at, rows, p.cols()) = t.value(p);
    at += p.cols();
  }
  std::vector<Var> vp = parts;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [vp](Tape& tp, const Mat& g, const Mat&) {
    int at = 0;
    for (const auto& p : vp) {
      const int w = static_cast<int>(tp.value(p).cols());
      tp.accumulate(p, g.block(0, at, g.rows(), w));
      at += w;
    }
  });
}

// Gathers rows of a table: output row k = table row ids[k].
inline Var gather_rows(const Var& table, std::vector<int> ids) {
  Tape& t = *table.tape;
  const int rows = table.rows();
  for (int id : ids)
    if (id < 0 || id >= rows)
      throw ValidationError("gather_rows: id " + std::to_string(id) + " outside table of " +
                            std::to_string(rows) + " rows");
  Mat y(static_cast<int>(ids.size()), table.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) y.row(k) = t.value(table).row(ids[k]);
  const bool ng = t.needs_grad(table);
  Var vt = table;
  return t.make(std::move(y), ng,
                !ng ? Tape::BackFn() : [vt, ids = std::move(ids)](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate_rows(vt, ids, g);
                });
}

// Numerically stable softmax over each row.
inline Var softmax_rows(const Var& a) {
  Tape& t = *a.tape;
  Mat y = t.value(a);
  for (int r = 0; r < y.rows(); ++r) {
    const double mx = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va](Tape& tp, const Mat& g, const Mat& y) {
    // dx = y .* (g - rowsum(g .* y))
    Mat gx(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r) {
      const double s = g.row(r).cwiseProduct(y.row(r)).sum();
      gx.row(r) = (y.row(r).array() * (g.row(r).array() - s)).matrix();
    }
    tp.accumulate(va, gx);
  });
}

// Row-wise layer normalisation with learned gain and bias (both 1 x cols).
inline Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5) {
  Tape& t = detail::same_tape(x, gain);
  detail::same_tape(x, bias);
  const int rows = x.rows(), cols = x.cols();
  if (gain.rows() != 1 || gain.cols() != cols || bias.rows() != 1 || bias.cols() != cols)
    throw ConfigError("layer_norm_rows: gain/bias must be 1x" + std::to_string(cols));
  Mat xhat(rows, cols);
  Vec inv_std(rows);
  const Mat& xv = t.value(x);
  for (int r = 0; r < rows; ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu) * inv_std(r);
  }
  Mat y = xhat;
  y.array().rowwise() *= t.value(gain).row(0).array();
  y.rowwise() += t.value(bias).row(0);
  const bool ng = t.needs_grad(x) || t.needs_grad(gain) || t.needs_grad(bias);
  Var vx = x, vg = gain, vb = bias;
  return t.make(std::move(y), ng,
                !ng ? Tape::BackFn()
                    : [vx, vg, vb, xhat = std::move(xhat),
                       inv_std = std::move(inv_std)](Tape& tp, const Mat& g, const Mat&) {
                        // dxhat = g .* gain (broadcast over rows)
                        Mat dxhat = g;
                        dxhat.array().rowwise() *= tp.value(vg).row(0).array();
                        Mat gx(g.rows(), g.cols());
                        for (int r = 0; r < g.rows(); ++r) {
                          const double m1 = dxhat.row(r).mean();
                          const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
                          gx.row(r) =
                              inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
                        }
                        tp.accumulate(vx, gx);
                        tp.accumulate(vg, g.cwiseProduct(xhat).colwise().sum());
                        tp.accumulate(vb, g.colwise().sum());
                      });
}

// Exact GELU, 0.5 x (1 + erf(x/sqrt(2))); smooth everywhere, which keeps
// finite-difference gradient checks clean.
inline Var gelu(const Var& a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  Tape& t = *a.tape;
  const Mat& xv = t.value(a);
  Mat y = xv.unaryExpr([=](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); });
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va](Tape& tp, const Mat& g, const Mat&) {
    const Mat& x = tp.value(va);
    Mat d = x.unaryExpr([=](double v) {
      const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      const double pdf = std::exp(-0.5 * v * v) * inv_sqrt2pi;
      return cdf + v * pdf;
    });
    tp.accumulate(va, g.cwiseProduct(d));
  });
}

inline Var sigmoid(const Var& a) {
  Tape& t = *a.tape;
  Mat y = t.value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make(std::move(y), ng, !ng ? Tape::BackFn() : [va](Tape& tp, const Mat& g, const Mat& y) {
    tp.accumulate(va, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

// Inverted-dropout: keeps activations unbiased in expectation.
inline Var dropout(const Var& a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ConfigError("dropout: rate must be < 1");
  Tape& t = *a.tape;
  Mat mask(a.rows(), a.cols());
  const double keep = 1.0 - rate;
  for (long i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng_unit(rng) < rate ? 0.0 : 1.0 / keep;
  Var vmask = t.constant(std::move(mask));
  return cmul(a, vmask);
}

inline Var sum_all(const Var& a) {
  Tape& t = *a.tape;
  const bool ng = t.needs_grad(a);
  Var va = a;
  return t.make(Mat::Constant(1, 1, t.value(a).sum()), ng,
                !ng ? Tape::BackFn() : [va](Tape& tp, const Mat& g, const Mat&) {
                  tp.accumulate(va, Mat::Constant(tp.value(va).rows(), tp.value(va).cols(), g(0, 0)));
                });
}

inline Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.rows() * a.cols())); }

// Mean cross-entropy over rows of a logit matrix against integer targets,
// computed through a stable log-sum-exp. Returns a 1x1 node.
inline Var cross_entropy_rows(const Var& logits, std::vector<int> targets) {
  Tape& t = *logits.tape;
  const int rows = logits.rows(), cols = logits.cols();
  if (static_cast<int>(targets.size()) != rows)
    throw ConfigError("cross_entropy_rows: " + std::to_string(targets.size()) + " targets for " +
                      std::to_string(rows) + " rows");
  for (int tgt : targets)
    if (tgt < 0 || tgt >= cols) throw ValidationError("cross_entropy_rows: target out of range");
  const Mat& x = t.value(logits);
  Mat probs(rows, cols);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double mx = x.row(r).maxCoeff();
    probs.row(r) = (x.row(r).array() - mx).exp();
    const double z = probs.row(r).sum();
    probs.row(r) /= z;
    total += mx + std::log(z) - x(r, targets[r]);
  }
  const bool ng = t.needs_grad(logits);
  Var vl = logits;
  return t.make(Mat::Constant(1, 1, total / rows), ng,
                !ng ? Tape::BackFn()
                    : [vl, probs = std::move(probs), targets = std::move(targets),
                       rows](Tape& tp, const Mat& g, const Mat&) {
                        Mat gx = probs;
                        for (int r = 0; r < rows; ++r) gx(r, targets[r]) -= 1.0;
                        tp.accumulate(vl, gx * (g(0, 0) / rows));
                      });
}

}  // namespace ad
}  // namespace spanie
