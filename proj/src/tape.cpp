#include "fusionlm/tape.hpp"

#include <cmath>
#include <utility>

#include "fusionlm/errors.hpp"
#include "fusionlm/threading.hpp"

namespace fusionlm {
namespace {

// Pre-activation clamp keeping sigmoid outputs strictly inside (0, 1) in
// 64-bit floats; beyond +-36 the true derivative is below 1e-15 anyway.
constexpr double kSigmoidClamp = 36.0;

double stable_sigmoid(double x) {
  const double c = x > kSigmoidClamp ? kSigmoidClamp : (x < -kSigmoidClamp ? -kSigmoidClamp : x);
  return 1.0 / (1.0 + std::exp(-c));
}

}  // namespace

std::size_t Tape::check(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw IndexError("invalid tape variable");
  }
  return static_cast<std::size_t>(v.id);
}

Var Tape::push(Tensor value, std::function<void(Tape&)> backward) {
  Node n;
  n.grad = Tensor(value.shape());  // eagerly zeroed: unused nodes keep zero grads
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out = fusionlm::matmul(ta, tb);
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    gemm_nt(d, t.value(b), t.grad_mut(a));  // dA += dC * B^T
    gemm_tn(t.value(a), d, t.grad_mut(b));  // dB += A^T * dC
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) {
    throw DimensionError("add shape mismatch: " + ta.shape_str() + " vs " + tb.shape_str());
  }
  Tensor out = ta;
  axpy(1.0, tb, out);
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    axpy(1.0, d, t.grad_mut(a));
    axpy(1.0, d, t.grad_mut(b));
  });
}

Var Tape::add_bias(Var x, Var bias) {
  const Tensor& tx = value(x);
  const Tensor& tb = value(bias);
  if (tb.ndim() != 1 || tb.size() != tx.cols()) {
    throw DimensionError("add_bias shape mismatch: " + tx.shape_str() + " vs " + tb.shape_str());
  }
  Tensor out = tx;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += tb[j];
  }
  return push(std::move(out), [x, bias, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    axpy(1.0, d, t.grad_mut(x));
    Tensor& db = t.grad_mut(bias);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t j = 0; j < d.cols(); ++j) db[j] += d(i, j);
    }
  });
}

Var Tape::hadamard(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) {
    throw DimensionError("hadamard shape mismatch: " + ta.shape_str() + " vs " + tb.shape_str());
  }
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& da = t.grad_mut(a);
    Tensor& db = t.grad_mut(b);
    for (std::size_t i = 0; i < d.size(); ++i) {
      da[i] += d[i] * vb[i];
      db[i] += d[i] * va[i];
    }
  });
}

Var Tape::sigmoid(Var x) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(out[i]);
  return push(std::move(out), [x, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& dx = t.grad_mut(x);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::tanh_act(Var x) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return push(std::move(out), [x, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& dx = t.grad_mut(x);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat of zero parts");
  const std::size_t rows = value(parts[0]).rows();
  bool all_1d = true;
  std::size_t width = 0;
  for (Var p : parts) {
    const Tensor& tp = value(p);
    if (tp.rows() != rows) {
      throw DimensionError("concat leading dimension mismatch: " + value(parts[0]).shape_str() +
                           " vs " + tp.shape_str());
    }
    if (tp.ndim() != 1) all_1d = false;
    width += tp.cols();
  }
  Tensor out(all_1d ? std::vector<std::size_t>{width} : std::vector<std::size_t>{rows, width});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& tp = value(p);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < tp.cols(); ++j) {
        out.data()[i * width + off + j] = tp.data()[i * tp.cols() + j];
      }
    }
    off += tp.cols();
  }
  return push(std::move(out),
              [parts, rows, width, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.grad(self);
                std::size_t off = 0;
                for (Var p : parts) {
                  Tensor& dp = t.grad_mut(p);
                  const std::size_t w = dp.cols();
                  for (std::size_t i = 0; i < rows; ++i) {
                    for (std::size_t j = 0; j < w; ++j) {
                      dp.data()[i * w + j] += d.data()[i * width + off + j];
                    }
                  }
                  off += w;
                }
              });
}

Var Tape::slice_cols(Var x, std::size_t start, std::size_t len) {
  const Tensor& tx = value(x);
  if (start + len > tx.cols()) {
    throw DimensionError("slice_cols out of range for " + tx.shape_str());
  }
  const std::size_t rows = tx.rows();
  Tensor out(tx.ndim() == 1 ? std::vector<std::size_t>{len} : std::vector<std::size_t>{rows, len});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < len; ++j) out.data()[i * len + j] = tx.data()[i * tx.cols() + start + j];
  }
  return push(std::move(out),
              [x, start, len, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.grad(self);
                Tensor& dx = t.grad_mut(x);
                const std::size_t cols = dx.cols();
                for (std::size_t i = 0; i < d.rows(); ++i) {
                  for (std::size_t j = 0; j < len; ++j) {
                    dx.data()[i * cols + start + j] += d.data()[i * len + j];
                  }
                }
              });
}

Var Tape::rows_lookup(Var table, std::vector<int> ids) {
  const Tensor& tt = value(table);
  if (tt.ndim() != 2) throw DimensionError("rows_lookup table must be 2-D");
  const std::size_t cols = tt.cols();
  Tensor out({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tt.rows()) {
      throw IndexError("rows_lookup id out of range");
    }
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = tt(static_cast<std::size_t>(ids[i]), j);
  }
  return push(std::move(out),
              [table, ids = std::move(ids), cols,
               self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.grad(self);
                Tensor& dt = t.grad_mut(table);
                for (std::size_t i = 0; i < ids.size(); ++i) {
                  for (std::size_t j = 0; j < cols; ++j) {
                    dt(static_cast<std::size_t>(ids[i]), j) += d(i, j);
                  }
                }
              });
}

Var Tape::row_scale(Var x, Var s) {
  const Tensor& tx = value(x);
  const Tensor& ts = value(s);
  if (ts.ndim() != 1 || ts.size() != tx.rows()) {
    throw DimensionError("row_scale shape mismatch: " + tx.shape_str() + " vs " + ts.shape_str());
  }
  Tensor out = tx;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= ts[i];
  }
  return push(std::move(out), [x, s, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    const Tensor& vx = t.value(x);
    const Tensor& vs = t.value(s);
    Tensor& dx = t.grad_mut(x);
    Tensor& ds = t.grad_mut(s);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d.cols(); ++j) {
        dx(i, j) += d(i, j) * vs[i];
        acc += d(i, j) * vx(i, j);
      }
      ds[i] += acc;
    }
  });
}

Var Tape::row_dot(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) {
    throw DimensionError("row_dot shape mismatch: " + ta.shape_str() + " vs " + tb.shape_str());
  }
  Tensor out({ta.rows()});
  for (std::size_t i = 0; i < ta.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ta.cols(); ++j) acc += ta(i, j) * tb(i, j);
    out[i] = acc;
  }
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& da = t.grad_mut(a);
    Tensor& db = t.grad_mut(b);
    for (std::size_t i = 0; i < va.rows(); ++i) {
      for (std::size_t j = 0; j < va.cols(); ++j) {
        da(i, j) += d[i] * vb(i, j);
        db(i, j) += d[i] * va(i, j);
      }
    }
  });
}

Var Tape::softmax_cross_entropy(Var logits, std::vector<int> targets) {
  const Tensor& tl = value(logits);
  const std::size_t m = tl.rows(), v = tl.cols();
  if (targets.size() != m) {
    throw DimensionError("softmax_cross_entropy expects one target per row");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= v) {
      throw IndexError("softmax_cross_entropy target out of range [0, " + std::to_string(v) + ")");
    }
  }
  Tensor nll({m});
  Tensor probs({m, v});
  const double* pl = tl.data();
  double* pp = probs.data();
  double* pn = nll.data();
  parallel_for(m, std::max<std::size_t>(1, (1 << 14) / std::max<std::size_t>(1, v)),
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i) {
                   const double* row = pl + i * v;
                   double mx = row[0];
                   for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
                   double z = 0.0;
                   for (std::size_t j = 0; j < v; ++j) {
                     const double e = std::exp(row[j] - mx);
                     pp[i * v + j] = e;
                     z += e;
                   }
                   const double inv = 1.0 / z;
                   for (std::size_t j = 0; j < v; ++j) pp[i * v + j] *= inv;
                   // -log p(target) = log(sum exp) + max - logit[target]
                   pn[i] = std::log(z) + mx - row[static_cast<std::size_t>(targets[i])];
                 }
               });
  return push(std::move(nll),
              [logits, targets = std::move(targets), probs = std::move(probs), v,
               self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.grad(self);
                Tensor& dl = t.grad_mut(logits);
                for (std::size_t i = 0; i < d.size(); ++i) {
                  const double di = d[i];
                  if (di == 0.0) continue;  // masked rows contribute exactly zero
                  for (std::size_t j = 0; j < v; ++j) dl(i, j) += di * probs(i, j);
                  dl(i, static_cast<std::size_t>(targets[i])) -= di;
                }
              });
}

Var Tape::weighted_sum(Var x, std::vector<double> weights) {
  const Tensor& tx = value(x);
  if (weights.size() != tx.size()) {
    throw DimensionError("weighted_sum weight count mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * tx[i];
  return push(Tensor::scalar(acc),
              [x, weights = std::move(weights), self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const double d = t.grad(self)[0];
                Tensor& dx = t.grad_mut(x);
                for (std::size_t i = 0; i < weights.size(); ++i) dx[i] += d * weights[i];
              });
}

Var Tape::add_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw DimensionError("add_scalars of zero terms");
  double acc = 0.0;
  for (Var x : xs) {
    if (value(x).size() != 1) throw DimensionError("add_scalars expects scalars");
    acc += value(x)[0];
  }
  return push(Tensor::scalar(acc), [xs, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const double d = t.grad(self)[0];
    for (Var x : xs) t.grad_mut(x)[0] += d;
  });
}

Var Tape::scale(Var x, double c) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return push(std::move(out), [x, c, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.grad(self);
    Tensor& dx = t.grad_mut(x);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += c * d[i];
  });
}

void Tape::backward(Var loss) {
  const std::size_t id = check(loss);
  if (nodes_[id].value.size() != 1) {
    throw DimensionError("backward expects a scalar loss, got " + nodes_[id].value.shape_str());
  }
  nodes_[id].grad[0] = 1.0;
  for (std::size_t i = id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this);
  }
}

}  // namespace fusionlm
