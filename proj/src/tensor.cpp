#include "fusionlm/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "fusionlm/errors.hpp"
#include "fusionlm/threading.hpp"

namespace fusionlm {
namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
    n *= d;
  }
  return shape.empty() ? 0 : n;
}

void require_2d(const Tensor& t, const char* what) {
  if (t.ndim() != 2) {
    throw DimensionError(std::string(what) + ": expected 2-D tensor, got " + t.shape_str());
  }
}

// Rows below this many multiply-adds are not worth forking for.
constexpr std::size_t kParallelGrainFlops = 1 << 16;

std::size_t row_grain(std::size_t work_per_row) {
  return std::max<std::size_t>(1, kParallelGrainFlops / std::max<std::size_t>(1, work_per_row));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("tensor data length does not match shape " + shape_str());
  }
}

Tensor Tensor::vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  require_2d(a, "matmul lhs");
  require_2d(b, "matmul rhs");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k || c.rows() != m || c.cols() != n) {
    throw DimensionError("matmul shape mismatch: " + a.shape_str() + " x " + b.shape_str());
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  parallel_for(m, row_grain(k * n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double aik = pa[i * k + kk];
        if (aik == 0.0) continue;
        const double* brow = pb + kk * n;
        double* crow = pc + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
      }
    }
  });
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c) {
  require_2d(a, "matmul lhs");
  require_2d(b, "matmul rhs");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k || c.rows() != m || c.cols() != n) {
    throw DimensionError("matmul_nt shape mismatch: " + a.shape_str() + " x " + b.shape_str() +
                         "^T");
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  parallel_for(m, row_grain(k * n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* arow = pa + i * k;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double* brow = pb + j * k;
        double acc = 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
        crow[j] += acc;
      }
    }
  });
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c) {
  require_2d(a, "matmul lhs");
  require_2d(b, "matmul rhs");
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k || c.rows() != m || c.cols() != n) {
    throw DimensionError("matmul_tn shape mismatch: " + a.shape_str() + "^T x " + b.shape_str());
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  parallel_for(m, row_grain(k * n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* crow = pc + i * n;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double aki = pa[kk * m + i];
        if (aki == 0.0) continue;
        const double* brow = pb + kk * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
      }
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul lhs");
  require_2d(b, "matmul rhs");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + a.shape_str() + " x " + b.shape_str());
  }
  Tensor c({a.rows(), b.cols()});
  gemm_nn(a, b, c);
  return c;
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
  if (!x.same_shape(y)) {
    throw DimensionError("axpy shape mismatch: " + x.shape_str() + " vs " + y.shape_str());
  }
  const double* px = x.data();
  double* py = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) py[i] += alpha * px[i];
}

double sum(const Tensor& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
  return s;
}

double l2_norm(const Tensor& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

double rms(const Tensor& x) {
  if (x.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(x.size()));
}

Tensor row_sums(const Tensor& x) {
  require_2d(x, "row_sums");
  Tensor out({x.rows()});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j);
    out[i] = s;
  }
  return out;
}

Tensor col_sums(const Tensor& x) {
  require_2d(x, "col_sums");
  Tensor out({x.cols()});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x(i, j);
  }
  return out;
}

std::vector<double> softmax_row(const double* logits, std::size_t n) {
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  std::vector<double> p(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (std::size_t i = 0; i < n; ++i) p[i] /= z;
  return p;
}

}  // namespace fusionlm
