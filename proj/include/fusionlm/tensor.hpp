#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fusionlm {

// Dense row-major tensor of 64-bit floats. Values are plain data; all
// differentiable structure lives on the Tape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vec(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-D accessors; rows()/cols() also treat a 1-D tensor as a single row,
  // which is what every broadcasting call site wants.
  std::size_t rows() const { return ndim() == 1 ? 1 : shape_.at(0); }
  std::size_t cols() const { return ndim() == 1 ? shape_.at(0) : shape_.at(1); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;  // e.g. "[2x3]"

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// C += A * B, [m x k] * [k x n]. Throws DimensionError naming both shapes.
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c);
// C += A * B^T, [m x k] * [n x k]^T.
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c);
// C += A^T * B, [k x m]^T * [k x n].
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c);

Tensor matmul(const Tensor& a, const Tensor& b);

// y += alpha * x (shapes must match).
void axpy(double alpha, const Tensor& x, Tensor& y);

double sum(const Tensor& x);
double l2_norm(const Tensor& x);
double rms(const Tensor& x);

Tensor row_sums(const Tensor& x);  // [m x n] -> [m]
Tensor col_sums(const Tensor& x);  // [m x n] -> [n]

// Stable softmax over one row of logits.
std::vector<double> softmax_row(const double* logits, std::size_t n);

}  // namespace fusionlm
