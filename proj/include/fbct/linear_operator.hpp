#pragma once

#include <cstddef>
#include <vector>

namespace fbct {

/// Matrix-free linear map R^n -> R^m used by the FISTA solver and the
/// randomize-then-optimize sampler.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int rows() const = 0;  // m
  virtual int cols() const = 0;  // n
  virtual void apply(const double* x, double* y) const = 0;          // y = A x
  virtual void apply_adjoint(const double* y, double* x) const = 0;  // x = A^T y
};

/// Explicit row-major matrix; used where the operator is small enough to
/// materialize (test oracles, tiny sampling studies).
class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(int m, int n, std::vector<double> row_major)
      : m_(m), n_(n), a_(std::move(row_major)) {}

  int rows() const override { return m_; }
  int cols() const override { return n_; }

  void apply(const double* x, double* y) const override {
    for (int i = 0; i < m_; ++i) {
      const double* row = a_.data() + static_cast<size_t>(i) * n_;
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  void apply_adjoint(const double* y, double* x) const override {
    for (int j = 0; j < n_; ++j) x[j] = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double* row = a_.data() + static_cast<size_t>(i) * n_;
      const double yi = y[i];
      for (int j = 0; j < n_; ++j) x[j] += row[j] * yi;
    }
  }

  const std::vector<double>& data() const { return a_; }

 private:
  int m_, n_;
  std::vector<double> a_;
};

}  // namespace fbct
