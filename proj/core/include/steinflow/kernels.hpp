#pragma once

#include <variant>

#include "steinflow/types.hpp"

namespace steinflow {

/// Gaussian kernel k(x, y) = exp(-|x - y|^2 / bandwidth).
struct GaussianKernel {
  double bandwidth = 1.0;
};

/// Linear kernel k(x, y) = <x, y> + 1. The offset is fixed.
struct LinearKernel {};

class KernelSpec {
 public:
  using Family = std::variant<GaussianKernel, LinearKernel>;

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec linear();

  const Family& family() const noexcept { return family_; }
  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianKernel>(family_); }
  bool is_linear() const noexcept { return std::holds_alternative<LinearKernel>(family_); }
  /// Throws InvalidArgument for a linear kernel.
  double bandwidth() const;

  friend bool operator==(const KernelSpec& a, const KernelSpec& b);

 private:
  explicit KernelSpec(Family f) : family_(f) {}
  Family family_;
};

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Gradient of k(x, y) in its first argument. The gradient in the second
/// argument follows by swapping: grad_2 k(x, y) = kernel_grad1(spec, y, x).
Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Same as kernel_grad1 but reuses an already evaluated k(x, y).
Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y, double kxy);

/// Mixed second derivative d^2 k / dx_m dy_n as a d x d matrix.
Matrix kernel_grad12(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Dense symmetric N x N Gram matrix. Each unordered pair is evaluated
/// once and mirrored, so entry(i, j) and entry(j, i) are bitwise equal.
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(Matrix entries);

  Eigen::Index size() const noexcept { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  const Matrix& entries() const noexcept { return entries_; }
  /// Moves the storage out, leaving the Gram matrix empty.
  Matrix release() && { return std::move(entries_); }

 private:
  Matrix entries_;
};

/// Rows of `positions` are particles.
GramMatrix gram(const KernelSpec& spec, const Matrix& positions);

/// Median-heuristic bandwidth med^2 / ln N over the N(N-1)/2 pairwise
/// Euclidean distances (even count: mean of the two middle values).
double median_heuristic(const Matrix& positions);

}  // namespace steinflow
