#pragma once

#include <variant>

#include "steinflow/kernels.hpp"
#include "steinflow/types.hpp"

namespace steinflow {

/// Dense symmetric matrix. Construction from a general matrix requires
/// exact symmetry; a GramMatrix is symmetric by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix entries);
  explicit SymMatrix(GramMatrix&& g) : a_(std::move(g).release()) {}

  static SymMatrix identity(Eigen::Index n) { return SymMatrix(Matrix(Matrix::Identity(n, n))); }

  Eigen::Index size() const noexcept { return a_.rows(); }
  const Matrix& matrix() const noexcept { return a_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

  /// In-place a <- scale * a + shift * I. Keeps symmetry.
  SymMatrix& scale_and_shift(double scale, double shift);

 private:
  Matrix a_;
};

struct CholeskyMethod {
  friend bool operator==(const CholeskyMethod&, const CholeskyMethod&) = default;
};

struct CgMethod {
  double tol = 1e-10;
  int max_iter = 1000;
  bool jacobi_precondition = true;

  friend bool operator==(const CgMethod&, const CgMethod&) = default;
};

struct SolveConfig {
  std::variant<CholeskyMethod, CgMethod> method = CholeskyMethod{};

  static SolveConfig cholesky() { return {}; }
  static SolveConfig cg(double tol, int max_iter, bool jacobi_precondition = true);

  friend bool operator==(const SolveConfig&, const SolveConfig&) = default;
};

/// Lower-triangular L with L L^T = a. Throws NotSpd with the failing
/// pivot index when a pivot is not strictly positive.
Matrix cholesky(const SymMatrix& a);

/// Solves L L^T X = B given the lower factor.
Matrix cholesky_solve(const Matrix& lower, const Matrix& b);

/// Solves a X = B for SPD a; B may have several columns, which share one
/// factorization (Cholesky) or are solved independently (CG).
Matrix solve_spd(const SymMatrix& a, const Matrix& b, const SolveConfig& cfg = {});

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values(k)
};

inline constexpr Eigen::Index kDefaultEigenCap = 2000;

/// Row-cyclic Jacobi rotations until the off-diagonal Frobenius norm is at
/// most 1e-12 * |a|_F. Throws CapExceeded when size() > cap.
SymEigen sym_eigen(const SymMatrix& a, Eigen::Index cap = kDefaultEigenCap);

}  // namespace steinflow
