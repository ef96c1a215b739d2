#pragma once

// Reference implementations used only by tests. They are written from the
// defining formulas with plain loops, independently of the library's
// vectorized code paths.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/targets.hpp"
#include "steinflow/types.hpp"

namespace steinflow::testing {

/// Central differences of a scalar function, step h per coordinate.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5);

/// Relative Frobenius error |a - b| / max(|b|, tiny).
double rel_err(const Matrix& a, const Matrix& b);
double rel_err(double a, double b);

/// Drift by a double loop over particle pairs with the kernel gradients
/// written out by hand.
Matrix brute_force_drift(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target);

/// Stein kernel u_pi(x, y) from the generic formula
///   gV(x).gV(y) k - gV(x).grad_2 k - gV(y).grad_1 k + tr(grad_1 grad_2 k).
double stein_kernel(const KernelSpec& kernel, const ScoreModel& target, const Vector& x, const Vector& y);

/// (1/N^2) sum over all pairs of stein_kernel.
double brute_force_ksd(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target);

/// Regularized Stein-Fisher information of the empirical measure computed
/// in the finite-dimensional subspace spanned by k(x_i, .) and the partial
/// derivatives d/du_l k(u, .)|_{u = x_j}. The operator and the vector beta
/// are represented exactly in that basis, so no identity from the library
/// is used.
double augmented_gram_reg_ksd(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target, double nu);

/// One step of the scalar commuting recursion
///   s'/q = (1 + h ((1 - nu) s + nu)^{-1} (1 - s/q))^2 s/q.
double scalar_recursion(double s, double q, double nu, double h);

/// Seeded generator for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double log_uniform(double lo, double hi);
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0);
  /// Random SPD matrix with eigenvalues log-uniform in [lo, hi].
  Matrix spd(Eigen::Index n, double lo, double hi);
  /// Random target: Gaussian of dimension d, or the 1-D mixture when d == 1
  /// and the coin says so.
  ScoreModel target(Eigen::Index d);
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace steinflow::testing
