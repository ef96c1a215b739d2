#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "steinflow/types.hpp"

namespace steinflow {

/// N(mean, covariance). The inverse covariance is cached at construction.
class GaussianTarget {
 public:
  GaussianTarget(Vector mean, Matrix covariance);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return cov_; }
  const Matrix& precision() const noexcept { return precision_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix precision_;
};

/// One-dimensional mixture sum_j w_j N(mu_j, s_j^2).
class Mixture1dTarget {
 public:
  Mixture1dTarget(std::vector<double> weights, std::vector<double> means,
                  std::vector<double> variances);

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& variances() const noexcept { return variances_; }

 private:
  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> variances_;
};

/// Target given by an unnormalized log density. Without a gradient
/// callback the score is taken by central differences.
struct CustomTarget {
  Eigen::Index dim = 1;
  std::function<double(const Vector&)> log_density;
  std::function<Vector(const Vector&)> grad_log_density;  // optional
};

class ScoreModel {
 public:
  using Variant = std::variant<GaussianTarget, Mixture1dTarget, CustomTarget>;

  ScoreModel(GaussianTarget g) : model_(std::move(g)) {}     // NOLINT(google-explicit-constructor)
  ScoreModel(Mixture1dTarget m) : model_(std::move(m)) {}    // NOLINT(google-explicit-constructor)
  ScoreModel(CustomTarget c);                                 // NOLINT(google-explicit-constructor)

  static ScoreModel standard_gaussian(Eigen::Index dim);
  /// (1/3) N(-2, 1) + (2/3) N(2, 1).
  static ScoreModel bimodal_mixture();

  const Variant& variant() const noexcept { return model_; }
  Eigen::Index dim() const noexcept;
  /// Unnormalized log density.
  double log_density(const Vector& x) const;

 private:
  Variant model_;
};

/// grad V(x) = -grad log pi(x).
Vector grad_potential(const ScoreModel& model, const Vector& x);

/// Rows of the result are grad V at each row of `positions`.
Matrix grad_potential_rows(const ScoreModel& model, const Matrix& positions);

enum class TestFunction { kIdentity, kSquare, kCosine };

/// Parameters of the random test function cos(omega * x + b).
struct CosineParams {
  double omega = 0.0;
  double phase = 0.0;

  friend bool operator==(const CosineParams&, const CosineParams&) = default;
};

/// Evaluates h on the first coordinate of x.
double test_function(TestFunction fn, const CosineParams& params, double x);

/// Exact E_pi[h(x_0)] for Gaussian and 1-D mixture targets. Throws
/// Unsupported for custom targets.
double true_moments(const ScoreModel& model, TestFunction fn, const CosineParams& params = {});

struct InitSpec {
  Vector mean;
  Vector stddev;
  std::uint64_t seed = 0;
};

/// n independent draws from N(mean, diag(stddev^2)), one row per draw.
Matrix sample_init(const InitSpec& spec, Eigen::Index n);

class Rng;
/// As above but drawing from a caller-owned generator.
Matrix sample_init(const InitSpec& spec, Eigen::Index n, Rng& rng);

}  // namespace steinflow
