#include "steinflow/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "steinflow/errors.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/rng.hpp"

namespace steinflow {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double log_normal_kernel(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * z * z / var - 0.5 * std::log(var);
}

}  // namespace

GaussianTarget::GaussianTarget(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw DimensionMismatch("gaussian covariance shape does not match mean");
  }
  const SymMatrix q(cov_);
  precision_ = solve_spd(q, Matrix::Identity(cov_.rows(), cov_.cols()));
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
}

Mixture1dTarget::Mixture1dTarget(std::vector<double> weights, std::vector<double> means,
                                 std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty() || weights_.size() != means_.size() || weights_.size() != variances_.size()) {
    throw DimensionMismatch("mixture weights, means and variances must have equal nonzero length");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mixture weights must sum to 1");
  for (double v : variances_) {
    if (!(v > 0.0)) throw InvalidArgument("mixture variances must be positive");
  }
}

ScoreModel::ScoreModel(CustomTarget c) : model_(std::move(c)) {
  const auto& t = std::get<CustomTarget>(model_);
  if (!t.log_density) throw InvalidArgument("custom target needs a log density");
  if (t.dim < 1) throw InvalidArgument("custom target dimension must be positive");
}

ScoreModel ScoreModel::standard_gaussian(Eigen::Index dim) {
  return GaussianTarget(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

ScoreModel ScoreModel::bimodal_mixture() {
  return Mixture1dTarget({1.0 / 3.0, 2.0 / 3.0}, {-2.0, 2.0}, {1.0, 1.0});
}

Eigen::Index ScoreModel::dim() const noexcept {
  return std::visit(Overloaded{
                        [](const GaussianTarget& g) { return g.dim(); },
                        [](const Mixture1dTarget&) { return Eigen::Index{1}; },
                        [](const CustomTarget& c) { return c.dim; },
                    },
                    model_);
}

double ScoreModel::log_density(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("point dimension does not match target");
  return std::visit(
      Overloaded{
          [&](const GaussianTarget& g) {
            const Vector z = x - g.mean();
            return -0.5 * z.dot(g.precision() * z);
          },
          [&](const Mixture1dTarget& m) {
            double peak = -std::numeric_limits<double>::infinity();
            std::vector<double> terms(m.weights().size());
            for (std::size_t j = 0; j < terms.size(); ++j) {
              terms[j] = std::log(m.weights()[j]) + log_normal_kernel(x(0), m.means()[j], m.variances()[j]);
              peak = std::max(peak, terms[j]);
            }
            double s = 0.0;
            for (double t : terms) s += std::exp(t - peak);
            return peak + std::log(s);
          },
          [&](const CustomTarget& c) { return c.log_density(x); },
      },
      model_);
}

Vector grad_potential(const ScoreModel& model, const Vector& x) {
  if (x.size() != model.dim()) throw DimensionMismatch("point dimension does not match target");
  return std::visit(
      Overloaded{
          [&](const GaussianTarget& g) -> Vector { return g.precision() * (x - g.mean()); },
          [&](const Mixture1dTarget& m) -> Vector {
            // Responsibility-weighted component scores, with log-sum-exp weights.
            const std::size_t k = m.weights().size();
            std::vector<double> logr(k);
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
              logr[j] = std::log(m.weights()[j]) + log_normal_kernel(x(0), m.means()[j], m.variances()[j]);
              peak = std::max(peak, logr[j]);
            }
            double norm = 0.0;
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
              const double r = std::exp(logr[j] - peak);
              norm += r;
              acc += r * (x(0) - m.means()[j]) / m.variances()[j];
            }
            Vector out(1);
            out(0) = acc / norm;
            return out;
          },
          [&](const CustomTarget& c) -> Vector {
            if (c.grad_log_density) return -c.grad_log_density(x);
            Vector g(x.size());
            Vector probe = x;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
              probe(i) = x(i) + h;
              const double up = c.log_density(probe);
              probe(i) = x(i) - h;
              const double down = c.log_density(probe);
              probe(i) = x(i);
              if (!std::isfinite(up) || !std::isfinite(down)) {
                throw EvaluationError("log density is not finite near the evaluation point");
              }
              g(i) = -(up - down) / (2.0 * h);
            }
            return g;
          },
      },
      model.variant());
}

Matrix grad_potential_rows(const ScoreModel& model, const Matrix& positions) {
  Matrix out(positions.rows(), positions.cols());
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    out.row(i) = grad_potential(model, positions.row(i).transpose()).transpose();
  }
  return out;
}

double test_function(TestFunction fn, const CosineParams& params, double x) {
  switch (fn) {
    case TestFunction::kIdentity:
      return x;
    case TestFunction::kSquare:
      return x * x;
    case TestFunction::kCosine:
      return std::cos(params.omega * x + params.phase);
  }
  return 0.0;
}

double true_moments(const ScoreModel& model, TestFunction fn, const CosineParams& params) {
  // For a normal component N(mu, s2): E[x] = mu, E[x^2] = s2 + mu^2,
  // E[cos(w x + b)] = cos(w mu + b) exp(-w^2 s2 / 2).
  auto component = [&](double mu, double s2) {
    switch (fn) {
      case TestFunction::kIdentity:
        return mu;
      case TestFunction::kSquare:
        return s2 + mu * mu;
      case TestFunction::kCosine:
        return std::cos(params.omega * mu + params.phase) *
               std::exp(-0.5 * params.omega * params.omega * s2);
    }
    return 0.0;
  };
  return std::visit(Overloaded{
                        [&](const GaussianTarget& g) { return component(g.mean()(0), g.covariance()(0, 0)); },
                        [&](const Mixture1dTarget& m) {
                          double s = 0.0;
                          for (std::size_t j = 0; j < m.weights().size(); ++j) {
                            s += m.weights()[j] * component(m.means()[j], m.variances()[j]);
                          }
                          return s;
                        },
                        [&](const CustomTarget&) -> double {
                          throw Unsupported("true moments are not available for custom targets");
                        },
                    },
                    model.variant());
}

Matrix sample_init(const InitSpec& spec, Eigen::Index n) {
  Rng rng(spec.seed);
  return sample_init(spec, n, rng);
}

Matrix sample_init(const InitSpec& spec, Eigen::Index n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_init needs n >= 1");
  if (spec.mean.size() != spec.stddev.size()) {
    throw DimensionMismatch("init mean and stddev must have equal length");
  }
  for (Eigen::Index k = 0; k < spec.stddev.size(); ++k) {
    if (!(spec.stddev(k) > 0.0)) throw InvalidArgument("init stddev must be positive");
  }
  Matrix x(n, spec.mean.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = rng.normal(spec.mean(k), spec.stddev(k));
  }
  return x;
}

}  // namespace steinflow
