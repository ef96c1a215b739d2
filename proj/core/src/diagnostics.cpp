#include "steinflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "steinflow/errors.hpp"
#include "steinflow/sampler.hpp"

namespace steinflow {

namespace {

double log_det_spd(const Matrix& a) {
  const Matrix l = cholesky(SymMatrix(a));
  return 2.0 * l.diagonal().array().log().sum();
}

Matrix spd_inverse(const Matrix& a) {
  return solve_spd(SymMatrix(a), Matrix::Identity(a.rows(), a.cols()));
}

void check_same_shape(const Matrix& s, const Matrix& q) {
  if (s.rows() != q.rows() || s.cols() != q.cols() || s.rows() != s.cols()) {
    throw DimensionMismatch("covariances must be square and of equal size");
  }
}

}  // namespace

double ksd_vstat(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 1) throw InsufficientParticles("KSD needs at least one particle");
  const Matrix g = grad_potential_rows(target, x);
  const GramMatrix gm = gram(kernel, x);
  const Matrix& k = gm.entries();

  // u(x_i, x_j) is symmetric; accumulate the upper triangle twice.
  double total = 0.0;
  if (kernel.is_gaussian()) {
    const double bw = kernel.bandwidth();
    const double trace_const = 2.0 * static_cast<double>(d) / bw;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row = 0.0;
      for (Eigen::Index j = i; j < n; ++j) {
        const auto diff = x.row(i) - x.row(j);
        const double u = k(i, j) * (g.row(i).dot(g.row(j)) - 2.0 / bw * g.row(i).dot(diff) +
                                    2.0 / bw * g.row(j).dot(diff) + trace_const -
                                    4.0 / (bw * bw) * diff.squaredNorm());
        row += (i == j) ? u : 2.0 * u;
      }
      total += row;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      double row = 0.0;
      for (Eigen::Index j = i; j < n; ++j) {
        const double u = k(i, j) * g.row(i).dot(g.row(j)) - g.row(i).dot(x.row(i)) -
                         g.row(j).dot(x.row(j)) + static_cast<double>(d);
        row += (i == j) ? u : 2.0 * u;
      }
      total += row;
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

double reg_ksd(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target, double nu,
               const SolveConfig& cfg) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
  const double ksd = ksd_vstat(x, kernel, target);
  if (nu == 1.0) return ksd;
  const double n = static_cast<double>(x.rows());
  GramMatrix k = gram(kernel, x);
  const Matrix v = drift(x, k, kernel, target);
  SymMatrix system(std::move(k));
  system.scale_and_shift((1.0 - nu) / n, nu);
  const Matrix g = solve_spd(system, v, cfg);
  const double correction = v.cwiseProduct(g).sum() / n;
  return (ksd - (1.0 - nu) * correction) / nu;
}

SpectralModel::SpectralModel(std::vector<double> eigenvalues, std::vector<double> coefficients)
    : lambda_(std::move(eigenvalues)), coeff_(std::move(coefficients)) {
  if (lambda_.size() != coeff_.size()) {
    throw DimensionMismatch("spectral model needs one coefficient per eigenvalue");
  }
  for (std::size_t i = 0; i < lambda_.size(); ++i) {
    if (!(lambda_[i] > 0.0) || !std::isfinite(lambda_[i])) {
      throw InvalidArgument("spectral eigenvalues must be positive and finite");
    }
    if (i > 0 && lambda_[i] > lambda_[i - 1]) {
      throw InvalidArgument("spectral eigenvalues must be in descending order");
    }
    if (!std::isfinite(coeff_[i])) throw InvalidArgument("spectral coefficients must be finite");
  }
}

double spectral_fisher(const SpectralModel& m) {
  double s = 0.0;
  for (double c : m.coefficients()) s += c * c;
  return s;
}

double spectral_stein(const SpectralModel& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.eigenvalues().size(); ++i) {
    s += m.eigenvalues()[i] * m.coefficients()[i] * m.coefficients()[i];
  }
  return s;
}

double spectral_reg_stein(const SpectralModel& m, double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
  double s = 0.0;
  for (std::size_t i = 0; i < m.eigenvalues().size(); ++i) {
    const double lam = m.eigenvalues()[i];
    const double c = m.coefficients()[i];
    s += lam / ((1.0 - nu) * lam + nu) * c * c;
  }
  return s;
}

SandwichResult sandwich_check(const SpectralModel& m, double gamma, double nu) {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw InvalidArgument("gamma must lie in (0, 1/2]");
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in (0, 1)");
  SandwichResult r;
  r.fisher = spectral_fisher(m);
  r.reg_stein = spectral_reg_stein(m, nu);
  for (std::size_t i = 0; i < m.eigenvalues().size(); ++i) {
    const double c = m.coefficients()[i];
    r.source_norm2 += std::pow(m.eigenvalues()[i], -2.0 * gamma) * c * c;
  }
  if (r.source_norm2 == 0.0) {
    // grad log(rho/pi) = 0: both sides vanish and any nu is admissible.
    r.nu_ratio_bound = std::numeric_limits<double>::infinity();
  } else {
    r.nu_ratio_bound = std::pow(r.fisher / (2.0 * r.source_norm2), 1.0 / (2.0 * gamma));
  }
  if (nu / (1.0 - nu) > r.nu_ratio_bound) {
    r.verdict = SandwichVerdict::kConditionViolated;
    return r;
  }
  const double upper = r.fisher / (1.0 - nu);
  const double lower = 0.5 * upper;
  const double slack = 1e-12 * std::max(upper, r.reg_stein);
  const bool ok = lower <= r.reg_stein + slack && r.reg_stein <= upper + slack;
  r.verdict = ok ? SandwichVerdict::kHolds : SandwichVerdict::kFails;
  return r;
}

double gaussian_kl(const Matrix& s, const Matrix& q) {
  check_same_shape(s, q);
  const double d = static_cast<double>(s.rows());
  const double trace = solve_spd(SymMatrix(q), s).trace();
  return 0.5 * (trace - d + log_det_spd(q) - log_det_spd(s));
}

double gaussian_fisher(const Matrix& s, const Matrix& q) {
  check_same_shape(s, q);
  const Matrix m = spd_inverse(q) - spd_inverse(s);
  return (s * m.transpose() * m).trace();
}

double clamp_roundoff(double value, double scale) {
  if (value < 0.0 && value >= -1e-8 * std::max(1.0, std::abs(scale))) return 0.0;
  return value;
}

std::map<TestFunction, double> mse_report(std::span<const Matrix> ensembles, const ScoreModel& target,
                                          std::span<const CosineParams> cosine) {
  if (ensembles.size() != cosine.size()) {
    throw DimensionMismatch("one cosine draw is needed per replicate");
  }
  if (ensembles.empty()) throw InvalidArgument("mse report needs at least one replicate");
  std::map<TestFunction, double> out;
  for (TestFunction fn : {TestFunction::kIdentity, TestFunction::kSquare, TestFunction::kCosine}) {
    double acc = 0.0;
    for (std::size_t r = 0; r < ensembles.size(); ++r) {
      const Matrix& x = ensembles[r];
      if (x.rows() < 1) throw InsufficientParticles("empty ensemble");
      double mean = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) mean += test_function(fn, cosine[r], x(i, 0));
      mean /= static_cast<double>(x.rows());
      const double err = mean - true_moments(target, fn, cosine[r]);
      acc += err * err;
    }
    out[fn] = acc / static_cast<double>(ensembles.size());
  }
  return out;
}

DiagReport diagnose(const Matrix& positions, const KernelSpec& kernel, const ScoreModel& target, double nu,
                    const SolveConfig& cfg, const CosineParams& cosine) {
  DiagReport r;
  const double ksd = ksd_vstat(positions, kernel, target);
  r.ksd2 = clamp_roundoff(ksd, 1.0);
  r.reg_ksd2 = clamp_roundoff(nu == 1.0 ? ksd : reg_ksd(positions, kernel, target, nu, cfg), ksd);
  r.mse = mse_report(std::span<const Matrix>(&positions, 1), target,
                     std::span<const CosineParams>(&cosine, 1));
  return r;
}

}  // namespace steinflow
