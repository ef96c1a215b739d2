#pragma once

#include <map>
#include <span>
#include <vector>

#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/targets.hpp"
#include "steinflow/types.hpp"

namespace steinflow {

/// Squared kernel Stein discrepancy of the empirical measure, as the
/// V-statistic (1/N^2) sum_{i,j} u_pi(x_i, x_j) including i == j.
double ksd_vstat(const Matrix& positions, const KernelSpec& kernel, const ScoreModel& target);

/// Regularized Stein-Fisher information of the empirical measure,
///
///   <beta, ((1 - nu) i*i + nu I)^{-1} beta>,  beta = i* grad log(rho/pi),
///
/// evaluated through the N x N system instead of the RKHS operator:
///
///   (1/nu) * (ksd - (1 - nu) * (1/N) * sum_d v_d . g_d),
///   g = ((1 - nu)/N K + nu I)^{-1} v,
///
/// where v is the drift (the values of beta at the particles). This follows
/// from ((1-nu) i*i + nu I)^{-1} = (1/nu)(I - (1-nu) i* ((1-nu) i i* + nu I)^{-1} i).
/// Equals ksd_vstat exactly at nu == 1.
double reg_ksd(const Matrix& positions, const KernelSpec& kernel, const ScoreModel& target,
               double nu, const SolveConfig& cfg = {});

/// Eigenvalues (descending, positive) of the kernel integral operator
/// paired with coefficients of grad log(rho/pi) in its eigenbasis.
class SpectralModel {
 public:
  SpectralModel(std::vector<double> eigenvalues, std::vector<double> coefficients);

  const std::vector<double>& eigenvalues() const noexcept { return lambda_; }
  const std::vector<double>& coefficients() const noexcept { return coeff_; }

 private:
  std::vector<double> lambda_;
  std::vector<double> coeff_;
};

/// sum c_i^2
double spectral_fisher(const SpectralModel& m);
/// sum lambda_i c_i^2
double spectral_stein(const SpectralModel& m);
/// sum lambda_i / ((1 - nu) lambda_i + nu) c_i^2
double spectral_reg_stein(const SpectralModel& m, double nu);

enum class SandwichVerdict { kHolds, kConditionViolated, kFails };

struct SandwichResult {
  SandwichVerdict verdict = SandwichVerdict::kConditionViolated;
  double fisher = 0.0;
  double reg_stein = 0.0;
  double source_norm2 = 0.0;  // sum lambda_i^{-2 gamma} c_i^2
  double nu_ratio_bound = 0.0;  // (I / (2 |J|^2))^{1/(2 gamma)}
};

/// Checks 0.5 (1-nu)^{-1} I <= I_nu <= (1-nu)^{-1} I whenever
/// nu / (1 - nu) <= (I / (2 |J|^2))^{1/(2 gamma)}, with 1e-12 relative slack.
SandwichResult sandwich_check(const SpectralModel& m, double gamma, double nu);

/// KL(N(0, s) | N(0, q)).
double gaussian_kl(const Matrix& s, const Matrix& q);

/// Fisher information trace(s M^T M), M = q^{-1} - s^{-1}.
double gaussian_fisher(const Matrix& s, const Matrix& q);

/// Sets values in [-1e-8 * max(1, scale), 0) to zero; other values pass through.
double clamp_roundoff(double value, double scale);

struct DiagReport {
  double ksd2 = 0.0;
  double reg_ksd2 = 0.0;
  std::map<TestFunction, double> mse;
};

/// Squared error of the ensemble average of each test function against
/// its exact expectation, averaged over replicates. `cosine` holds the
/// (omega, b) draw of each replicate.
std::map<TestFunction, double> mse_report(std::span<const Matrix> ensembles, const ScoreModel& target,
                                          std::span<const CosineParams> cosine);

/// KSD, regularized KSD and single-replicate squared errors for one ensemble.
DiagReport diagnose(const Matrix& positions, const KernelSpec& kernel, const ScoreModel& target,
                    double nu, const SolveConfig& cfg, const CosineParams& cosine);

}  // namespace steinflow
