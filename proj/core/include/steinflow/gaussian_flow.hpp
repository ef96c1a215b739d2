#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "steinflow/types.hpp"

namespace steinflow {

// Closed-form dynamics for a Gaussian target N(0, q) under the linear
// kernel <x, y> + 1: a Gaussian ensemble N(0, s) stays Gaussian and only
// its covariance evolves.

struct MatrixFlowState {
  Matrix s;  // current covariance
  Matrix q;  // target covariance
  std::size_t step = 0;

  /// Validates that s and q are symmetric positive definite.
  static MatrixFlowState make(Matrix s, Matrix q);
};

/// One step of the time-discretized regularized flow:
///
///   S' = S + h A M S^2 + h S A M S + h^2 A M S^3 M A,
///   A = ((1 - nu) S + nu I)^{-1},  M = S^{-1} - Q^{-1},
///
/// followed by symmetrization. Throws StepTooLarge if S' is not SPD.
MatrixFlowState discrete_step(const MatrixFlowState& state, double nu, double h);

/// dSigma/dt = 2 A Sigma - A Sigma^2 Q^{-1} - Q^{-1} A Sigma^2, A = ((1 - nu) Sigma + nu I)^{-1}.
Matrix continuous_rhs(const Matrix& sigma, const Matrix& q, double nu);

/// Classical RK4 on continuous_rhs. Returns steps + 1 states.
std::vector<MatrixFlowState> rk4_integrate(const MatrixFlowState& state, double nu, double dt,
                                           std::size_t steps);

struct FlowSchedule {
  double nu = 0.5;
  double h = 0.0;
};

/// Adaptive (nu, h) for the step leaving `state`:
///   nu / (1 - nu) = I(S) / (2 |Q^{-1} - S^{-1}|_F^2),
///   h = delta * min_k ((1 - nu) sigma_k + nu),  sigma_k eigenvalues of S.
/// Throws DegenerateSchedule when S == Q.
FlowSchedule schedule_params(const MatrixFlowState& state, double delta);

struct DecayBoundResult {
  bool holds = true;
  std::optional<std::size_t> first_violation;
  std::vector<double> kl;     // KL(S_n | Q)
  std::vector<double> bound;  // KL(S_0 | Q) prod_{i<=n} (1 - lambda h_i / (2 (1 - nu_i)))
};

/// Compares KL(S_n | Q) with the log-Sobolev product bound for every
/// recorded n, allowing 1e-9 absolute slack. `schedule[i]` is the (nu, h)
/// that produced trajectory[i + 1]. Throws ScheduleInvalid if a product
/// factor is not positive.
DecayBoundResult kl_decay_bound_check(std::span<const MatrixFlowState> trajectory,
                                      std::span<const FlowSchedule> schedule, double lambda);

}  // namespace steinflow
