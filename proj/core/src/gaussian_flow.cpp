#include "steinflow/gaussian_flow.hpp"

#include <cmath>
#include <string>

#include "steinflow/diagnostics.hpp"
#include "steinflow/errors.hpp"
#include "steinflow/linalg.hpp"

namespace steinflow {

namespace {

Matrix inverse_spd(const Matrix& a) {
  return solve_spd(SymMatrix(a), Matrix::Identity(a.rows(), a.cols()));
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_spd(const Matrix& a) {
  try {
    cholesky(SymMatrix(a));
    return true;
  } catch (const Error&) {
    return false;
  }
}

void check_nu(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
}

// ((1 - nu) S + nu I)^{-1}
Matrix preconditioner(const Matrix& s, double nu) {
  Matrix m = (1.0 - nu) * s;
  m.diagonal().array() += nu;
  return inverse_spd(symmetrized(m));
}

}  // namespace

MatrixFlowState MatrixFlowState::make(Matrix s, Matrix q) {
  if (s.rows() != s.cols() || q.rows() != q.cols() || s.rows() != q.rows()) {
    throw DimensionMismatch("covariances must be square and of equal size");
  }
  cholesky(SymMatrix(s));
  cholesky(SymMatrix(q));
  return MatrixFlowState{std::move(s), std::move(q), 0};
}

MatrixFlowState discrete_step(const MatrixFlowState& state, double nu, double h) {
  check_nu(nu);
  if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
  const Matrix& s = state.s;
  const Matrix a = preconditioner(s, nu);
  const Matrix m = inverse_spd(s) - inverse_spd(state.q);
  const Matrix s2 = s * s;
  const Matrix am = a * m;

  Matrix next = s + h * am * s2 + h * s * am * s + h * h * am * s2 * s * m * a;
  next = symmetrized(next);
  if (!next.allFinite() || !is_spd(next)) {
    throw StepTooLarge("covariance update lost positive definiteness at step " +
                       std::to_string(state.step + 1));
  }
  return MatrixFlowState{std::move(next), state.q, state.step + 1};
}

Matrix continuous_rhs(const Matrix& sigma, const Matrix& q, double nu) {
  check_nu(nu);
  const Matrix a = preconditioner(sigma, nu);
  const Matrix q_inv = inverse_spd(q);
  const Matrix as2 = a * sigma * sigma;
  return 2.0 * a * sigma - as2 * q_inv - q_inv * as2;
}

std::vector<MatrixFlowState> rk4_integrate(const MatrixFlowState& state, double nu, double dt,
                                           std::size_t steps) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  std::vector<MatrixFlowState> out;
  out.reserve(steps + 1);
  out.push_back(state);
  Matrix sigma = state.s;
  for (std::size_t n = 0; n < steps; ++n) {
    try {
      const Matrix k1 = continuous_rhs(sigma, state.q, nu);
      const Matrix k2 = continuous_rhs(symmetrized(sigma + 0.5 * dt * k1), state.q, nu);
      const Matrix k3 = continuous_rhs(symmetrized(sigma + 0.5 * dt * k2), state.q, nu);
      const Matrix k4 = continuous_rhs(symmetrized(sigma + dt * k3), state.q, nu);
      sigma = symmetrized(sigma + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    } catch (const NotSpd&) {
      throw StepTooLarge("RK4 stage lost positive definiteness at step " + std::to_string(n + 1));
    }
    if (!sigma.allFinite() || !is_spd(sigma)) {
      throw StepTooLarge("RK4 step lost positive definiteness at step " + std::to_string(n + 1));
    }
    out.push_back(MatrixFlowState{sigma, state.q, state.step + n + 1});
  }
  return out;
}

FlowSchedule schedule_params(const MatrixFlowState& state, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("delta must lie in (0, 1/2)");
  const Matrix m = inverse_spd(state.q) - inverse_spd(state.s);
  const double m_norm2 = m.squaredNorm();
  if (m_norm2 == 0.0) throw DegenerateSchedule("covariance equals the target; nu is undefined");
  const double ratio = gaussian_fisher(state.s, state.q) / (2.0 * m_norm2);
  if (!std::isfinite(ratio) || !(ratio > 0.0)) throw DegenerateSchedule("nu ratio is not positive and finite");
  FlowSchedule out;
  out.nu = ratio / (1.0 + ratio);
  const double sigma_min = sym_eigen(SymMatrix(state.s)).values(0);
  out.h = delta * ((1.0 - out.nu) * sigma_min + out.nu);
  return out;
}

DecayBoundResult kl_decay_bound_check(std::span<const MatrixFlowState> trajectory,
                                      std::span<const FlowSchedule> schedule, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("log-Sobolev constant must be positive");
  if (trajectory.empty()) return {};
  if (schedule.size() + 1 < trajectory.size()) {
    throw DimensionMismatch("schedule history is shorter than the trajectory");
  }
  DecayBoundResult r;
  const double kl0 = gaussian_kl(trajectory[0].s, trajectory[0].q);
  double product = 1.0;
  r.kl.push_back(kl0);
  r.bound.push_back(kl0);
  for (std::size_t n = 1; n < trajectory.size(); ++n) {
    const FlowSchedule& step = schedule[n - 1];
    const double factor = 1.0 - 0.5 * lambda * step.h / (1.0 - step.nu);
    if (!(factor > 0.0)) {
      throw ScheduleInvalid("bound factor at step " + std::to_string(n) + " is not positive");
    }
    product *= factor;
    const double kl = gaussian_kl(trajectory[n].s, trajectory[n].q);
    const double bound = kl0 * product;
    r.kl.push_back(kl);
    r.bound.push_back(bound);
    if (r.holds && kl > bound + 1e-9) {
      r.holds = false;
      r.first_violation = n;
    }
  }
  return r;
}

}  // namespace steinflow
