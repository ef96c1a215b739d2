#include "steinflow/sampler.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "steinflow/errors.hpp"

namespace steinflow {

namespace {

void check_nu(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1], got " + std::to_string(nu));
}

// x <- x - rate .* direction, with the rate fixed or Adagrad-scaled.
EnsembleState apply_step(const EnsembleState& state, const Matrix& direction, const StepSchedule& step) {
  EnsembleState next;
  next.iteration = state.iteration + 1;
  if (const auto* c = std::get_if<ConstantStep>(&step.kind)) {
    next.positions = state.positions - c->h * direction;
    next.adagrad_accum = state.adagrad_accum;
    return next;
  }
  const auto& ada = std::get<AdagradStep>(step.kind);
  next.adagrad_accum = state.adagrad_accum + direction.cwiseAbs2();
  const Matrix rate = ada.base / (ada.fudge + next.adagrad_accum.array().sqrt());
  next.positions = state.positions - rate.cwiseProduct(direction);
  return next;
}

}  // namespace

EnsembleState EnsembleState::from_positions(Matrix positions) {
  EnsembleState s;
  s.adagrad_accum = Matrix::Zero(positions.rows(), positions.cols());
  s.positions = std::move(positions);
  return s;
}

StepSchedule StepSchedule::constant(double h) {
  if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
  return StepSchedule{ConstantStep{h}};
}

StepSchedule StepSchedule::adagrad(double base, double fudge) {
  if (!(base > 0.0)) throw InvalidArgument("adagrad base rate must be positive");
  if (!(fudge > 0.0)) throw InvalidArgument("adagrad fudge must be positive");
  return StepSchedule{AdagradStep{base, fudge}};
}

NuSchedule NuSchedule::constant(double nu) {
  check_nu(nu);
  NuSchedule s;
  s.values_ = {nu};
  return s;
}

NuSchedule NuSchedule::sequence(std::vector<double> nus) {
  for (double nu : nus) check_nu(nu);
  NuSchedule s;
  s.constant_ = false;
  s.values_ = std::move(nus);
  return s;
}

double NuSchedule::at(std::size_t step) const {
  if (constant_) return values_.front();
  if (step >= values_.size()) {
    throw ScheduleExhausted("nu sequence has " + std::to_string(values_.size()) +
                            " entries, step " + std::to_string(step + 1) + " requested");
  }
  return values_[step];
}

KernelSpec resolve_kernel(const KernelSpec& kernel, const BandwidthPolicy& policy, const Matrix& positions) {
  if (kernel.is_linear() || std::holds_alternative<FixedBandwidth>(policy)) return kernel;
  return KernelSpec::gaussian(median_heuristic(positions));
}

Matrix drift(const EnsembleState& state, const KernelSpec& kernel, const ScoreModel& target) {
  return drift(state.positions, gram(kernel, state.positions), kernel, target);
}

Matrix drift(const Matrix& x, const GramMatrix& gram_k, const KernelSpec& kernel, const ScoreModel& target) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw InsufficientParticles("drift needs at least one particle");
  if (gram_k.size() != n) throw DimensionMismatch("Gram matrix does not match ensemble");
  const Matrix& k = gram_k.entries();
  const Matrix scores = grad_potential_rows(target, x);
  Matrix v = k * scores;
  if (kernel.is_gaussian()) {
    // -grad_1 k(x_j, x_i) = (2 / bw) k_ij (x_j - x_i)
    const Vector row_sums = k.rowwise().sum();
    Matrix repulse = k * x;
    repulse -= row_sums.asDiagonal() * x;
    v += (2.0 / kernel.bandwidth()) * repulse;
  } else {
    // grad_1 k(x_j, x_i) = x_i for every j.
    v -= static_cast<double>(n) * x;
  }
  v /= static_cast<double>(n);
  return v;
}

Matrix regularized_direction(const Matrix& x, const KernelSpec& kernel, const ScoreModel& target,
                             double nu, const SolveConfig& cfg) {
  check_nu(nu);
  GramMatrix k = gram(kernel, x);
  Matrix v = drift(x, k, kernel, target);
  if (nu == 1.0) return v;
  const double n = static_cast<double>(x.rows());
  SymMatrix system(std::move(k));
  system.scale_and_shift((1.0 - nu) / n, nu);
  return solve_spd(system, v, cfg);
}

EnsembleState rsvgd_step(const EnsembleState& state, const KernelSpec& kernel, const ScoreModel& target,
                         double nu, double h, const SolveConfig& cfg) {
  return rsvgd_step(state, kernel, target, nu, StepSchedule::constant(h), cfg);
}

EnsembleState rsvgd_step(const EnsembleState& state, const KernelSpec& kernel, const ScoreModel& target,
                         double nu, const StepSchedule& step, const SolveConfig& cfg) {
  return apply_step(state, regularized_direction(state.positions, kernel, target, nu, cfg), step);
}

EnsembleState svgd_step(const EnsembleState& state, const KernelSpec& kernel, const ScoreModel& target,
                        const StepSchedule& step) {
  return apply_step(state, drift(state, kernel, target), step);
}

Trajectory run(const EnsembleState& init, const KernelSpec& kernel, const ScoreModel& target,
               const RunOptions& options, const SnapshotObserver& observer) {
  if (options.stride < 1) throw InvalidArgument("record stride must be at least 1");
  if (!options.nu.is_constant() && options.nu.values().size() < options.iterations) {
    throw ScheduleExhausted("nu sequence is shorter than the iteration count");
  }
  using Clock = std::chrono::steady_clock;

  Trajectory traj;
  traj.step_ms.reserve(options.iterations);
  const KernelSpec initial = resolve_kernel(kernel, options.bandwidth, init.positions);
  auto kernel_for = [&](const Matrix& positions) {
    if (std::holds_alternative<MedianPerIteration>(options.bandwidth)) {
      return resolve_kernel(kernel, options.bandwidth, positions);
    }
    return initial;
  };
  auto record = [&](const EnsembleState& s, const KernelSpec& k, double ms) {
    Snapshot snap{s, k, ms};
    if (observer) observer(snap);
    if (options.keep_snapshots) traj.snapshots.push_back(std::move(snap));
  };

  EnsembleState state = init;
  KernelSpec current = initial;
  record(state, current, 0.0);
  for (std::size_t n = 0; n < options.iterations; ++n) {
    const double nu = options.nu.at(n);
    const auto t0 = Clock::now();
    state = rsvgd_step(state, current, target, nu, options.step, options.solver);
    const auto t1 = Clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    traj.step_ms.push_back(ms);
    const bool last = n + 1 == options.iterations;
    const bool recorded = (n + 1) % options.stride == 0 || last;
    // The next kernel is needed either for the next step or for the snapshot.
    if (!last || recorded) current = kernel_for(state.positions);
    if (recorded) record(state, current, ms);
  }
  return traj;
}

}  // namespace steinflow
