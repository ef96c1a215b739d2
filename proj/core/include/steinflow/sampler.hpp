#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/targets.hpp"
#include "steinflow/types.hpp"

namespace steinflow {

/// Particle positions (one row per particle) plus step bookkeeping.
struct EnsembleState {
  Matrix positions;
  std::size_t iteration = 0;
  Matrix adagrad_accum;  // same shape as positions, elementwise >= 0

  static EnsembleState from_positions(Matrix positions);
  Eigen::Index particles() const noexcept { return positions.rows(); }
  Eigen::Index dim() const noexcept { return positions.cols(); }
};

struct ConstantStep {
  double h = 0.1;
  friend bool operator==(const ConstantStep&, const ConstantStep&) = default;
};

/// Per-coordinate rate base / (fudge + sqrt(sum of squared directions)).
struct AdagradStep {
  double base = 0.1;
  double fudge = 1e-6;
  friend bool operator==(const AdagradStep&, const AdagradStep&) = default;
};

struct StepSchedule {
  std::variant<ConstantStep, AdagradStep> kind = AdagradStep{};

  static StepSchedule constant(double h);
  static StepSchedule adagrad(double base, double fudge = 1e-6);
  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

/// Regularization parameter per iteration. A sequence supplies nu_{n+1}
/// for the step leaving iterate n.
class NuSchedule {
 public:
  static NuSchedule constant(double nu);
  static NuSchedule sequence(std::vector<double> nus);

  /// nu for the step that produces iterate `step + 1`.
  double at(std::size_t step) const;
  bool is_constant() const noexcept { return constant_; }
  const std::vector<double>& values() const noexcept { return values_; }
  friend bool operator==(const NuSchedule&, const NuSchedule&) = default;

 private:
  bool constant_ = true;
  std::vector<double> values_{1.0};
};

struct FixedBandwidth {
  friend bool operator==(const FixedBandwidth&, const FixedBandwidth&) = default;
};
struct MedianPerIteration {
  friend bool operator==(const MedianPerIteration&, const MedianPerIteration&) = default;
};
struct MedianOnce {
  friend bool operator==(const MedianOnce&, const MedianOnce&) = default;
};
using BandwidthPolicy = std::variant<FixedBandwidth, MedianPerIteration, MedianOnce>;

/// Kernel actually used for an ensemble under a bandwidth policy. Linear
/// kernels and FixedBandwidth pass `kernel` through unchanged.
KernelSpec resolve_kernel(const KernelSpec& kernel, const BandwidthPolicy& policy, const Matrix& positions);

/// Row i is v_i = (1/N) sum_j [k(x_i, x_j) grad V(x_j) - grad_1 k(x_j, x_i)],
/// so that x <- x - h v is the SVGD update at nu = 1.
Matrix drift(const EnsembleState& state, const KernelSpec& kernel, const ScoreModel& target);

/// Same, reusing a Gram matrix already assembled for `positions`.
Matrix drift(const Matrix& positions, const GramMatrix& k, const KernelSpec& kernel,
             const ScoreModel& target);

/// Direction ((1 - nu)/N K + nu I)^{-1} drift. At nu == 1 the drift is
/// returned as is and no system is formed.
Matrix regularized_direction(const Matrix& positions, const KernelSpec& kernel,
                             const ScoreModel& target, double nu, const SolveConfig& cfg);

/// X' = X - h * regularized_direction.
EnsembleState rsvgd_step(const EnsembleState& state, const KernelSpec& kernel,
                         const ScoreModel& target, double nu, double h, const SolveConfig& cfg);

/// Step with a schedule. Adagrad rescales the solved direction elementwise.
EnsembleState rsvgd_step(const EnsembleState& state, const KernelSpec& kernel,
                         const ScoreModel& target, double nu, const StepSchedule& step,
                         const SolveConfig& cfg);

/// Plain SVGD update (no linear system).
EnsembleState svgd_step(const EnsembleState& state, const KernelSpec& kernel,
                        const ScoreModel& target, const StepSchedule& step);

struct RunOptions {
  std::size_t iterations = 0;
  std::size_t stride = 1;
  NuSchedule nu = NuSchedule::constant(1.0);
  StepSchedule step = StepSchedule::adagrad(0.1);
  SolveConfig solver = SolveConfig::cholesky();
  BandwidthPolicy bandwidth = FixedBandwidth{};
  bool keep_snapshots = true;
};

struct Snapshot {
  EnsembleState state;
  KernelSpec kernel;  // kernel in force at this iterate
  double step_ms = 0.0;  // wall clock of the step that produced it
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> step_ms;  // one entry per step
};

using SnapshotObserver = std::function<void(const Snapshot&)>;

/// Applies `options.iterations` steps. Iterates 0, stride, 2*stride, ... and
/// the final iterate are recorded and passed to `observer`.
Trajectory run(const EnsembleState& init, const KernelSpec& kernel, const ScoreModel& target,
               const RunOptions& options, const SnapshotObserver& observer = {});

}  // namespace steinflow
