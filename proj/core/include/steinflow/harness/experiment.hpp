#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "steinflow/harness/config.hpp"

namespace steinflow::harness {

struct ResultRow {
  std::size_t replicate = 0;
  std::size_t iteration = 0;
  double wall_ms = 0.0;
  double ksd2 = 0.0;
  double reg_ksd2 = 0.0;
  double mse_h1 = 0.0;
  double mse_h2 = 0.0;
  double mse_h3 = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // (replicate, iteration) order
  /// Set when a replicate failed. Its last row is then a sentinel with NaN
  /// metrics at the iteration that could not be completed.
  std::optional<std::string> failure;
};

/// Number of worker threads: STEINFLOW_THREADS if set to a positive
/// integer, else the machine's parallelism.
std::size_t worker_count();

/// Runs every replicate. Replicate r draws from Rng(seed ^ r): first the
/// cosine frequency and phase (when h3 = random), then the initial ensemble.
/// Output depends only on the config, never on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Header: replicate,iteration,wall_ms,ksd2,reg_ksd2,mse_h1,mse_h2,mse_h3
void write_results(std::ostream& out, std::span<const ResultRow> rows);

/// replicate,iteration,ksd2,reg_ksd2
void write_diagnostics(std::ostream& out, std::span<const ResultRow> rows);

struct MseSummaryRow {
  std::size_t iteration = 0;
  double mse_h1 = 0.0;
  double mse_h2 = 0.0;
  double mse_h3 = 0.0;
};

/// Replicate-averaged squared errors per recorded iteration.
std::vector<MseSummaryRow> average_mse(std::span<const ResultRow> rows);

struct SweepRow {
  double nu = 1.0;
  std::size_t particles = 0;
  MseSummaryRow mse;
};

/// run_experiment for every (nu, particle count) pair, replicate-averaged.
/// Throws the replicate's failure message as Error.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::span<const double> nus,
                                std::span<const std::size_t> particle_counts);

/// nu,particles,iteration,mse_h1,mse_h2,mse_h3
void write_sweep(std::ostream& out, std::span<const SweepRow> rows);

struct BenchOptions {
  double nu = 0.1;
  std::size_t warmup = 3;
  std::size_t min_iterations = 20;
  /// Timed steps are added until each variant has accumulated at least
  /// this much time (or max_iterations is reached).
  double min_seconds = 0.25;
  std::size_t max_iterations = 100000;
};

struct BenchRow {
  std::size_t particles = 0;
  double regularized_ms = 0.0;
  double svgd_ms = 0.0;
  double overhead_ms = 0.0;
  std::size_t timed_iterations = 0;
};

/// Mean wall-clock time per step at `nu` and at nu = 1 for each particle
/// count (ascending). Only the step itself is timed. The two variants
/// alternate so that slow drifts of the machine affect both equally.
std::vector<BenchRow> bench_timing(const ExperimentConfig& cfg, std::span<const std::size_t> particle_counts,
                                   const BenchOptions& options = {});

/// particles,regularized_ms,svgd_ms,overhead_ms
void write_bench(std::ostream& out, std::span<const BenchRow> rows);

/// Least-squares slope of log(y) against log(x). Needs two or more points,
/// all positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct OracleRow {
  std::size_t n = 0;
  double rel_err = 0.0;    // |S_emp - S_closed|_F / |S_closed|_F
  double kl_closed = 0.0;  // KL(N(0, S_closed) | N(0, Q))
  double bound_rhs = 0.0;  // product bound with lambda = min eigenvalue of Q
  double nu = 0.0;         // schedule of the step leaving iterate n (0 for the last)
  double h = 0.0;
};

/// Runs the particle system and the closed-form covariance recursion side
/// by side for run.iterations steps with the adaptive (nu, h) schedule.
/// Requires a zero-mean Gaussian target, the linear kernel and a zero-mean
/// initial ensemble whose covariance diag(init_std^2) commutes with the
/// target covariance. The particle covariance is the uncentered second
/// moment.
std::vector<OracleRow> gaussian_oracle(const ExperimentConfig& cfg, double delta);

/// n,rel_err,kl_closed,bound_rhs
void write_oracle(std::ostream& out, std::span<const OracleRow> rows);

}  // namespace steinflow::harness
