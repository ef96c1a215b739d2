#include "steinflow/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

#include "steinflow/diagnostics.hpp"
#include "steinflow/gaussian_flow.hpp"
#include "steinflow/harness/csv.hpp"
#include "steinflow/rng.hpp"

namespace steinflow::harness {

namespace {

struct ReplicateOutcome {
  std::vector<ResultRow> rows;
  std::optional<std::string> failure;
};

CosineParams draw_cosine(const ExperimentConfig& cfg, Rng& rng) {
  if (cfg.run.h3 == CosineMode::kFixed) return CosineParams{cfg.run.h3_omega, cfg.run.h3_phase};
  CosineParams p;
  p.omega = rng.normal();
  p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return p;
}

ResultRow sentinel_row(std::size_t replicate, std::size_t iteration) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return ResultRow{replicate, iteration, nan, nan, nan, nan, nan, nan};
}

ReplicateOutcome run_replicate(const ExperimentConfig& cfg, std::size_t replicate) {
  ReplicateOutcome out;
  const ScoreModel target = cfg.target_model();
  const NuSchedule nus = cfg.nu_schedule();
  const SolveConfig solver = cfg.solve_config();
  const std::size_t iterations = cfg.run.iterations;

  Rng rng(cfg.replicate_seed(replicate));
  const CosineParams cosine = draw_cosine(cfg, rng);
  const Matrix x0 = sample_init(cfg.init_spec(replicate), static_cast<Eigen::Index>(cfg.run.particles), rng);

  RunOptions options;
  options.iterations = iterations;
  options.stride = 1;  // rows are filtered below so a failure can be located exactly
  options.nu = nus;
  options.step = cfg.step_schedule();
  options.solver = solver;
  options.bandwidth = cfg.bandwidth_policy();
  options.keep_snapshots = false;

  std::size_t reached = 0;
  bool in_diagnostics = false;
  bool observed = false;
  auto observe = [&](const Snapshot& snap) {
    const std::size_t it = snap.state.iteration;
    reached = it;
    observed = true;
    if (it % cfg.run.stride != 0 && it != iterations) return;
    // Regularized KSD is reported at the nu of the step leaving this iterate.
    const double nu = nus.is_constant() ? nus.at(0) : nus.at(std::min(it, iterations == 0 ? 0 : iterations - 1));
    in_diagnostics = true;
    const DiagReport d = diagnose(snap.state.positions, snap.kernel, target, nu, solver, cosine);
    in_diagnostics = false;
    ResultRow row;
    row.replicate = replicate;
    row.iteration = it;
    row.wall_ms = cfg.run.timing ? snap.step_ms : 0.0;
    row.ksd2 = d.ksd2;
    row.reg_ksd2 = d.reg_ksd2;
    row.mse_h1 = d.mse.at(TestFunction::kIdentity);
    row.mse_h2 = d.mse.at(TestFunction::kSquare);
    row.mse_h3 = d.mse.at(TestFunction::kCosine);
    out.rows.push_back(row);
  };

  try {
    run(EnsembleState::from_positions(x0), cfg.kernel_spec(), target, options, observe);
  } catch (const std::exception& e) {
    // A step failure means iterate reached + 1 was never produced.
    const std::size_t failed_at = (in_diagnostics || !observed) ? reached : reached + 1;
    out.rows.push_back(sentinel_row(replicate, failed_at));
    out.failure = "replicate " + std::to_string(replicate) + ": " + e.what();
  }
  return out;
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("STEINFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const std::size_t replicates = cfg.run.replicates;
  std::vector<ReplicateOutcome> outcomes(replicates);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < replicates; r = next++) outcomes[r] = run_replicate(cfg, r);
  };
  const std::size_t workers = std::min(worker_count(), replicates);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  ExperimentResult result;
  for (auto& o : outcomes) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    if (o.failure) {
      result.failure = std::move(o.failure);
      break;
    }
  }
  return result;
}

void write_results(std::ostream& out, std::span<const ResultRow> rows) {
  CsvWriter csv(out, {"replicate", "iteration", "wall_ms", "ksd2", "reg_ksd2", "mse_h1", "mse_h2", "mse_h3"});
  for (const auto& r : rows) {
    csv.field(r.replicate).field(r.iteration).field(r.wall_ms).field(r.ksd2).field(r.reg_ksd2);
    csv.field(r.mse_h1).field(r.mse_h2).field(r.mse_h3).end_row();
  }
}

void write_diagnostics(std::ostream& out, std::span<const ResultRow> rows) {
  CsvWriter csv(out, {"replicate", "iteration", "ksd2", "reg_ksd2"});
  for (const auto& r : rows) csv.field(r.replicate).field(r.iteration).field(r.ksd2).field(r.reg_ksd2).end_row();
}

std::vector<MseSummaryRow> average_mse(std::span<const ResultRow> rows) {
  struct Acc {
    double h1 = 0.0, h2 = 0.0, h3 = 0.0;
    std::size_t count = 0;
  };
  std::map<std::size_t, Acc> by_iter;
  for (const auto& r : rows) {
    auto& a = by_iter[r.iteration];
    a.h1 += r.mse_h1;
    a.h2 += r.mse_h2;
    a.h3 += r.mse_h3;
    ++a.count;
  }
  std::vector<MseSummaryRow> out;
  out.reserve(by_iter.size());
  for (const auto& [it, a] : by_iter) {
    const double c = static_cast<double>(a.count);
    out.push_back(MseSummaryRow{it, a.h1 / c, a.h2 / c, a.h3 / c});
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::span<const double> nus,
                                std::span<const std::size_t> particle_counts) {
  std::vector<SweepRow> out;
  for (double nu : nus) {
    for (std::size_t n : particle_counts) {
      ExperimentConfig c = cfg;
      c.sampler.nu = nu;
      c.sampler.nu_sequence.clear();
      c.run.particles = n;
      const ExperimentResult res = run_experiment(c);
      if (res.failure) throw Error(*res.failure);
      for (const auto& m : average_mse(res.rows)) out.push_back(SweepRow{nu, n, m});
    }
  }
  return out;
}

void write_sweep(std::ostream& out, std::span<const SweepRow> rows) {
  CsvWriter csv(out, {"nu", "particles", "iteration", "mse_h1", "mse_h2", "mse_h3"});
  for (const auto& r : rows) {
    csv.field(r.nu).field(r.particles).field(r.mse.iteration);
    csv.field(r.mse.mse_h1).field(r.mse.mse_h2).field(r.mse.mse_h3).end_row();
  }
}

std::vector<BenchRow> bench_timing(const ExperimentConfig& cfg, std::span<const std::size_t> particle_counts,
                                   const BenchOptions& options) {
  if (!std::is_sorted(particle_counts.begin(), particle_counts.end())) {
    throw InvalidArgument("particle counts must be sorted ascending");
  }
  if (!(options.nu > 0.0 && options.nu < 1.0)) throw InvalidArgument("bench nu must lie in (0, 1)");
  if (options.min_iterations < 1) throw InvalidArgument("bench needs at least one timed iteration");
  using Clock = std::chrono::steady_clock;

  const ScoreModel target = cfg.target_model();
  const KernelSpec base = cfg.kernel_spec();
  const BandwidthPolicy policy = cfg.bandwidth_policy();
  const StepSchedule step = cfg.step_schedule();
  const SolveConfig solver = cfg.solve_config();
  const bool per_iteration = std::holds_alternative<MedianPerIteration>(policy);

  struct Variant {
    EnsembleState state;
    KernelSpec kernel;
    double nu;
    double total_ms = 0.0;
  };
  auto advance = [&](Variant& v) {
    if (per_iteration) v.kernel = resolve_kernel(base, policy, v.state.positions);
    const auto t0 = Clock::now();
    v.state = rsvgd_step(v.state, v.kernel, target, v.nu, step, solver);
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };

  std::vector<BenchRow> rows;
  for (std::size_t n : particle_counts) {
    const Matrix x0 = sample_init(cfg.init_spec(0), static_cast<Eigen::Index>(n));
    const KernelSpec k0 = resolve_kernel(base, policy, x0);
    Variant reg{EnsembleState::from_positions(x0), k0, options.nu};
    Variant plain{EnsembleState::from_positions(x0), k0, 1.0};
    for (std::size_t i = 0; i < options.warmup; ++i) {
      advance(reg);
      advance(plain);
    }
    const double min_ms = options.min_seconds * 1000.0;
    std::size_t timed = 0;
    while (timed < options.max_iterations &&
           (timed < options.min_iterations || std::min(reg.total_ms, plain.total_ms) < min_ms)) {
      reg.total_ms += advance(reg);
      plain.total_ms += advance(plain);
      ++timed;
    }
    BenchRow row;
    row.particles = n;
    row.timed_iterations = timed;
    row.regularized_ms = reg.total_ms / static_cast<double>(timed);
    row.svgd_ms = plain.total_ms / static_cast<double>(timed);
    row.overhead_ms = row.regularized_ms - row.svgd_ms;
    rows.push_back(row);
  }
  return rows;
}

void write_bench(std::ostream& out, std::span<const BenchRow> rows) {
  CsvWriter csv(out, {"particles", "regularized_ms", "svgd_ms", "overhead_ms"});
  for (const auto& r : rows) csv.field(r.particles).field(r.regularized_ms).field(r.svgd_ms).field(r.overhead_ms).end_row();
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("slope fit needs matching x and y");
  if (x.size() < 2) throw InvalidArgument("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("log-log fit needs distinct x values");
  return sxy / sxx;
}

std::vector<OracleRow> gaussian_oracle(const ExperimentConfig& cfg, double delta) {
  if (cfg.target.kind != TargetKind::kGaussian) throw InvalidArgument("gaussian oracle needs a gaussian target");
  if (cfg.kernel.kind != KernelKind::kLinear) throw InvalidArgument("gaussian oracle needs the linear kernel");
  for (double m : cfg.target.mean) {
    if (m != 0.0) throw InvalidArgument("gaussian oracle needs a zero-mean target");
  }
  for (double m : cfg.run.init_mean) {
    if (m != 0.0) throw InvalidArgument("gaussian oracle needs a zero-mean initial ensemble");
  }

  const auto d = static_cast<Eigen::Index>(cfg.dim());
  const Matrix q = Eigen::Map<const Matrix>(cfg.target.cov.data(), d, d);
  const InitSpec init = cfg.init_spec(0);
  const Matrix s0 = init.stddev.array().square().matrix().asDiagonal();
  const Matrix commutator = s0 * q - q * s0;
  if (commutator.norm() > 1e-12 * (s0.norm() * q.norm())) {
    throw InvalidArgument("initial covariance must commute with the target covariance");
  }

  const ScoreModel target = cfg.target_model();
  const KernelSpec kernel = KernelSpec::linear();
  const SolveConfig solver = cfg.solve_config();
  const double lambda = sym_eigen(SymMatrix(q)).values(0);
  const auto n_particles = static_cast<double>(cfg.run.particles);

  std::vector<MatrixFlowState> closed{MatrixFlowState::make(s0, q)};
  std::vector<FlowSchedule> schedule;
  std::vector<double> errors;
  EnsembleState particles = EnsembleState::from_positions(sample_init(init, static_cast<Eigen::Index>(cfg.run.particles)));
  for (std::size_t n = 0;; ++n) {
    const Matrix& x = particles.positions;
    const Matrix s_emp = (x.transpose() * x) / n_particles;
    const Matrix& s = closed.back().s;
    errors.push_back((s_emp - s).norm() / s.norm());
    if (n == cfg.run.iterations) break;
    const FlowSchedule step = schedule_params(closed.back(), delta);
    schedule.push_back(step);
    closed.push_back(discrete_step(closed.back(), step.nu, step.h));
    particles = rsvgd_step(particles, kernel, target, step.nu, step.h, solver);
  }

  const DecayBoundResult bound = kl_decay_bound_check(closed, schedule, lambda);
  std::vector<OracleRow> rows(closed.size());
  for (std::size_t n = 0; n < closed.size(); ++n) {
    rows[n].n = n;
    rows[n].rel_err = errors[n];
    rows[n].kl_closed = bound.kl[n];
    rows[n].bound_rhs = bound.bound[n];
    if (n < schedule.size()) {
      rows[n].nu = schedule[n].nu;
      rows[n].h = schedule[n].h;
    }
  }
  return rows;
}

void write_oracle(std::ostream& out, std::span<const OracleRow> rows) {
  CsvWriter csv(out, {"n", "rel_err", "kl_closed", "bound_rhs"});
  for (const auto& r : rows) csv.field(r.n).field(r.rel_err).field(r.kl_closed).field(r.bound_rhs).end_row();
}

}  // namespace steinflow::harness
