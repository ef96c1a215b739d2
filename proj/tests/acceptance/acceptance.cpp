// Acceptance suite. Each criterion prints one PASS/FAIL line with the
// measured quantity, the threshold and the wall time. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "steinflow/diagnostics.hpp"
#include "steinflow/gaussian_flow.hpp"
#include "steinflow/harness/experiment.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"
#include "support/oracles.hpp"

namespace {

using namespace steinflow;
using steinflow::testing::Gen;
namespace sh = steinflow::harness;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Outcome svgd_reduction() {
  Gen gen(1001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = gen.integer(1, 40);
    const Eigen::Index d = gen.integer(1, 3);
    const Matrix x = gen.normal_matrix(n, d, 2.0);
    const ScoreModel target = gen.target(d);
    const KernelSpec k = t % 4 == 0 ? KernelSpec::linear() : KernelSpec::gaussian(gen.log_uniform(0.2, 5));
    const double h = gen.uniform(0.01, 0.5);
    const auto next = rsvgd_step(EnsembleState::from_positions(x), k, target, 1.0, h, SolveConfig::cholesky());
    const Matrix expect = x - h * testing::brute_force_drift(x, k, target);
    worst = std::max(worst, testing::rel_err(next.positions, expect));
  }
  return {worst <= 1e-10, fmt("max relative Frobenius error %.3e over 100 instances (limit 1e-10)", worst)};
}

Outcome reg_ksd_exactness() {
  Gen gen(1002);
  double worst = 0.0, worst_nu1 = 0.0;
  int cases = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = gen.integer(1, 5);
    const Eigen::Index d = gen.integer(1, 2);
    const Matrix x = gen.normal_matrix(n, d, 1.5);
    const ScoreModel target = gen.target(d);
    const KernelSpec k = t % 5 == 4 ? KernelSpec::linear() : KernelSpec::gaussian(gen.log_uniform(0.3, 5));
    for (double nu : {0.1, 0.5, 0.9}) {
      const double expect = testing::augmented_gram_reg_ksd(x, k, target, nu);
      worst = std::max(worst, testing::rel_err(reg_ksd(x, k, target, nu), expect));
      ++cases;
    }
    worst_nu1 = std::max(worst_nu1, testing::rel_err(reg_ksd(x, k, target, 1.0), ksd_vstat(x, k, target)));
  }
  return {worst <= 1e-6 && worst_nu1 <= 1e-10,
          fmt("max relative error vs augmented Gram %.3e over %d cases (limit 1e-6); nu=1 vs KSD %.3e (limit 1e-10)",
              worst, cases, worst_nu1)};
}

Outcome sandwich() {
  Gen gen(1003);
  const double gammas[] = {0.1, 0.25, 0.5};
  int holds = 0, tested = 0, upper_fail = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = gen.integer(1, 50);
    std::vector<double> lambda, c;
    for (int i = 0; i < n; ++i) {
      lambda.push_back(gen.log_uniform(1e-4, 10));
      c.push_back(gen.normal());
    }
    std::sort(lambda.rbegin(), lambda.rend());
    const SpectralModel m(lambda, c);
    const double gamma = gammas[t % 3];
    // Pick nu inside the admissible region.
    const double bound = sandwich_check(m, gamma, 0.5).nu_ratio_bound;
    double nu = 0.0;
    do {
      const double ratio = bound * gen.uniform(0.0, 1.0);
      nu = ratio / (1.0 + ratio);
    } while (!(nu > 0.0 && nu < 1.0));
    const SandwichResult r = sandwich_check(m, gamma, nu);
    ++tested;
    if (r.verdict == SandwichVerdict::kHolds) ++holds;
    // Upper half at an arbitrary nu, no condition.
    const double free_nu = gen.uniform(1e-6, 1.0 - 1e-6);
    if (spectral_reg_stein(m, free_nu) > spectral_fisher(m) / (1.0 - free_nu) * (1.0 + 1e-12)) ++upper_fail;
  }
  return {holds == tested && upper_fail == 0,
          fmt("sandwich held in %d/%d admissible models; unconditional upper bound failed %d times", holds, tested,
              upper_fail)};
}

Outcome gaussian_tracking() {
  sh::ExperimentConfig cfg;
  cfg.target.kind = sh::TargetKind::kGaussian;
  cfg.target.mean = {0.0};
  cfg.target.cov = {1.0};
  cfg.kernel.kind = sh::KernelKind::kLinear;
  cfg.run.particles = 5000;
  cfg.run.iterations = 50;
  cfg.run.init_mean = {0.0};
  cfg.run.init_std = {2.0};
  cfg.run.seed = 2024;
  cfg.sampler.solver = sh::SolverKind::kCg;
  cfg.sampler.cg_tol = 1e-12;
  const auto rows = sh::gaussian_oracle(cfg, 0.05);
  double max_err = 0.0, min_slack = 1e300;
  bool monotone = true;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    max_err = std::max(max_err, rows[n].rel_err);
    min_slack = std::min(min_slack, rows[n].bound_rhs - rows[n].kl_closed);
    if (n > 0 && rows[n].kl_closed > rows[n - 1].kl_closed) monotone = false;
  }
  return {rows.size() == 51 && max_err <= 0.1 && monotone && min_slack >= -1e-9,
          fmt("max relative covariance error %.4f (limit 0.1); KL non-increasing: %s; min bound slack %.3e "
              "(limit -1e-9); KL %.4f -> %.3e",
              max_err, monotone ? "yes" : "no", min_slack, rows.front().kl_closed, rows.back().kl_closed)};
}

Outcome scalar_recursion() {
  Gen gen(1005);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double s = gen.log_uniform(0.1, 10), q = gen.log_uniform(0.1, 10);
    const double nu = gen.uniform(0.01, 0.99), h = gen.uniform(1e-4, 0.2);
    Matrix sm(1, 1), qm(1, 1);
    sm << s;
    qm << q;
    const double got = discrete_step(MatrixFlowState::make(sm, qm), nu, h).s(0, 0);
    worst = std::max(worst, std::abs(got - testing::scalar_recursion(s, q, nu, h)) / std::max(1.0, std::abs(got)));
  }
  // Contraction over 200 scheduled steps from admissible starts.
  int violations = 0, runs = 0;
  for (double delta : {0.02, 0.05, 0.1}) {
    const double hi = 1.0 / 3.0 + 1.0 / (3.0 * delta);
    for (int k = 0; k <= 20; ++k) {
      const double s0 = 0.8 + (hi - 0.8) * k / 20.0;
      if (std::abs(s0 - 1.0) < 1e-9) continue;
      ++runs;
      Matrix sm(1, 1), qm(1, 1);
      sm << s0;
      qm << 1.0;
      MatrixFlowState st = MatrixFlowState::make(sm, qm);
      const double e0 = std::abs(s0 - 1.0);
      for (int n = 1; n <= 200; ++n) {
        const FlowSchedule p = schedule_params(st, delta);
        st = discrete_step(st, p.nu, p.h);
        if (std::abs(st.s(0, 0) - 1.0) > std::exp(-n * delta) * e0 * (1 + 1e-12)) {
          ++violations;
          break;
        }
        if (st.s(0, 0) == 1.0) break;
      }
    }
  }
  return {worst <= 1e-12 && violations == 0,
          fmt("max deviation from scalar recursion %.3e over 1000 tuples (limit 1e-12); contraction violated in %d/%d "
              "runs",
              worst, violations, runs)};
}

Outcome mixture_ordering() {
  std::vector<sh::MseSummaryRow> finals;
  for (double nu : {0.1, 1.0}) {
    sh::ExperimentConfig cfg = sh::mixture_preset();
    cfg.sampler.nu = nu;
    cfg.run.seed = 7;
    cfg.run.stride = cfg.run.iterations;
    const sh::ExperimentResult r = sh::run_experiment(cfg);
    if (r.failure) return {false, "run failed: " + *r.failure};
    finals.push_back(sh::average_mse(r.rows).back());
  }
  const double a[] = {std::log10(finals[0].mse_h1), std::log10(finals[0].mse_h2), std::log10(finals[0].mse_h3)};
  const double b[] = {std::log10(finals[1].mse_h1), std::log10(finals[1].mse_h2), std::log10(finals[1].mse_h3)};
  const bool pass = a[0] < b[0] && a[1] < b[1] && a[2] < b[2];
  return {pass, fmt("log10 MSE at iteration 100, nu=0.1 vs nu=1: h1 %.3f vs %.3f, h2 %.3f vs %.3f, h3 %.3f vs %.3f",
                    a[0], b[0], a[1], b[1], a[2], b[2])};
}

Outcome overhead_trend() {
  const sh::ExperimentConfig cfg = sh::mixture_preset();
  const std::vector<std::size_t> counts{50, 100, 150, 200, 250};
  sh::BenchOptions options;
  options.nu = 0.1;
  options.min_seconds = 1.0;
  const auto rows = sh::bench_timing(cfg, counts, options);
  std::vector<double> n, overhead;
  bool monotone = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    n.push_back(static_cast<double>(rows[i].particles));
    overhead.push_back(rows[i].overhead_ms);
    if (i > 0 && rows[i].overhead_ms <= rows[i - 1].overhead_ms) monotone = false;
    detail << (i ? ", " : "") << rows[i].particles << ":" << fmt("%.4f", rows[i].overhead_ms);
  }
  double slope = std::nan("");
  if (std::all_of(overhead.begin(), overhead.end(), [](double v) { return v > 0.0; })) {
    slope = sh::loglog_slope(n, overhead);
  }
  const bool pass = monotone && slope >= 2.3 && slope <= 3.5;
  return {pass, fmt("overhead ms {%s}; monotone: %s; log-log slope %.3f (range [2.3, 3.5])", detail.str().c_str(),
                    monotone ? "yes" : "no", slope)};
}

Outcome numerics_hygiene() {
  Gen gen(1008);
  double worst_grad = 0.0;
  for (int t = 0; t < 300; ++t) {
    const Eigen::Index d = gen.integer(1, 3);
    ScoreModel model = gen.target(d);
    if (t % 3 == 2) {
      CustomTarget c;
      c.dim = d;
      c.log_density = [](const Vector& x) { return -0.25 * x.squaredNorm() * x.squaredNorm() - x.sum(); };
      model = ScoreModel(c);
    }
    const Vector x = gen.normal_matrix(d, 1, 2.0).col(0);
    const Vector fd = testing::fd_gradient([&](const Vector& u) { return model.log_density(u); }, x);
    const Vector g = grad_potential(model, x);
    worst_grad = std::max(worst_grad, (g + fd).norm() / std::max(1.0, g.norm()));
  }
  double worst_psd = 0.0;
  for (int t = 0; t < 40; ++t) {
    const Matrix x = gen.normal_matrix(gen.integer(2, 50), gen.integer(1, 3), 2.0);
    for (const KernelSpec& k : {KernelSpec::gaussian(median_heuristic(x)), KernelSpec::linear()}) {
      const SymEigen e = sym_eigen(SymMatrix(gram(k, x)));
      worst_psd = std::min(worst_psd, e.values.minCoeff() / std::max(1.0, e.values.maxCoeff()));
    }
  }
  double worst_solver = 0.0;
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = gen.integer(2, 100);
    const Matrix x = gen.normal_matrix(n, gen.integer(1, 2), 2.0);
    const double nu = gen.uniform(0.05, 0.95);
    SymMatrix a(gram(KernelSpec::gaussian(median_heuristic(x)), x));
    a.scale_and_shift((1.0 - nu) / static_cast<double>(n), nu);
    const Matrix b = gen.normal_matrix(n, 2);
    worst_solver = std::max(worst_solver, testing::rel_err(solve_spd(a, b, SolveConfig::cg(1e-12, 5000)),
                                                           solve_spd(a, b, SolveConfig::cholesky())));
  }
  return {worst_grad <= 1e-5 && worst_psd >= -1e-8 && worst_solver <= 1e-8,
          fmt("score FD error %.2e (limit 1e-5); min Gram eigenvalue ratio %.2e (limit -1e-8); Cholesky/CG %.2e "
              "(limit 1e-8)",
              worst_grad, worst_psd, worst_solver)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "svgd-reduction", 1.0, svgd_reduction},
      {2, "reg-ksd-exactness", 10.0, reg_ksd_exactness},
      {3, "spectral-sandwich", 5.0, sandwich},
      {4, "gaussian-oracle-tracking", 60.0, gaussian_tracking},
      {5, "scalar-recursion-and-contraction", 1.0, scalar_recursion},
      {6, "mixture-mse-ordering", 300.0, mixture_ordering},
      {7, "regularization-overhead-trend", 300.0, overhead_trend},
      {8, "numerics-hygiene", 1e300, numerics_hygiene},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::string timing = fmt("%.2f s", secs);
    if (c.time_limit_s < 1e300) timing += fmt(" of %.0f s", c.time_limit_s);
    std::printf("%s  criterion %d %-34s %s [%s]%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str(), in_time ? "" : " (time limit exceeded)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
