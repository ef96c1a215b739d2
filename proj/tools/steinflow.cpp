// Command line driver: run, sweep, bench, gaussian-oracle and diagnose.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "steinflow/errors.hpp"
#include "steinflow/harness/config.hpp"
#include "steinflow/harness/experiment.hpp"

namespace sh = steinflow::harness;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw steinflow::Error("cannot open output file '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw steinflow::Error("failed writing '" + path + "'");
}

int cmd_run(const std::string& config_path, const std::string& output_override, bool diagnostics_only) {
  sh::ExperimentConfig cfg = sh::load_config(config_path);
  if (!output_override.empty()) cfg.run.output = output_override;
  const sh::ExperimentResult result = sh::run_experiment(cfg);
  auto out = open_output(cfg.run.output);
  if (diagnostics_only) {
    sh::write_diagnostics(out, result.rows);
  } else {
    sh::write_results(out, result.rows);
  }
  finish(out, cfg.run.output);
  if (result.failure) {
    std::cerr << "steinflow: run aborted: " << *result.failure << "\n";
    return 2;
  }
  std::cerr << "wrote " << result.rows.size() << " rows to " << cfg.run.output << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& output_override, const std::vector<double>& nus,
              const std::vector<std::size_t>& counts) {
  sh::ExperimentConfig cfg = sh::load_config(config_path);
  if (!output_override.empty()) cfg.run.output = output_override;
  const std::vector<std::size_t> particles = counts.empty() ? std::vector<std::size_t>{cfg.run.particles} : counts;
  const auto rows = sh::run_sweep(cfg, nus, particles);
  auto out = open_output(cfg.run.output);
  sh::write_sweep(out, rows);
  finish(out, cfg.run.output);
  std::cerr << "wrote " << rows.size() << " rows to " << cfg.run.output << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& output_override,
              const std::vector<std::size_t>& counts, double nu, double min_seconds) {
  sh::ExperimentConfig cfg = sh::load_config(config_path);
  if (!output_override.empty()) cfg.run.output = output_override;
  sh::BenchOptions options;
  options.nu = nu;
  options.min_seconds = min_seconds;
  const auto rows = sh::bench_timing(cfg, counts, options);
  auto out = open_output(cfg.run.output);
  sh::write_bench(out, rows);
  finish(out, cfg.run.output);
  if (rows.size() >= 2) {
    std::vector<double> n, overhead;
    for (const auto& r : rows) {
      n.push_back(static_cast<double>(r.particles));
      overhead.push_back(r.overhead_ms);
    }
    try {
      std::fprintf(stderr, "log-log slope of overhead: %.3f\n", sh::loglog_slope(n, overhead));
    } catch (const steinflow::Error& e) {
      std::cerr << "no slope fit: " << e.what() << "\n";
    }
  }
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::string& output_override, double delta) {
  sh::ExperimentConfig cfg = sh::load_config(config_path);
  if (!output_override.empty()) cfg.run.output = output_override;
  const auto rows = sh::gaussian_oracle(cfg, delta);
  auto out = open_output(cfg.run.output);
  sh::write_oracle(out, rows);
  finish(out, cfg.run.output);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.rel_err);
  std::fprintf(stderr, "max relative covariance error: %.4g over %zu steps\n", worst, rows.size() - 1);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized Stein variational gradient descent experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::vector<double> nus;
  std::vector<std::size_t> counts;
  double nu = 0.1;
  double delta = 0.05;
  double min_seconds = 0.25;

  auto* run = app.add_subcommand("run", "Run all replicates and write one row per recorded iterate");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "Override run.output");

  auto* sweep = app.add_subcommand("sweep", "Replicate-averaged errors over a grid of nu and particle counts");
  sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--nu", nus, "Regularization values")->required()->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--particles", counts, "Particle counts (default: run.particles)")->delimiter(',');
  sweep->add_option("-o,--output", output, "Override run.output");

  auto* bench = app.add_subcommand("bench", "Per-step wall clock of the regularized and plain updates");
  bench->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--counts", counts, "Particle counts, ascending")->required()->delimiter(',');
  bench->add_option("--nu", nu, "Regularization of the timed variant")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--min-seconds", min_seconds, "Minimum accumulated time per variant and count");
  bench->add_option("-o,--output", output, "Override run.output");

  auto* oracle = app.add_subcommand("gaussian-oracle", "Compare particles with the closed-form covariance recursion");
  oracle->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--delta", delta, "Step parameter in (0, 1/2)");
  oracle->add_option("-o,--output", output, "Override run.output");

  auto* diagnose = app.add_subcommand("diagnose", "KSD and regularized KSD trajectory only");
  diagnose->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  diagnose->add_option("-o,--output", output, "Override run.output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, output, false);
    if (diagnose->parsed()) return cmd_run(config_path, output, true);
    if (sweep->parsed()) return cmd_sweep(config_path, output, nus, counts);
    if (bench->parsed()) return cmd_bench(config_path, output, counts, nu, min_seconds);
    if (oracle->parsed()) return cmd_oracle(config_path, output, delta);
  } catch (const sh::ConfigError& e) {
    std::cerr << "steinflow: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "steinflow: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
