#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "steinflow/errors.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"

namespace steinflow::harness {

/// Configuration error that names the offending key ("section.key").
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class TargetKind { kGaussian, kMixture1d };
enum class KernelKind { kGaussian, kLinear };
enum class BandwidthMode { kMedian, kMedianOnce, kFixed };
enum class StepKind { kAdagrad, kConstant };
enum class SolverKind { kCholesky, kCg };
enum class CosineMode { kRandom, kFixed };

struct TargetConfig {
  TargetKind kind = TargetKind::kGaussian;
  std::vector<double> mean{0.0};
  std::vector<double> cov{1.0};  // row-major d x d
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t dim() const noexcept { return kind == TargetKind::kGaussian ? mean.size() : 1; }
  friend bool operator==(const TargetConfig&, const TargetConfig&) = default;
};

struct KernelConfig {
  KernelKind kind = KernelKind::kGaussian;
  BandwidthMode bandwidth_mode = BandwidthMode::kMedian;
  double bandwidth = 1.0;  // used when bandwidth_mode == kFixed
  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

struct SamplerConfig {
  double nu = 1.0;
  std::vector<double> nu_sequence;  // overrides nu when nonempty
  StepKind step = StepKind::kAdagrad;
  double step_size = 0.1;
  double fudge = 1e-6;
  SolverKind solver = SolverKind::kCholesky;
  double cg_tol = 1e-10;
  int cg_max_iter = 1000;
  bool cg_precondition = true;
  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

struct RunConfig {
  std::size_t particles = 100;
  std::size_t iterations = 100;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t stride = 1;
  std::string output = "steinflow.csv";
  std::vector<double> init_mean{0.0};  // one value broadcasts to every coordinate
  std::vector<double> init_std{1.0};
  CosineMode h3 = CosineMode::kRandom;
  double h3_omega = 1.0;
  double h3_phase = 0.0;
  bool timing = false;  // when false wall_ms is written as 0 so output is reproducible
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ExperimentConfig {
  TargetConfig target;
  KernelConfig kernel;
  SamplerConfig sampler;
  RunConfig run;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  std::size_t dim() const noexcept { return target.dim(); }
  ScoreModel target_model() const;
  /// Kernel before bandwidth resolution (median modes start at bandwidth 1).
  KernelSpec kernel_spec() const;
  BandwidthPolicy bandwidth_policy() const;
  NuSchedule nu_schedule() const;
  StepSchedule step_schedule() const;
  SolveConfig solve_config() const;
  /// Initial distribution with the seed of replicate `replicate`.
  InitSpec init_spec(std::size_t replicate) const;
  /// seed xor replicate.
  std::uint64_t replicate_seed(std::size_t replicate) const noexcept;
};

/// Mixture (1/3) N(-2, 1) + (2/3) N(2, 1) from N(-10, 1) with 200 particles,
/// 100 iterations and 20 replicates.
ExperimentConfig mixture_preset();

/// Parses the sectioned key/value format. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Writes every key explicitly; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace steinflow::harness
