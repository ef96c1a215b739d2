#include "steinflow/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "steinflow/harness/csv.hpp"

namespace steinflow::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

// Every key the format accepts, grouped by section. "preset" is the only
// key allowed before the first section header.
const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"", {"preset"}},
      {"target", {"preset", "kind", "mean", "cov", "cov_diag", "weights", "means", "variances"}},
      {"kernel", {"kind", "bandwidth"}},
      {"sampler",
       {"nu", "nu_sequence", "step", "step_size", "fudge", "solver", "cg_tol", "cg_max_iter",
        "cg_precondition"}},
      {"run",
       {"particles", "iterations", "replicates", "seed", "stride", "output", "init_mean", "init_std", "h3",
        "h3_omega", "h3_phase", "timing"}},
  };
  return keys;
}

double parse_real(const std::string& key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite real number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_real(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_real(v[i]);
  }
  return s;
}

template <class Enum>
Enum parse_enum(const std::string& key, std::string_view text,
                std::initializer_list<std::pair<std::string_view, Enum>> options) {
  text = trim(text);
  std::string names;
  for (const auto& [name, value] : options) {
    if (name == text) return value;
    names += names.empty() ? "" : ", ";
    names += name;
  }
  throw ConfigError(key, "expected one of {" + names + "}, got '" + std::string(text) + "'");
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

void apply_preset(const std::string& key, std::string_view name, ExperimentConfig& cfg) {
  if (trim(name) == "fig1") {
    cfg = mixture_preset();
    return;
  }
  throw ConfigError(key, "unknown preset '" + std::string(trim(name)) + "' (known: fig1)");
}

void validate(ExperimentConfig& cfg, bool explicit_cov, bool explicit_mean) {
  auto& t = cfg.target;
  if (t.kind == TargetKind::kGaussian) {
    t.weights.clear();
    t.means.clear();
    t.variances.clear();
    // The dimension comes from whichever of mean / cov was given.
    if (explicit_cov && !explicit_mean) {
      const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(t.cov.size()))));
      t.mean.assign(d, 0.0);
    }
    const std::size_t d = t.mean.size();
    require(d >= 1, "target.mean", "must have at least one entry");
    if (!explicit_cov) {
      t.cov.assign(d * d, 0.0);
      for (std::size_t i = 0; i < d; ++i) t.cov[i * d + i] = 1.0;
    }
    require(t.cov.size() == d * d, "target.cov", "must have dim*dim entries");
    try {
      (void)cfg.target_model();
    } catch (const Error& e) {
      throw ConfigError("target.cov", std::string("not a valid covariance: ") + e.what());
    }
  } else {
    t.mean = {0.0};
    t.cov = {1.0};
    require(!t.weights.empty(), "target.weights", "required for a mixture1d target");
    require(t.means.size() == t.weights.size(), "target.means", "must match the length of target.weights");
    require(t.variances.size() == t.weights.size(), "target.variances",
            "must match the length of target.weights");
    for (double v : t.variances) require(v > 0.0, "target.variances", "must be positive");
    double total = 0.0;
    for (double w : t.weights) {
      require(w >= 0.0, "target.weights", "must be nonnegative");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "target.weights", "must sum to 1");
  }

  const auto& k = cfg.kernel;
  if (k.bandwidth_mode == BandwidthMode::kFixed) {
    require(k.bandwidth > 0.0, "kernel.bandwidth", "must be positive");
  }

  const auto& s = cfg.sampler;
  require(s.nu > 0.0 && s.nu <= 1.0, "sampler.nu", "must lie in (0, 1]");
  for (double nu : s.nu_sequence) require(nu > 0.0 && nu <= 1.0, "sampler.nu_sequence", "entries must lie in (0, 1]");
  require(s.step_size > 0.0, "sampler.step_size", "must be positive");
  require(s.fudge > 0.0, "sampler.fudge", "must be positive");
  require(s.cg_tol > 0.0, "sampler.cg_tol", "must be positive");
  require(s.cg_max_iter >= 1, "sampler.cg_max_iter", "must be at least 1");

  auto& r = cfg.run;
  require(r.particles >= 1, "run.particles", "must be at least 1");
  require(r.replicates >= 1, "run.replicates", "must be at least 1");
  require(r.stride >= 1, "run.stride", "must be at least 1");
  require(!r.output.empty(), "run.output", "must not be empty");
  if (!s.nu_sequence.empty()) {
    require(s.nu_sequence.size() >= r.iterations, "sampler.nu_sequence",
            "has fewer entries than run.iterations");
  }
  if (k.kind == KernelKind::kGaussian && k.bandwidth_mode != BandwidthMode::kFixed) {
    require(r.particles >= 2, "run.particles", "the median bandwidth needs at least 2 particles");
  }
  const std::size_t d = cfg.dim();
  require(r.init_mean.size() == 1 || r.init_mean.size() == d, "run.init_mean", "must have 1 or dim entries");
  require(r.init_std.size() == 1 || r.init_std.size() == d, "run.init_std", "must have 1 or dim entries");
  for (double v : r.init_std) require(v > 0.0, "run.init_std", "must be positive");
}

}  // namespace

ScoreModel ExperimentConfig::target_model() const {
  if (target.kind == TargetKind::kMixture1d) {
    return Mixture1dTarget(target.weights, target.means, target.variances);
  }
  const auto d = static_cast<Eigen::Index>(target.mean.size());
  Vector mean = Eigen::Map<const Vector>(target.mean.data(), d);
  Matrix cov = Eigen::Map<const Matrix>(target.cov.data(), d, d);
  return GaussianTarget(std::move(mean), std::move(cov));
}

KernelSpec ExperimentConfig::kernel_spec() const {
  if (kernel.kind == KernelKind::kLinear) return KernelSpec::linear();
  return KernelSpec::gaussian(kernel.bandwidth_mode == BandwidthMode::kFixed ? kernel.bandwidth : 1.0);
}

BandwidthPolicy ExperimentConfig::bandwidth_policy() const {
  switch (kernel.bandwidth_mode) {
    case BandwidthMode::kMedian:
      return MedianPerIteration{};
    case BandwidthMode::kMedianOnce:
      return MedianOnce{};
    case BandwidthMode::kFixed:
      break;
  }
  return FixedBandwidth{};
}

NuSchedule ExperimentConfig::nu_schedule() const {
  if (!sampler.nu_sequence.empty()) return NuSchedule::sequence(sampler.nu_sequence);
  return NuSchedule::constant(sampler.nu);
}

StepSchedule ExperimentConfig::step_schedule() const {
  if (sampler.step == StepKind::kConstant) return StepSchedule::constant(sampler.step_size);
  return StepSchedule::adagrad(sampler.step_size, sampler.fudge);
}

SolveConfig ExperimentConfig::solve_config() const {
  if (sampler.solver == SolverKind::kCg) {
    return SolveConfig::cg(sampler.cg_tol, sampler.cg_max_iter, sampler.cg_precondition);
  }
  return SolveConfig::cholesky();
}

std::uint64_t ExperimentConfig::replicate_seed(std::size_t replicate) const noexcept {
  return run.seed ^ static_cast<std::uint64_t>(replicate);
}

InitSpec ExperimentConfig::init_spec(std::size_t replicate) const {
  const auto d = static_cast<Eigen::Index>(dim());
  InitSpec spec;
  spec.mean = run.init_mean.size() == 1 ? Vector::Constant(d, run.init_mean[0])
                                        : Vector(Eigen::Map<const Vector>(run.init_mean.data(), d));
  spec.stddev = run.init_std.size() == 1 ? Vector::Constant(d, run.init_std[0])
                                         : Vector(Eigen::Map<const Vector>(run.init_std.data(), d));
  spec.seed = replicate_seed(replicate);
  return spec;
}

ExperimentConfig mixture_preset() {
  ExperimentConfig cfg;
  cfg.target.kind = TargetKind::kMixture1d;
  cfg.target.weights = {1.0 / 3.0, 2.0 / 3.0};
  cfg.target.means = {-2.0, 2.0};
  cfg.target.variances = {1.0, 1.0};
  cfg.kernel.kind = KernelKind::kGaussian;
  cfg.kernel.bandwidth_mode = BandwidthMode::kMedian;
  cfg.sampler.step = StepKind::kAdagrad;
  cfg.sampler.step_size = 3.0;
  cfg.run.particles = 200;
  cfg.run.iterations = 100;
  cfg.run.replicates = 20;
  cfg.run.init_mean = {-10.0};
  cfg.run.init_std = {1.0};
  cfg.target.mean = {0.0};
  cfg.target.cov = {1.0};
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty() || !known_keys().contains(section)) {
        throw ConfigError(section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto& allowed = known_keys().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(full, "unknown key");
    }
    if (entries.contains(full)) throw ConfigError(full, "duplicate key");
    entries[full] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
  }

  ExperimentConfig cfg;
  auto take = [&](const std::string& key) -> const std::string* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second.value;
  };

  const std::string* preset = take("preset");
  const std::string* target_preset = take("target.preset");
  if (preset && target_preset) throw ConfigError("target.preset", "preset given twice");
  if (preset) apply_preset("preset", *preset, cfg);
  if (target_preset) apply_preset("target.preset", *target_preset, cfg);

  if (const auto* v = take("target.kind")) {
    cfg.target.kind = parse_enum<TargetKind>("target.kind", *v,
                                             {{"gaussian", TargetKind::kGaussian},
                                              {"mixture1d", TargetKind::kMixture1d}});
  } else if (!preset && !target_preset) {
    throw ConfigError("target.kind", "required (or give a preset)");
  }
  const bool has_mean = take("target.mean") != nullptr;
  const bool has_cov = take("target.cov") != nullptr;
  const bool has_diag = take("target.cov_diag") != nullptr;
  if (has_cov && has_diag) throw ConfigError("target.cov_diag", "conflicts with target.cov");
  if (has_mean) cfg.target.mean = parse_list("target.mean", *take("target.mean"));
  if (has_cov) cfg.target.cov = parse_list("target.cov", *take("target.cov"));
  if (has_diag) {
    const auto diag = parse_list("target.cov_diag", *take("target.cov_diag"));
    const std::size_t d = diag.size();
    if (!has_mean) cfg.target.mean.assign(d, 0.0);
    if (cfg.target.mean.size() != d) throw ConfigError("target.cov_diag", "length must match target.mean");
    cfg.target.cov.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) cfg.target.cov[i * d + i] = diag[i];
  }
  if (const auto* v = take("target.weights")) cfg.target.weights = parse_list("target.weights", *v);
  if (const auto* v = take("target.means")) cfg.target.means = parse_list("target.means", *v);
  if (const auto* v = take("target.variances")) cfg.target.variances = parse_list("target.variances", *v);

  if (const auto* v = take("kernel.kind")) {
    cfg.kernel.kind = parse_enum<KernelKind>("kernel.kind", *v,
                                             {{"gaussian", KernelKind::kGaussian}, {"linear", KernelKind::kLinear}});
  }
  if (const auto* v = take("kernel.bandwidth")) {
    const auto t = trim(*v);
    if (t == "median") {
      cfg.kernel.bandwidth_mode = BandwidthMode::kMedian;
    } else if (t == "median_once") {
      cfg.kernel.bandwidth_mode = BandwidthMode::kMedianOnce;
    } else {
      cfg.kernel.bandwidth_mode = BandwidthMode::kFixed;
      cfg.kernel.bandwidth = parse_real("kernel.bandwidth", t);
    }
  }

  auto& s = cfg.sampler;
  if (const auto* v = take("sampler.nu")) s.nu = parse_real("sampler.nu", *v);
  if (const auto* v = take("sampler.nu_sequence")) s.nu_sequence = parse_list("sampler.nu_sequence", *v);
  if (const auto* v = take("sampler.step")) {
    s.step = parse_enum<StepKind>("sampler.step", *v,
                                  {{"adagrad", StepKind::kAdagrad}, {"constant", StepKind::kConstant}});
  }
  if (const auto* v = take("sampler.step_size")) s.step_size = parse_real("sampler.step_size", *v);
  if (const auto* v = take("sampler.fudge")) s.fudge = parse_real("sampler.fudge", *v);
  if (const auto* v = take("sampler.solver")) {
    s.solver = parse_enum<SolverKind>("sampler.solver", *v,
                                      {{"cholesky", SolverKind::kCholesky}, {"cg", SolverKind::kCg}});
  }
  if (const auto* v = take("sampler.cg_tol")) s.cg_tol = parse_real("sampler.cg_tol", *v);
  if (const auto* v = take("sampler.cg_max_iter")) {
    const auto n = parse_unsigned("sampler.cg_max_iter", *v);
    if (n > 1'000'000'000ULL) throw ConfigError("sampler.cg_max_iter", "too large");
    s.cg_max_iter = static_cast<int>(n);
  }
  if (const auto* v = take("sampler.cg_precondition")) s.cg_precondition = parse_bool("sampler.cg_precondition", *v);

  auto& r = cfg.run;
  if (const auto* v = take("run.particles")) r.particles = parse_unsigned("run.particles", *v);
  if (const auto* v = take("run.iterations")) r.iterations = parse_unsigned("run.iterations", *v);
  if (const auto* v = take("run.replicates")) r.replicates = parse_unsigned("run.replicates", *v);
  if (const auto* v = take("run.seed")) r.seed = parse_unsigned("run.seed", *v);
  if (const auto* v = take("run.stride")) r.stride = parse_unsigned("run.stride", *v);
  if (const auto* v = take("run.output")) r.output = *v;
  if (const auto* v = take("run.init_mean")) r.init_mean = parse_list("run.init_mean", *v);
  if (const auto* v = take("run.init_std")) r.init_std = parse_list("run.init_std", *v);
  if (const auto* v = take("run.h3")) {
    r.h3 = parse_enum<CosineMode>("run.h3", *v, {{"random", CosineMode::kRandom}, {"fixed", CosineMode::kFixed}});
  }
  if (const auto* v = take("run.h3_omega")) r.h3_omega = parse_real("run.h3_omega", *v);
  if (const auto* v = take("run.h3_phase")) r.h3_phase = parse_real("run.h3_phase", *v);
  if (const auto* v = take("run.timing")) r.timing = parse_bool("run.timing", *v);

  validate(cfg, has_cov || has_diag, has_mean || has_diag);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& t = cfg.target;
  out << "[target]\n";
  if (t.kind == TargetKind::kGaussian) {
    out << "kind = gaussian\n";
    out << "mean = " << format_list(t.mean) << "\n";
    out << "cov = " << format_list(t.cov) << "\n";
  } else {
    out << "kind = mixture1d\n";
    out << "weights = " << format_list(t.weights) << "\n";
    out << "means = " << format_list(t.means) << "\n";
    out << "variances = " << format_list(t.variances) << "\n";
  }

  out << "\n[kernel]\n";
  out << "kind = " << (cfg.kernel.kind == KernelKind::kGaussian ? "gaussian" : "linear") << "\n";
  switch (cfg.kernel.bandwidth_mode) {
    case BandwidthMode::kMedian:
      out << "bandwidth = median\n";
      break;
    case BandwidthMode::kMedianOnce:
      out << "bandwidth = median_once\n";
      break;
    case BandwidthMode::kFixed:
      out << "bandwidth = " << format_real(cfg.kernel.bandwidth) << "\n";
      break;
  }

  const auto& s = cfg.sampler;
  out << "\n[sampler]\n";
  out << "nu = " << format_real(s.nu) << "\n";
  if (!s.nu_sequence.empty()) out << "nu_sequence = " << format_list(s.nu_sequence) << "\n";
  out << "step = " << (s.step == StepKind::kAdagrad ? "adagrad" : "constant") << "\n";
  out << "step_size = " << format_real(s.step_size) << "\n";
  out << "fudge = " << format_real(s.fudge) << "\n";
  out << "solver = " << (s.solver == SolverKind::kCholesky ? "cholesky" : "cg") << "\n";
  out << "cg_tol = " << format_real(s.cg_tol) << "\n";
  out << "cg_max_iter = " << s.cg_max_iter << "\n";
  out << "cg_precondition = " << (s.cg_precondition ? "true" : "false") << "\n";

  const auto& r = cfg.run;
  out << "\n[run]\n";
  out << "particles = " << r.particles << "\n";
  out << "iterations = " << r.iterations << "\n";
  out << "replicates = " << r.replicates << "\n";
  out << "seed = " << r.seed << "\n";
  out << "stride = " << r.stride << "\n";
  out << "output = " << r.output << "\n";
  out << "init_mean = " << format_list(r.init_mean) << "\n";
  out << "init_std = " << format_list(r.init_std) << "\n";
  out << "h3 = " << (r.h3 == CosineMode::kRandom ? "random" : "fixed") << "\n";
  out << "h3_omega = " << format_real(r.h3_omega) << "\n";
  out << "h3_phase = " << format_real(r.h3_phase) << "\n";
  out << "timing = " << (r.timing ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace steinflow::harness
