#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "steinmc/csv.hpp"
#include "steinmc/metrics.hpp"
#include "steinmc/target.hpp"

namespace steinmc {

/// Environment variable naming the default output root for runs.
inline constexpr const char* kOutputRootEnv = "STEINMC_OUTPUT_ROOT";

/**
 * One experiment: a preset target, a method and its parameters. Every field
 * has a dotted key ("spmcmc.crit", "kernel.beta", ...) used by config files,
 * CLI overrides and the config echo in summary.json.
 */
struct ExperimentConfig {
  // run
  std::string preset = "gaussian-mixture";  // gaussian-mixture | igarch-synthetic | igarch-csv | toy-gauss | custom
  std::string method = "spmcmc";            // spmcmc | sp | med | svgd | mcmc
  std::uint64_t seed = 1;
  std::string output_dir;
  int n = 1000;
  bool timing = false;
  // spmcmc
  std::string crit = "INFL";
  int m = 5;
  std::string removal = "none";  // none | away | drop
  double drop_rate = 0.25;
  std::string candidates = "chain";  // chain | iid
  // kernel
  double beta = -0.5;
  std::string lambda_mode = "estimated";  // identity | scaled-identity | estimated
  double lambda_scale = 1.0;
  // mcmc
  std::string proposal = "mala";  // mala | rwm
  int warmup = 2000;
  int preconditioner_chain = 2000;
  // reference
  std::string reference_path;
  int reference_size = 100000;
  int reference_thin = 10;
  int energy_every = 25;
  // svgd
  int svgd_iterations = 500;
  int svgd_particles = 0;  // 0: use n
  double svgd_step = 1e-3;
  double svgd_momentum = 0.9;
  // igarch
  std::string igarch_csv;
  double igarch_theta1 = 0.01;
  double igarch_theta2 = 0.2;
  int igarch_T = 2000;
  std::uint64_t igarch_data_seed = 2005;
  std::string igarch_start = "0.02,0.15";
  // toy-gauss
  double toy_sigma = 0.01;
  int toy_dim = 2;
  // custom mixture
  std::string custom_weights = "0.5,0.5";
  std::string custom_means = "-1,-1;1,1";
  double custom_variance = 0.5;

  void set(const std::string& key, const std::string& value);
  /// All keys with their current values, as strings.
  std::map<std::string, std::string> to_map() const;
  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
  /// Checks enumerations, ranges and that referenced files exist. Throws ConfigError.
  void validate() const;
  std::filesystem::path resolved_output_dir() const;
};

/// Parses "key = value" lines with optional [section] headers (keys become
/// "section.key"); '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// Target built from a preset plus a descriptor identifying it across runs.
struct PresetTarget {
  std::unique_ptr<Target> target;
  std::string descriptor;
  Vector start;
};

PresetTarget make_preset_target(const ExperimentConfig& cfg);

struct RunSummary {
  std::string status = "ok";  // ok | failed
  std::string error;
  std::string target;
  std::uint64_t n_eval = 0;
  std::size_t n_points = 0;
  double final_ksd = 0;
  std::optional<double> final_energy;
  double wall_time_s = 0;
  std::filesystem::path output_dir;
};

/// Runs one experiment and writes trace.csv, points.csv, summary.json (and
/// energy.csv when a reference sample is available) into the output directory.
/// Runtime failures write a summary flagged "failed" and are rethrown.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Runs `count` consecutive seeds concurrently, each into <output_dir>/seed_<s>.
std::vector<RunSummary> run_sweep(const ExperimentConfig& cfg, int count);

/// Builds a reference sample for the preset: exact draws when available,
/// otherwise a thinned long MALA run.
ReferenceSample build_reference(const ExperimentConfig& cfg, const Target& target, std::size_t size);

/// Metric-vs-n_eval table over completed run directories: column "n_eval" plus
/// one column per run. Refuses runs on different targets.
CsvTable compare_runs(const std::vector<std::filesystem::path>& run_dirs, const std::string& metric);

/// Last non-empty value of each run column of a compare table.
std::vector<double> final_values(const CsvTable& table);

/// Runs the built-in oracle checks, printing one line per check. Returns the failure count.
int run_selftest(std::ostream& out);

}  // namespace steinmc
