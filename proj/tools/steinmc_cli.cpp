#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steinmc/csv.hpp"
#include "steinmc/errors.hpp"
#include "steinmc/harness.hpp"

using namespace steinmc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// CLI flag -> config key. Flags win over the config file.
const std::vector<std::pair<std::string, std::string>> kRunFlags = {
    {"preset", "run.preset"},
    {"method", "run.method"},
    {"seed", "run.seed"},
    {"out", "run.output_dir"},
    {"n", "run.n"},
    {"crit", "spmcmc.crit"},
    {"m", "spmcmc.m"},
    {"removal", "spmcmc.removal"},
    {"drop-rate", "spmcmc.drop_rate"},
    {"candidates", "spmcmc.candidates"},
    {"beta", "kernel.beta"},
    {"lambda", "kernel.lambda"},
    {"lambda-scale", "kernel.lambda_scale"},
    {"proposal", "mcmc.proposal"},
    {"warmup", "mcmc.warmup"},
    {"reference", "reference.path"},
    {"reference-size", "reference.size"},
    {"csv", "igarch.csv"},
};

void print_summary(const RunSummary& s) {
  std::cout << s.output_dir.string() << ": " << s.n_points << " points, n_eval=" << s.n_eval
            << ", ksd=" << format_double(s.final_ksd);
  if (s.final_energy) std::cout << ", energy=" << format_double(*s.final_energy);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy Stein-discrepancy point sets from Markov chain candidates"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment (or a seed sweep)");
  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::vector<std::string> sets;
  bool timing = false;
  int sweep = 0;
  run->add_option("--config", config_path, "config file (key = value, [section] headers)");
  for (const auto& [flag, key] : kRunFlags) run->add_option("--" + flag, flag_values[flag], key);
  run->add_option("--set", sets, "extra override key=value (repeatable)");
  run->add_flag("--timing", timing, "record wall-clock time in trace.csv");
  run->add_option("--sweep", sweep, "run this many consecutive seeds in parallel");

  auto* compare = app.add_subcommand("compare", "tabulate a metric against n_eval across runs");
  std::vector<std::string> run_dirs;
  std::string metric = "ksd", compare_out;
  compare->add_option("dirs", run_dirs, "run directories")->required();
  compare->add_option("--metric", metric, "ksd | energy");
  compare->add_option("--out", compare_out, "write the table here instead of stdout");

  auto* reference = app.add_subcommand("reference", "build a reference sample for a preset");
  std::string ref_config, ref_preset, ref_out, ref_csv;
  int ref_size = 0;
  std::optional<std::uint64_t> ref_seed;
  reference->add_option("--config", ref_config);
  reference->add_option("--preset", ref_preset);
  reference->add_option("--size", ref_size);
  reference->add_option("--seed", ref_seed);
  reference->add_option("--csv", ref_csv, "IGARCH return series");
  reference->add_option("--out", ref_out, "output CSV path")->required();

  app.add_subcommand("selftest", "run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        for (const auto& [k, v] : parse_config_file(config_path)) cfg.set(k, v);
      }
      for (const auto& [flag, key] : kRunFlags) {
        if (run->count("--" + flag) > 0) cfg.set(key, flag_values[flag]);
      }
      for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (timing) cfg.timing = true;
      if (run->count("--sweep") > 0) {
        for (const RunSummary& s : run_sweep(cfg, sweep)) print_summary(s);
      } else {
        print_summary(run_experiment(cfg));
      }
    } else if (*compare) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const CsvTable table = compare_runs(dirs, metric);
      if (compare_out.empty()) {
        std::cout << table.header.front();
        for (std::size_t c = 1; c < table.header.size(); ++c) std::cout << ',' << table.header[c];
        std::cout << '\n';
        for (const auto& row : table.rows) {
          for (std::size_t c = 0; c < row.size(); ++c) std::cout << (c ? "," : "") << row[c];
          std::cout << '\n';
        }
      } else {
        write_csv(compare_out, table);
      }
    } else if (*reference) {
      ExperimentConfig cfg;
      if (!ref_config.empty()) {
        for (const auto& [k, v] : parse_config_file(ref_config)) cfg.set(k, v);
      }
      if (!ref_preset.empty()) cfg.preset = ref_preset;
      if (!ref_csv.empty()) cfg.igarch_csv = ref_csv;
      if (ref_seed) cfg.seed = *ref_seed;
      if (ref_size > 0) cfg.reference_size = ref_size;
      cfg.validate();
      const PresetTarget preset = make_preset_target(cfg);
      const ReferenceSample ref =
          build_reference(cfg, *preset.target, static_cast<std::size_t>(cfg.reference_size));
      write_reference(ref_out, ref, cfg.seed, preset.descriptor);
      std::cout << ref_out << ": N=" << ref.size() << ", " << ref.provenance() << '\n';
    } else {
      return run_selftest(std::cout) == 0 ? 0 : kExitRuntime;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
