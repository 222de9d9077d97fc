#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "steinmc/csv.hpp"
#include "steinmc/errors.hpp"
#include "steinmc/harness.hpp"

namespace steinmc {

namespace {

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

Field string_field(const char* key, std::string ExperimentConfig::*member) {
  return {key, [member](const ExperimentConfig& c) { return c.*member; },
          [member](ExperimentConfig& c, const std::string& v) { c.*member = v; }};
}

Field double_field(const char* key, double ExperimentConfig::*member) {
  return {key, [member](const ExperimentConfig& c) { return format_double(c.*member); },
          [key, member](ExperimentConfig& c, const std::string& v) { c.*member = to_double(key, v); }};
}

Field int_field(const char* key, int ExperimentConfig::*member) {
  return {key, [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [key, member](ExperimentConfig& c, const std::string& v) {
            c.*member = static_cast<int>(to_integer(key, v));
          }};
}

Field u64_field(const char* key, std::uint64_t ExperimentConfig::*member) {
  return {key, [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [key, member](ExperimentConfig& c, const std::string& v) {
            const long long i = to_integer(key, v);
            if (i < 0) throw ConfigError(std::string("key '") + key + "' must be nonnegative");
            c.*member = static_cast<std::uint64_t>(i);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      string_field("run.preset", &ExperimentConfig::preset),
      string_field("run.method", &ExperimentConfig::method),
      u64_field("run.seed", &ExperimentConfig::seed),
      string_field("run.output_dir", &ExperimentConfig::output_dir),
      int_field("run.n", &ExperimentConfig::n),
      {"run.timing", [](const ExperimentConfig& c) { return std::string(c.timing ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& v) { c.timing = to_bool("run.timing", v); }},
      string_field("spmcmc.crit", &ExperimentConfig::crit),
      int_field("spmcmc.m", &ExperimentConfig::m),
      string_field("spmcmc.removal", &ExperimentConfig::removal),
      double_field("spmcmc.drop_rate", &ExperimentConfig::drop_rate),
      string_field("spmcmc.candidates", &ExperimentConfig::candidates),
      double_field("kernel.beta", &ExperimentConfig::beta),
      string_field("kernel.lambda", &ExperimentConfig::lambda_mode),
      double_field("kernel.lambda_scale", &ExperimentConfig::lambda_scale),
      string_field("mcmc.proposal", &ExperimentConfig::proposal),
      int_field("mcmc.warmup", &ExperimentConfig::warmup),
      int_field("mcmc.preconditioner_chain", &ExperimentConfig::preconditioner_chain),
      string_field("reference.path", &ExperimentConfig::reference_path),
      int_field("reference.size", &ExperimentConfig::reference_size),
      int_field("reference.thin", &ExperimentConfig::reference_thin),
      int_field("reference.energy_every", &ExperimentConfig::energy_every),
      int_field("svgd.iterations", &ExperimentConfig::svgd_iterations),
      int_field("svgd.particles", &ExperimentConfig::svgd_particles),
      double_field("svgd.step", &ExperimentConfig::svgd_step),
      double_field("svgd.momentum", &ExperimentConfig::svgd_momentum),
      string_field("igarch.csv", &ExperimentConfig::igarch_csv),
      double_field("igarch.theta1", &ExperimentConfig::igarch_theta1),
      double_field("igarch.theta2", &ExperimentConfig::igarch_theta2),
      int_field("igarch.T", &ExperimentConfig::igarch_T),
      u64_field("igarch.data_seed", &ExperimentConfig::igarch_data_seed),
      string_field("igarch.start", &ExperimentConfig::igarch_start),
      double_field("toy.sigma", &ExperimentConfig::toy_sigma),
      int_field("toy.dim", &ExperimentConfig::toy_dim),
      string_field("custom.weights", &ExperimentConfig::custom_weights),
      string_field("custom.means", &ExperimentConfig::custom_means),
      double_field("custom.variance", &ExperimentConfig::custom_variance),
  };
  return all;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> kv;
  for (const Field& f : fields()) kv[f.key] = f.get(*this);
  return kv;
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  return cfg;
}

void ExperimentConfig::validate() const {
  if (!one_of(preset, {"gaussian-mixture", "igarch-synthetic", "igarch-csv", "toy-gauss", "custom"})) {
    throw ConfigError("unknown preset '" + preset + "'");
  }
  if (!one_of(method, {"spmcmc", "sp", "med", "svgd", "mcmc"})) throw ConfigError("unknown method '" + method + "'");
  if (!one_of(crit, {"LAST", "RAND", "INFL", "last", "rand", "infl"})) throw ConfigError("unknown criterion '" + crit + "'");
  if (!one_of(removal, {"none", "away", "drop"})) throw ConfigError("unknown removal policy '" + removal + "'");
  if (!one_of(candidates, {"chain", "iid"})) throw ConfigError("unknown candidate source '" + candidates + "'");
  if (!one_of(lambda_mode, {"identity", "scaled-identity", "estimated"})) {
    throw ConfigError("unknown preconditioner mode '" + lambda_mode + "'");
  }
  if (!one_of(proposal, {"mala", "rwm"})) throw ConfigError("unknown proposal '" + proposal + "'");
  if (n < 1) throw ConfigError("run.n must be at least 1");
  if (m < 1) throw ConfigError("spmcmc.m must be at least 1");
  if (!(drop_rate >= 0 && drop_rate < 1)) throw ConfigError("spmcmc.drop_rate must lie in [0, 1)");
  if (!(beta > -1 && beta < 0)) throw ConfigError("kernel.beta must lie in (-1, 0)");
  if (!(lambda_scale > 0)) throw ConfigError("kernel.lambda_scale must be positive");
  if (warmup < 100) throw ConfigError("mcmc.warmup must be at least 100");
  if (preconditioner_chain < 4) throw ConfigError("mcmc.preconditioner_chain is too short");
  if (reference_size != 0 && reference_size < 2) throw ConfigError("reference.size must be 0 (off) or at least 2");
  if (reference_thin < 1) throw ConfigError("reference.thin must be at least 1");
  if (energy_every < 1) throw ConfigError("reference.energy_every must be at least 1");
  if (svgd_iterations < 0 || svgd_particles < 0) throw ConfigError("svgd settings must be nonnegative");
  if (!(svgd_step >= 0)) throw ConfigError("svgd.step must be nonnegative");
  if (!(svgd_momentum >= 0 && svgd_momentum < 1)) throw ConfigError("svgd.momentum must lie in [0, 1)");
  if (!(toy_sigma > 0) || toy_dim < 1) throw ConfigError("toy.sigma and toy.dim must be positive");
  if (!(custom_variance > 0)) throw ConfigError("custom.variance must be positive");
  if (igarch_T < 2) throw ConfigError("igarch.T must be at least 2");
  if (preset == "igarch-csv") {
    if (igarch_csv.empty()) throw ConfigError("preset igarch-csv needs igarch.csv");
    if (!std::filesystem::exists(igarch_csv)) throw ConfigError("igarch.csv file not found: " + igarch_csv);
  }
  if (!reference_path.empty() && !std::filesystem::exists(reference_path)) {
    throw ConfigError("reference.path file not found: " + reference_path);
  }
  if (candidates == "iid" && method != "spmcmc") throw ConfigError("spmcmc.candidates=iid applies to spmcmc only");
}

std::filesystem::path ExperimentConfig::resolved_output_dir() const {
  if (!output_dir.empty()) return output_dir;
  const char* root = std::getenv(kOutputRootEnv);
  const std::filesystem::path base = root && *root ? root : "runs";
  return base / (preset + "-" + method + "-seed" + std::to_string(seed));
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace steinmc
