#include "steinmc/igarch.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "steinmc/errors.hpp"

namespace steinmc {

namespace {

double sample_variance(const std::vector<double>& y) {
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(y.size() - 1);
}

}  // namespace

IgarchPosterior::IgarchPosterior(std::vector<double> returns, std::optional<double> sigma1_sq)
    : returns_(std::move(returns)) {
  if (returns_.size() < 2) throw ConfigError("IGARCH needs at least two returns");
  for (double v : returns_) {
    if (!std::isfinite(v)) throw ConfigError("IGARCH returns must be finite");
  }
  sigma1_sq_ = sigma1_sq ? *sigma1_sq : sample_variance(returns_);
  if (!(sigma1_sq_ > 0)) throw ConfigError("IGARCH initial variance must be positive");
}

Support IgarchPosterior::support() const {
  return Support::box(Vector::Zero(2), Vector{{std::numeric_limits<double>::infinity(), 1.0}});
}

Evaluation IgarchPosterior::evaluate_impl(const Vector& theta, bool with_gradient) const {
  require_dim(2, theta.size(), "IGARCH parameter");
  if (!theta.allFinite()) throw ArgumentError("IGARCH parameter must be finite");
  Evaluation out;
  if (!in_support(theta)) {
    out.score = Vector::Constant(2, std::nan(""));
    return out;
  }
  const double a = theta(0), b = theta(1);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double s = sigma1_sq_, ds_da = 0, ds_db = 0;
  double lp = 0, g_a = 0, g_b = 0;
  for (std::size_t t = 1; t < returns_.size(); ++t) {
    const double y_prev_sq = returns_[t - 1] * returns_[t - 1];
    if (with_gradient) {
      const double next_da = 1.0 + (1.0 - b) * ds_da;
      const double next_db = y_prev_sq - s + (1.0 - b) * ds_db;
      ds_da = next_da;
      ds_db = next_db;
    }
    s = a + b * y_prev_sq + (1.0 - b) * s;
    const double y_sq = returns_[t] * returns_[t];
    lp += -0.5 * (log2pi + std::log(s)) - 0.5 * y_sq / s;
    if (with_gradient) {
      const double dl_ds = -0.5 / s + 0.5 * y_sq / (s * s);
      g_a += dl_ds * ds_da;
      g_b += dl_ds * ds_db;
    }
  }
  out.log_p = lp;
  out.score = with_gradient ? Vector{{g_a, g_b}} : Vector();
  return out;
}

double IgarchPosterior::log_density(const Vector& theta) const { return evaluate_impl(theta, false).log_p; }

Vector IgarchPosterior::score(const Vector& theta) const { return evaluate_impl(theta, true).score; }

Evaluation IgarchPosterior::evaluate(const Vector& theta) const { return evaluate_impl(theta, true); }

IgarchSeries igarch_synthesize(const Vector& theta_true, std::size_t T, Rng& rng, std::optional<double> sigma1_sq) {
  require_dim(2, theta_true.size(), "IGARCH parameter");
  const double a = theta_true(0), b = theta_true(1);
  if (!(a > 0 && b > 0 && b < 1)) throw ConfigError("IGARCH parameter outside (0, inf) x (0, 1)");
  if (T < 1) throw ArgumentError("IGARCH series length must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  IgarchSeries out;
  out.returns.resize(T);
  out.variances.resize(T);
  double s = sigma1_sq ? *sigma1_sq : a / b;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) s = a + b * out.returns[t - 1] * out.returns[t - 1] + (1.0 - b) * s;
    out.variances[t] = s;
    out.returns[t] = std::sqrt(s) * normal(rng);
  }
  return out;
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series file " + path.string());
  std::vector<double> out;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto comma = line.find(','); comma != std::string::npos) line = line.substr(0, comma);
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("series file " + path.string() + ": bad value on line " + std::to_string(lineno));
    }
    first = false;
    out.push_back(v);
  }
  return out;
}

}  // namespace steinmc
