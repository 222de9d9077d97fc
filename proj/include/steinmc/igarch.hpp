#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "steinmc/target.hpp"

namespace steinmc {

/**
 * Posterior of theta = (theta1, theta2) in an IGARCH(1,1) model under an
 * improper flat prior on (0, inf) x (0, 1):
 *
 *   y_t = sigma_t eps_t,  sigma_t^2 = theta1 + theta2 y_{t-1}^2 + (1 - theta2) sigma_{t-1}^2.
 *
 * The likelihood sums t = 2..T with sigma_1^2 fixed (default: sample variance of y).
 */
class IgarchPosterior final : public Target {
 public:
  explicit IgarchPosterior(std::vector<double> returns, std::optional<double> sigma1_sq = std::nullopt);

  Index dim() const override { return 2; }
  std::string name() const override { return "igarch"; }
  double log_density(const Vector& theta) const override;
  Vector score(const Vector& theta) const override;
  Evaluation evaluate(const Vector& theta) const override;
  Support support() const override;

  const std::vector<double>& returns() const { return returns_; }
  double sigma1_sq() const { return sigma1_sq_; }

 private:
  Evaluation evaluate_impl(const Vector& theta, bool with_gradient) const;

  std::vector<double> returns_;
  double sigma1_sq_;
};

struct IgarchSeries {
  std::vector<double> returns;
  std::vector<double> variances;  // sigma_t^2
};

/// Simulates T returns from the IGARCH recursion. sigma_1^2 defaults to theta1 / theta2.
IgarchSeries igarch_synthesize(const Vector& theta_true, std::size_t T, Rng& rng,
                               std::optional<double> sigma1_sq = std::nullopt);

/// Reads one real per line; a non-numeric first line is treated as a header.
std::vector<double> read_series_csv(const std::filesystem::path& path);

}  // namespace steinmc
