#pragma once

#include <vector>

#include <Eigen/Cholesky>

#include "steinmc/target.hpp"

namespace steinmc {

/// Finite mixture of Gaussians sum_j w_j N(mu_j, Sigma_j). Supports exact sampling.
class GaussianMixture final : public Target {
 public:
  GaussianMixture(std::vector<double> weights, PointSet means, std::vector<Matrix> covariances);

  /// Equal-weight mixture of N(-1, 0.5 I) and N(+1, 0.5 I) in d = 2, 1 = (1, 1).
  static GaussianMixture symmetric_bimodal();
  static GaussianMixture isotropic(Index d, double sigma);

  Index dim() const override { return dim_; }
  std::string name() const override { return "gaussian-mixture"; }
  double log_density(const Vector& x) const override;
  Vector score(const Vector& x) const override;
  Evaluation evaluate(const Vector& x) const override;

  bool has_exact_sampler() const override { return true; }
  Vector sample(Rng& rng) const override;
  /// Component index and draw, for frequency checks.
  std::pair<std::size_t, Vector> sample_labelled(Rng& rng) const;

  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const PointSet& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }

 private:
  Index dim_;
  std::vector<double> weights_;
  PointSet means_;
  std::vector<Matrix> covariances_;
  std::vector<Eigen::LLT<Matrix>> factors_;
  std::vector<double> log_norm_;  // log w_j - d/2 log 2pi - 1/2 log det Sigma_j
};

}  // namespace steinmc
