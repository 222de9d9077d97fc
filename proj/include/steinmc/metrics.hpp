#pragma once

#include <cstdint>
#include <string>

#include "steinmc/mcmc.hpp"
#include "steinmc/spmcmc.hpp"
#include "steinmc/types.hpp"

namespace steinmc {

/// N x d reference sample standing in for the target, with its cached
/// self-energy N^-2 sum ||z - z'||.
class ReferenceSample {
 public:
  ReferenceSample(Matrix points, std::string provenance);
  /// Trusts a previously computed self-energy (e.g. from a sidecar file).
  ReferenceSample(Matrix points, std::string provenance, double self_energy);

  const Matrix& points() const { return points_; }
  const std::string& provenance() const { return provenance_; }
  double self_energy() const { return self_energy_; }
  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }

 private:
  Matrix points_;
  std::string provenance_;
  double self_energy_;
};

/// Mean pairwise Euclidean distance (1/(n m)) sum_i sum_j ||a_i - b_j|| between the rows of a and b.
double mean_pairwise_distance(const Matrix& a, const Matrix& b);

/// Energy distance (2/nN) sum ||x - z|| - n^-2 sum ||x - x'|| - N^-2 sum ||z - z'||.
double energy_distance(const PointSet& sample, const ReferenceSample& ref);
double energy_distance(const Matrix& sample, const ReferenceSample& ref);

/// Sample covariance (1/(N-1) normalisation) of the rows of `points`.
Matrix sample_covariance(const Matrix& points);

struct PreconditionerEstimate {
  Matrix lambda;
  Vector mean;
  MarkovKernelConfig tuned;  // kernel after warmup adaptation
  ChainState last;
};

/**
 * Runs `warmup` adaptation steps then `chain_len` frozen steps from `init`
 * and returns the path covariance plus 1e-8 tr/d jitter on the diagonal.
 */
PreconditionerEstimate estimate_preconditioner(CountedTarget& target, const MarkovKernelConfig& kernel_cfg,
                                               const Vector& init, int warmup, int chain_len, Rng& rng);

struct QuantileSummary {
  std::size_t count = 0;
  double min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0, mean = 0;
};

/// Linear-interpolation quantiles of the finite values.
QuantileSummary summarise(std::vector<double> values);

struct JumpStatistics {
  QuantileSummary jump_sq;        // ||x_j - x_{j-1}||^2
  QuantileSummary chain_disp_sq;  // ||y_{j,m} - y_{j,1}||^2
};

JumpStatistics jump_statistics(const ExperimentTrace& trace);

}  // namespace steinmc
