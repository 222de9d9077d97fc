#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "steinmc/kernel.hpp"
#include "steinmc/mcmc.hpp"
#include "steinmc/spmcmc.hpp"

namespace steinmc {

/// Adaptive Monte Carlo search: with probability alpha(j) draw n_test points
/// from N(mu0, Sigma0), otherwise from an equal-weight mixture of N(x_i, lambda(j) I)
/// over the current points.
struct AdaptiveSearchConfig {
  int n_test = 5;
  std::function<double(int j)> alpha;
  Vector mu0;
  Matrix sigma0;
  std::function<double(int j)> lambda_mix;

  /// alpha_j = max(0.1, 1/sqrt(j)), lambda_j = tr(Sigma0) / (d j^(2/d)).
  static AdaptiveSearchConfig with_defaults(Vector mu0, Matrix sigma0, int n_test);
  void validate() const;
};

/// One batch of n_test search points for iteration j.
PointSet draw_search_batch(const AdaptiveSearchConfig& cfg, const PointSet& state_points, int j, Rng& rng);

/// Draws a batch and returns the point minimising `objective` (earliest on ties).
Vector adaptive_search(const AdaptiveSearchConfig& cfg, const std::function<double(const Vector&)>& objective,
                       const PointSet& state_points, int j, Rng& rng);

/// Greedy Stein points with adaptive Monte Carlo search. Cost: n * n_test evaluations.
QuantisationResult sp_run(const AdaptiveSearchConfig& search, CountedTarget& target, const SteinKernel& ctx,
                          std::size_t n, Rng& rng);

struct MedResult {
  PointSet points;
  std::vector<double> log_p;
  std::vector<std::uint64_t> n_eval;  // cumulative evaluations after each point
};

/// Objective maximised by greedy minimum-energy design at candidate x.
double med_objective(const PointSet& points, const std::vector<double>& log_p, const Vector& x, double log_p_x);

/// Greedy minimum-energy design (delta -> infinity form). Uses log p~ only;
/// cost n * n_test evaluations.
MedResult med_run(const AdaptiveSearchConfig& search, CountedTarget& target, std::size_t n, Rng& rng);

struct SvgdConfig {
  int n_particles = 100;
  double epsilon_master = 1e-3;
  double momentum = 0.9;
  int iterations = 500;
  std::function<Vector(Rng&)> init_sampler;
  static constexpr double kJitter = 1e-8;

  void validate() const;
};

/// Stein variational direction g*(x_i) = (1/n) sum_j [k(x_j, x_i) s(x_j) + grad_{x_j} k(x_j, x_i)].
PointSet svgd_direction(const Imq& kernel, const PointSet& particles, const PointSet& scores);

struct SvgdResult {
  PointSet particles;
  std::uint64_t n_eval = 0;
};

/// Called after each iteration with (iteration, particles, n_eval).
using SvgdObserver = std::function<void(int, const PointSet&, std::uint64_t)>;

/// SVGD with Adagrad-with-momentum step sizes: a <- mu a + (1 - mu) g^2,
/// x <- x + eps g / (1e-8 + sqrt(a)). Cost: n_particles evaluations per iteration.
SvgdResult svgd_run(const SvgdConfig& cfg, CountedTarget& target, const Imq& kernel, Rng& rng,
                    const SvgdObserver& observer = {});

/// One MALA/RWM path of length m n started at `init` (the start counts as the first
/// state); returns every m-th state. Cost: m n evaluations.
std::vector<ChainState> mcmc_thin_run(const MarkovKernelConfig& cfg, CountedTarget& target, const Vector& init,
                                      std::size_t n, int m, Rng& rng);

}  // namespace steinmc
