#pragma once

#include <vector>

#include "steinmc/target.hpp"

namespace steinmc {

enum class ProposalKind { Rwm, Mala };

/// Acceptance rates recommended for random-walk and Langevin proposals.
inline constexpr double kRwmTargetAcceptance = 0.234;
inline constexpr double kMalaTargetAcceptance = 0.574;

/**
 * Metropolis-Hastings transition with proposal
 *   RWM:  y = x + sqrt(h) xi
 *   MALA: y = x + (h/2) Sigma grad log p(x) + sqrt(h) xi
 * where xi ~ N(0, Sigma). Sigma is factored once at construction.
 */
class MarkovKernelConfig {
 public:
  MarkovKernelConfig(ProposalKind kind, double step_size, Matrix proposal_cov, double target_acceptance = -1.0);

  static MarkovKernelConfig rwm(Index d, double step_size = 1.0);
  static MarkovKernelConfig mala(Index d, double step_size = 1.0);

  ProposalKind kind() const { return kind_; }
  double step_size() const { return step_size_; }
  const Matrix& proposal_cov() const { return proposal_cov_; }
  const Matrix& proposal_factor() const { return factor_; }
  double target_acceptance() const { return target_acceptance_; }
  Index dim() const { return proposal_cov_.rows(); }

  MarkovKernelConfig with_step_size(double h) const;
  MarkovKernelConfig with_proposal_cov(Matrix sigma) const;

 private:
  ProposalKind kind_;
  double step_size_;
  Matrix proposal_cov_;
  Matrix factor_;  // lower Cholesky factor of proposal_cov_
  double target_acceptance_;
};

/// Current chain position with the log density and score evaluated there.
struct ChainState {
  Vector x;
  double log_p = 0;
  Vector score;
  bool accepted = false;
};

/// Evaluates the target at x (one fused evaluation) to start a chain.
ChainState initial_state(CountedTarget& target, const Vector& x);

ChainState rwm_step(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng);
ChainState mala_step(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng);
/// Dispatches on cfg.kind().
ChainState transition(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng);

/// Log of the MALA proposal density q(from -> to) up to a constant shared by both directions.
double mala_log_proposal(const Vector& from, const Vector& from_score, const Vector& to,
                         const MarkovKernelConfig& cfg);

/**
 * Robbins-Monro tuning of log h towards cfg.target_acceptance() over batches
 * of 50 steps with gain t^-0.6; h is clamped to [1e-10, 1e4] and frozen after
 * `warmup` steps. `state` is advanced in place.
 */
MarkovKernelConfig adapt_step_size(const MarkovKernelConfig& cfg, CountedTarget& target, ChainState& state,
                                   int warmup, Rng& rng);

inline constexpr int kAdaptationBatch = 50;
inline constexpr double kMinStepSize = 1e-10;
inline constexpr double kMaxStepSize = 1e4;

/**
 * Doubles or halves h until the mean one-step acceptance probability from
 * `state` crosses one half. Seeds adaptation when the target scale is unknown.
 */
MarkovKernelConfig find_initial_step_size(const MarkovKernelConfig& cfg, CountedTarget& target,
                                          const ChainState& state, Rng& rng);

/// Sample path y_1..y_m after m transitions from `init` (exactly m evaluations).
std::vector<ChainState> run_chain(const MarkovKernelConfig& cfg, CountedTarget& target, const ChainState& init,
                                  int m, Rng& rng);

}  // namespace steinmc
