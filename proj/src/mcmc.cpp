#include "steinmc/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "steinmc/errors.hpp"

namespace steinmc {

MarkovKernelConfig::MarkovKernelConfig(ProposalKind kind, double step_size, Matrix proposal_cov,
                                       double target_acceptance)
    : kind_(kind), step_size_(step_size), proposal_cov_(std::move(proposal_cov)) {
  if (!(step_size_ > 0) || !std::isfinite(step_size_)) throw ConfigError("step size must be positive");
  if (proposal_cov_.rows() == 0 || proposal_cov_.rows() != proposal_cov_.cols()) {
    throw ConfigError("proposal covariance must be square");
  }
  Eigen::LLT<Matrix> llt(proposal_cov_);
  if (llt.info() != Eigen::Success) throw ConfigError("proposal covariance is not positive definite");
  factor_ = llt.matrixL();
  if (target_acceptance < 0) {
    target_acceptance = kind == ProposalKind::Mala ? kMalaTargetAcceptance : kRwmTargetAcceptance;
  }
  if (!(target_acceptance > 0 && target_acceptance < 1)) throw ConfigError("target acceptance must lie in (0, 1)");
  target_acceptance_ = target_acceptance;
}

MarkovKernelConfig MarkovKernelConfig::rwm(Index d, double step_size) {
  return {ProposalKind::Rwm, step_size, Matrix::Identity(d, d)};
}

MarkovKernelConfig MarkovKernelConfig::mala(Index d, double step_size) {
  return {ProposalKind::Mala, step_size, Matrix::Identity(d, d)};
}

MarkovKernelConfig MarkovKernelConfig::with_step_size(double h) const {
  return {kind_, h, proposal_cov_, target_acceptance_};
}

MarkovKernelConfig MarkovKernelConfig::with_proposal_cov(Matrix sigma) const {
  return {kind_, step_size_, std::move(sigma), target_acceptance_};
}

ChainState initial_state(CountedTarget& target, const Vector& x) {
  Evaluation e = target.evaluate(x);
  if (!std::isfinite(e.log_p) || !e.score.allFinite()) {
    throw ArgumentError("chain initial point has zero density or a non-finite score");
  }
  return {x, e.log_p, std::move(e.score), true};
}

namespace {

bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

}  // namespace

ChainState rwm_step(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng) {
  require_dim(cfg.dim(), state.x.size(), "RWM state");
  Vector y = state.x + std::sqrt(cfg.step_size()) * (cfg.proposal_factor() * standard_normal(cfg.dim(), rng));
  Evaluation e = target.evaluate(y);
  const bool ok = std::isfinite(e.log_p) && e.score.allFinite();
  if (ok && accept(e.log_p - state.log_p, rng)) return {std::move(y), e.log_p, std::move(e.score), true};
  ChainState next = state;
  next.accepted = false;
  return next;
}

double mala_log_proposal(const Vector& from, const Vector& from_score, const Vector& to,
                         const MarkovKernelConfig& cfg) {
  const double h = cfg.step_size();
  const Vector mean = from + 0.5 * h * (cfg.proposal_cov() * from_score);
  const Vector z = cfg.proposal_factor().triangularView<Eigen::Lower>().solve(to - mean);
  return -0.5 * z.squaredNorm() / h;
}

ChainState mala_step(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng) {
  require_dim(cfg.dim(), state.x.size(), "MALA state");
  const double h = cfg.step_size();
  Vector y = state.x + 0.5 * h * (cfg.proposal_cov() * state.score) +
             std::sqrt(h) * (cfg.proposal_factor() * standard_normal(cfg.dim(), rng));
  Evaluation e = target.evaluate(y);
  if (std::isfinite(e.log_p) && e.score.allFinite()) {
    const double log_ratio = e.log_p - state.log_p + mala_log_proposal(y, e.score, state.x, cfg) -
                             mala_log_proposal(state.x, state.score, y, cfg);
    if (accept(log_ratio, rng)) return {std::move(y), e.log_p, std::move(e.score), true};
  }
  ChainState next = state;
  next.accepted = false;
  return next;
}

ChainState transition(const ChainState& state, const MarkovKernelConfig& cfg, CountedTarget& target, Rng& rng) {
  return cfg.kind() == ProposalKind::Mala ? mala_step(state, cfg, target, rng) : rwm_step(state, cfg, target, rng);
}

MarkovKernelConfig adapt_step_size(const MarkovKernelConfig& cfg, CountedTarget& target, ChainState& state,
                                   int warmup, Rng& rng) {
  if (warmup < 100) throw ConfigError("step-size adaptation needs at least 100 warmup steps");
  const double lo = std::log(kMinStepSize), hi = std::log(kMaxStepSize);
  double log_h = std::clamp(std::log(cfg.step_size()), lo, hi);
  MarkovKernelConfig current = cfg.with_step_size(std::clamp(std::exp(log_h), kMinStepSize, kMaxStepSize));
  int batch_accepts = 0, in_batch = 0, t = 0;
  for (int step = 0; step < warmup; ++step) {
    state = transition(state, current, target, rng);
    batch_accepts += state.accepted ? 1 : 0;
    if (++in_batch == kAdaptationBatch) {
      ++t;
      const double rate = static_cast<double>(batch_accepts) / kAdaptationBatch;
      log_h = std::clamp(log_h + std::pow(static_cast<double>(t), -0.6) * (rate - cfg.target_acceptance()), lo, hi);
      current = current.with_step_size(std::clamp(std::exp(log_h), kMinStepSize, kMaxStepSize));
      batch_accepts = 0;
      in_batch = 0;
    }
  }
  return current;
}

namespace {

double mean_acceptance(const MarkovKernelConfig& cfg, CountedTarget& target, const ChainState& state, Rng& rng) {
  constexpr int kProbes = 4;
  const double h = cfg.step_size();
  double total = 0;
  for (int p = 0; p < kProbes; ++p) {
    Vector noise = std::sqrt(h) * (cfg.proposal_factor() * standard_normal(cfg.dim(), rng));
    Vector y = state.x + noise;
    if (cfg.kind() == ProposalKind::Mala) y += 0.5 * h * (cfg.proposal_cov() * state.score);
    const Evaluation e = target.evaluate(y);
    if (!std::isfinite(e.log_p) || !e.score.allFinite()) continue;
    double log_ratio = e.log_p - state.log_p;
    if (cfg.kind() == ProposalKind::Mala) {
      log_ratio += mala_log_proposal(y, e.score, state.x, cfg) - mala_log_proposal(state.x, state.score, y, cfg);
    }
    if (!std::isnan(log_ratio)) total += std::exp(std::min(0.0, log_ratio));
  }
  return total / kProbes;
}

}  // namespace

MarkovKernelConfig find_initial_step_size(const MarkovKernelConfig& cfg, CountedTarget& target,
                                          const ChainState& state, Rng& rng) {
  double h = std::clamp(cfg.step_size(), kMinStepSize, kMaxStepSize);
  const bool grow = mean_acceptance(cfg.with_step_size(h), target, state, rng) > 0.5;
  for (int k = 0; k < 200; ++k) {
    const double next = grow ? 2.0 * h : 0.5 * h;
    if (next < kMinStepSize || next > kMaxStepSize) break;
    const double a = mean_acceptance(cfg.with_step_size(next), target, state, rng);
    if (grow ? a < 0.5 : a > 0.5) return cfg.with_step_size(grow ? h : next);
    h = next;
  }
  return cfg.with_step_size(h);
}

std::vector<ChainState> run_chain(const MarkovKernelConfig& cfg, CountedTarget& target, const ChainState& init,
                                  int m, Rng& rng) {
  if (m < 1) throw ArgumentError("chain length must be at least 1");
  std::vector<ChainState> path;
  path.reserve(static_cast<std::size_t>(m));
  const ChainState* current = &init;
  for (int l = 0; l < m; ++l) {
    path.push_back(transition(*current, cfg, target, rng));
    current = &path.back();
  }
  return path;
}

}  // namespace steinmc
