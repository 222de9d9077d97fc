#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "steinmc/ksd_state.hpp"
#include "steinmc/mcmc.hpp"
#include "steinmc/target.hpp"

namespace steinmc {

/// Chain length at iteration j (j >= 2).
using ChainLengthSchedule = std::function<int(int j)>;

ChainLengthSchedule constant_schedule(int m);
/// m_j = max(1, ceil(scale * j^exponent)).
ChainLengthSchedule power_schedule(double scale, double exponent);

enum class InitCriterion { Last, Rand, Infl, Custom };

std::string to_string(InitCriterion crit);
InitCriterion parse_criterion(const std::string& s);

/// User-supplied chain initialisation rule: returns an index into the current set.
using CustomCriterion = std::function<std::size_t(const QuantisationState&, Rng&)>;

struct RemovalPolicy {
  enum class Kind { None, Away, Drop };
  Kind kind = Kind::None;
  double drop_rate = 0.0;

  static RemovalPolicy none() { return {}; }
  static RemovalPolicy away() { return {Kind::Away, 0.0}; }
  static RemovalPolicy drop(double rate) { return {Kind::Drop, rate}; }
};

/// Where candidates come from: a Markov chain started at the selected point,
/// or iid exact draws from the target (requires Target::has_exact_sampler).
struct CandidateSource {
  enum class Kind { MarkovChain, IidExact };
  Kind kind = Kind::MarkovChain;
  std::optional<MarkovKernelConfig> kernel;

  static CandidateSource chain(MarkovKernelConfig cfg) { return {Kind::MarkovChain, std::move(cfg)}; }
  static CandidateSource iid_exact() { return {Kind::IidExact, std::nullopt}; }
};

struct SpMcmcConfig {
  std::size_t n = 1;
  ChainLengthSchedule m_schedule = constant_schedule(5);
  InitCriterion crit = InitCriterion::Infl;
  CustomCriterion custom_crit;
  CandidateSource candidate_source;
  RemovalPolicy removal;
  Vector x1;

  void validate(const Target& target) const;
};

enum class TraceAction { Add, Remove };

struct TraceRecord {
  int iteration = 0;
  TraceAction action = TraceAction::Add;
  Vector point;
  std::size_t set_size = 0;
  double ksd = 0;
  std::uint64_t n_eval = 0;
  double elapsed_s = 0;
  /// ||x_j - x_{j-1}||^2 against the previously added point; NaN when undefined.
  double jump_sq = std::numeric_limits<double>::quiet_NaN();
  /// ||y_{j,m} - y_{j,1}||^2 for the chain that produced this point; NaN when undefined.
  double chain_disp_sq = std::numeric_limits<double>::quiet_NaN();
  /// add_score of every candidate considered in this iteration, and the chosen index.
  std::vector<double> candidate_scores;
  std::size_t chosen = 0;
  /// Index removed (Remove records only).
  std::size_t removed_index = 0;
};

struct ExperimentTrace {
  std::vector<TraceRecord> records;

  std::size_t adds() const;
  std::size_t removes() const;
};

struct QuantisationResult {
  QuantisationState state;
  ExperimentTrace trace;
};

/// Index of the point to start the next chain from. INFL falls back to LAST when n == 1.
std::size_t select_init(InitCriterion crit, const QuantisationState& state, Rng& rng,
                        const CustomCriterion& custom = {});

struct RemovalDecision {
  enum class Action { Add, Remove };
  Action action = Action::Add;
  std::size_t index = 0;
};

/**
 * Away: compares D(set) - D(set + best candidate) with D(set) - D(set - worst)
 * and removes the worst point when the latter is at least as large.
 * Drop: with probability drop_rate removes the worst point (before the add).
 * Never proposes removal from a set of fewer than two points.
 */
RemovalDecision away_or_drop(const QuantisationState& state, double pending_candidate_score,
                             const RemovalPolicy& policy, Rng& rng);

/// Stopwatch shared by the greedy loops for trace timestamps.
class TraceClock {
 public:
  TraceClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/**
 * Greedy KSD minimisation over Markov-chain candidate sets.
 *
 * Cost: one evaluation for x1 plus m_j per iteration, all scores reused by
 * the bookkeeping. With a removal policy the loop runs until the set has n
 * points, failing after 10 n iterations.
 */
QuantisationResult spmcmc_run(const SpMcmcConfig& cfg, CountedTarget& target, const SteinKernel& ctx, Rng& rng);

/// Index of the smallest value, earliest on ties; non-finite values never win.
std::optional<std::size_t> argmin_finite(const std::vector<double>& values);

}  // namespace steinmc
