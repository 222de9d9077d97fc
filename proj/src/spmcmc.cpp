#include "steinmc/spmcmc.hpp"

#include <algorithm>
#include <cmath>

#include "steinmc/errors.hpp"

namespace steinmc {

ChainLengthSchedule constant_schedule(int m) {
  if (m < 1) throw ConfigError("chain length must be at least 1");
  return [m](int) { return m; };
}

ChainLengthSchedule power_schedule(double scale, double exponent) {
  if (!(scale > 0)) throw ConfigError("schedule scale must be positive");
  return [scale, exponent](int j) {
    return std::max(1, static_cast<int>(std::ceil(scale * std::pow(static_cast<double>(j), exponent))));
  };
}

std::string to_string(InitCriterion crit) {
  switch (crit) {
    case InitCriterion::Last: return "LAST";
    case InitCriterion::Rand: return "RAND";
    case InitCriterion::Infl: return "INFL";
    case InitCriterion::Custom: return "CUSTOM";
  }
  return "?";
}

InitCriterion parse_criterion(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (u == "LAST") return InitCriterion::Last;
  if (u == "RAND") return InitCriterion::Rand;
  if (u == "INFL") return InitCriterion::Infl;
  throw ConfigError("unknown criterion '" + s + "' (expected LAST, RAND or INFL)");
}

void SpMcmcConfig::validate(const Target& target) const {
  if (n < 1) throw ConfigError("point count n must be at least 1");
  if (!m_schedule) throw ConfigError("missing chain length schedule");
  require_dim(target.dim(), x1.size(), "initial point");
  if (!target.in_support(x1)) throw ConfigError("initial point lies outside the target support");
  if (crit == InitCriterion::Custom && !custom_crit) throw ConfigError("custom criterion without a callback");
  if (candidate_source.kind == CandidateSource::Kind::MarkovChain) {
    if (!candidate_source.kernel) throw ConfigError("Markov-chain candidate source without a kernel");
    require_dim(target.dim(), candidate_source.kernel->dim(), "proposal covariance");
  } else if (!target.has_exact_sampler()) {
    throw ConfigError("iid-exact candidates need a target with an exact sampler");
  }
  if (removal.kind == RemovalPolicy::Kind::Drop && !(removal.drop_rate >= 0 && removal.drop_rate < 1)) {
    throw ConfigError("drop rate must lie in [0, 1)");
  }
}

std::size_t ExperimentTrace::adds() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const TraceRecord& r) { return r.action == TraceAction::Add; }));
}

std::size_t ExperimentTrace::removes() const { return records.size() - adds(); }

std::size_t select_init(InitCriterion crit, const QuantisationState& state, Rng& rng, const CustomCriterion& custom) {
  if (state.empty()) throw UndefinedStateError("cannot select a chain start from an empty set");
  const std::size_t last = state.size() - 1;
  switch (crit) {
    case InitCriterion::Last:
      return last;
    case InitCriterion::Rand:
      return std::uniform_int_distribution<std::size_t>(0, last)(rng);
    case InitCriterion::Infl:
      return state.size() == 1 ? last : state.most_influential();
    case InitCriterion::Custom: {
      if (!custom) throw ConfigError("custom criterion without a callback");
      const std::size_t i = custom(state, rng);
      if (i >= state.size()) throw ArgumentError("custom criterion returned an out-of-range index");
      return i;
    }
  }
  return last;
}

RemovalDecision away_or_drop(const QuantisationState& state, double pending_candidate_score,
                             const RemovalPolicy& policy, Rng& rng) {
  using Action = RemovalDecision::Action;
  switch (policy.kind) {
    case RemovalPolicy::Kind::None:
      return {};
    case RemovalPolicy::Kind::Away: {
      if (state.size() < 2) return {};
      const std::size_t worst = state.least_influential();
      const double current = state.ksd();
      const double gain_good = current - state.ksd_after_add(pending_candidate_score);
      const double gain_bad = current - state.removal_ksd(worst);
      if (gain_bad >= gain_good) return {Action::Remove, worst};
      return {};
    }
    case RemovalPolicy::Kind::Drop: {
      if (policy.drop_rate <= 0) return {};
      const bool fire = uniform01(rng) < policy.drop_rate;
      if (!fire || state.size() < 2) return {};
      return {Action::Remove, state.least_influential()};
    }
  }
  return {};
}

std::optional<std::size_t> argmin_finite(const std::vector<double>& values) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (!best || values[i] < values[*best]) best = i;
  }
  return best;
}

namespace {

struct Candidate {
  Vector x;
  Vector score;
  double log_p;
};

std::vector<Candidate> draw_candidates(const SpMcmcConfig& cfg, const QuantisationState& state,
                                       CountedTarget& target, int m, Rng& rng, double& chain_disp_sq) {
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(m));
  if (cfg.candidate_source.kind == CandidateSource::Kind::IidExact) {
    for (int l = 0; l < m; ++l) {
      Vector y = target.sample(rng);
      Evaluation e = target.evaluate(y);
      out.push_back({std::move(y), std::move(e.score), e.log_p});
    }
  } else {
    const std::size_t i = select_init(cfg.crit, state, rng, cfg.custom_crit);
    const ChainState start{state.point(i), state.log_density(i), state.score(i), true};
    for (ChainState& s : run_chain(*cfg.candidate_source.kernel, target, start, m, rng)) {
      out.push_back({std::move(s.x), std::move(s.score), s.log_p});
    }
  }
  chain_disp_sq = (out.back().x - out.front().x).squaredNorm();
  return out;
}

}  // namespace

QuantisationResult spmcmc_run(const SpMcmcConfig& cfg, CountedTarget& target, const SteinKernel& ctx, Rng& rng) {
  cfg.validate(target.target());
  require_dim(target.dim(), ctx.score_dim(), "Stein kernel");

  QuantisationResult result{QuantisationState(ctx), {}};
  QuantisationState& state = result.state;
  auto& records = result.trace.records;
  const TraceClock clock;

  Vector last_added = cfg.x1;
  {
    const ChainState first = initial_state(target, cfg.x1);
    state.commit_add(first.x, first.score, first.log_p);
    TraceRecord rec;
    rec.iteration = 1;
    rec.point = cfg.x1;
    rec.set_size = 1;
    rec.ksd = state.ksd();
    rec.n_eval = target.n_eval();
    rec.elapsed_s = clock.seconds();
    records.push_back(std::move(rec));
  }

  const bool removal = cfg.removal.kind != RemovalPolicy::Kind::None;
  const std::size_t max_iterations = removal ? 10 * cfg.n : cfg.n;

  auto record_removal = [&](int j, std::size_t idx) {
    TraceRecord rec;
    rec.iteration = j;
    rec.action = TraceAction::Remove;
    rec.point = state.point(idx);
    rec.removed_index = idx;
    state.commit_remove(idx);
    rec.set_size = state.size();
    rec.ksd = state.ksd();
    rec.n_eval = target.n_eval();
    rec.elapsed_s = clock.seconds();
    records.push_back(std::move(rec));
  };

  for (int j = 2; state.size() < cfg.n; ++j) {
    if (static_cast<std::size_t>(j) > max_iterations) {
      throw RuntimeFailure("removal policy prevented the set from reaching " + std::to_string(cfg.n) +
                           " points within " + std::to_string(max_iterations) + " iterations");
    }
    const int m = cfg.m_schedule(j);
    if (m < 1) throw ConfigError("chain length schedule returned m_j < 1");

    if (cfg.removal.kind == RemovalPolicy::Kind::Drop) {
      const RemovalDecision drop = away_or_drop(state, 0.0, cfg.removal, rng);
      if (drop.action == RemovalDecision::Action::Remove) record_removal(j, drop.index);
    }

    std::vector<Candidate> candidates;
    std::vector<double> scores;
    std::optional<std::size_t> best;
    double chain_disp_sq = 0;
    for (int attempt = 0; attempt < 2 && !best; ++attempt) {
      candidates = draw_candidates(cfg, state, target, m, rng, chain_disp_sq);
      scores.assign(candidates.size(), std::numeric_limits<double>::infinity());
      for (std::size_t l = 0; l < candidates.size(); ++l) {
        const Candidate& c = candidates[l];
        if (std::isfinite(c.log_p) && c.score.allFinite()) scores[l] = state.add_score(c.x, c.score);
      }
      best = argmin_finite(scores);
    }
    if (!best) throw RuntimeFailure("no candidate inside the support at iteration " + std::to_string(j));

    if (cfg.removal.kind == RemovalPolicy::Kind::Away) {
      const RemovalDecision away = away_or_drop(state, scores[*best], cfg.removal, rng);
      if (away.action == RemovalDecision::Action::Remove) {
        record_removal(j, away.index);
        continue;
      }
    }

    const Candidate& chosen = candidates[*best];
    state.commit_add(chosen.x, chosen.score, chosen.log_p);
    TraceRecord rec;
    rec.iteration = j;
    rec.point = chosen.x;
    rec.set_size = state.size();
    rec.ksd = state.ksd();
    rec.n_eval = target.n_eval();
    rec.elapsed_s = clock.seconds();
    rec.jump_sq = (chosen.x - last_added).squaredNorm();
    rec.chain_disp_sq = chain_disp_sq;
    rec.candidate_scores = std::move(scores);
    rec.chosen = *best;
    records.push_back(std::move(rec));
    last_added = chosen.x;
  }
  return result;
}

}  // namespace steinmc
