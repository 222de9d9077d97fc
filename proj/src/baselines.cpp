#include "steinmc/baselines.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "steinmc/errors.hpp"

namespace steinmc {

AdaptiveSearchConfig AdaptiveSearchConfig::with_defaults(Vector mu0, Matrix sigma0, int n_test) {
  const double d = static_cast<double>(mu0.size());
  const double spread = sigma0.trace() / d;
  AdaptiveSearchConfig cfg;
  cfg.n_test = n_test;
  cfg.alpha = [](int j) { return std::max(0.1, 1.0 / std::sqrt(static_cast<double>(j))); };
  cfg.mu0 = std::move(mu0);
  cfg.sigma0 = std::move(sigma0);
  cfg.lambda_mix = [spread, d](int j) { return spread / std::pow(static_cast<double>(j), 2.0 / d); };
  return cfg;
}

void AdaptiveSearchConfig::validate() const {
  if (n_test < 1) throw ConfigError("n_test must be at least 1");
  if (!alpha || !lambda_mix) throw ConfigError("adaptive search needs alpha and lambda schedules");
  if (sigma0.rows() != mu0.size() || sigma0.cols() != mu0.size()) throw ConfigError("Sigma0 has the wrong shape");
  Eigen::LLT<Matrix> llt(sigma0);
  if (llt.info() != Eigen::Success) throw ConfigError("Sigma0 is not positive definite");
}

PointSet draw_search_batch(const AdaptiveSearchConfig& cfg, const PointSet& state_points, int j, Rng& rng) {
  cfg.validate();
  const Index d = cfg.mu0.size();
  const double alpha = cfg.alpha(j);
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha_j must lie in [0, 1]");
  const bool gaussian = uniform01(rng) <= alpha || state_points.empty();
  PointSet batch;
  batch.reserve(static_cast<std::size_t>(cfg.n_test));
  if (gaussian) {
    const Matrix L = Eigen::LLT<Matrix>(cfg.sigma0).matrixL();
    for (int i = 0; i < cfg.n_test; ++i) batch.push_back(cfg.mu0 + L * standard_normal(d, rng));
  } else {
    const double lambda = cfg.lambda_mix(j);
    if (!(lambda > 0)) throw ConfigError("mixture variance must be positive");
    std::uniform_int_distribution<std::size_t> pick(0, state_points.size() - 1);
    for (int i = 0; i < cfg.n_test; ++i) {
      const Vector& centre = state_points[pick(rng)];
      require_dim(d, centre.size(), "search mixture centre");
      batch.push_back(centre + std::sqrt(lambda) * standard_normal(d, rng));
    }
  }
  return batch;
}

Vector adaptive_search(const AdaptiveSearchConfig& cfg, const std::function<double(const Vector&)>& objective,
                       const PointSet& state_points, int j, Rng& rng) {
  PointSet batch = draw_search_batch(cfg, state_points, j, rng);
  std::vector<double> values;
  values.reserve(batch.size());
  for (const Vector& x : batch) values.push_back(objective(x));
  const auto best = argmin_finite(values);
  if (!best) throw RuntimeFailure("adaptive search: objective is non-finite on every candidate");
  return batch[*best];
}

QuantisationResult sp_run(const AdaptiveSearchConfig& search, CountedTarget& target, const SteinKernel& ctx,
                          std::size_t n, Rng& rng) {
  if (n < 1) throw ConfigError("point count n must be at least 1");
  require_dim(target.dim(), search.mu0.size(), "search mean");
  QuantisationResult result{QuantisationState(ctx), {}};
  QuantisationState& state = result.state;
  const TraceClock clock;
  Vector last_added;

  for (int j = 1; state.size() < n; ++j) {
    std::vector<double> values;
    PointSet batch;
    std::vector<Evaluation> evals;
    std::optional<std::size_t> best;
    for (int attempt = 0; attempt < 2 && !best; ++attempt) {
      batch = draw_search_batch(search, state.points(), j, rng);
      evals.clear();
      values.assign(batch.size(), std::numeric_limits<double>::infinity());
      for (std::size_t l = 0; l < batch.size(); ++l) {
        evals.push_back(target.evaluate(batch[l]));
        const Evaluation& e = evals.back();
        if (!std::isfinite(e.log_p) || !e.score.allFinite()) continue;
        // The first point maximises p~ over its batch; later points minimise the KSD increment.
        values[l] = j == 1 ? -e.log_p : state.add_score(batch[l], e.score);
      }
      best = argmin_finite(values);
    }
    if (!best) throw RuntimeFailure("SP: no search point inside the support at iteration " + std::to_string(j));

    state.commit_add(batch[*best], evals[*best].score, evals[*best].log_p);
    TraceRecord rec;
    rec.iteration = j;
    rec.point = batch[*best];
    rec.set_size = state.size();
    rec.ksd = state.ksd();
    rec.n_eval = target.n_eval();
    rec.elapsed_s = clock.seconds();
    if (j > 1) rec.jump_sq = (batch[*best] - last_added).squaredNorm();
    rec.candidate_scores = std::move(values);
    rec.chosen = *best;
    result.trace.records.push_back(std::move(rec));
    last_added = batch[*best];
  }
  return result;
}

double med_objective(const PointSet& points, const std::vector<double>& log_p, const Vector& x, double log_p_x) {
  if (points.empty()) return log_p_x;
  const double inv2d = 1.0 / (2.0 * static_cast<double>(x.size()));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = inv2d * log_p[i] + inv2d * log_p_x + std::log((points[i] - x).norm());
    worst = std::min(worst, v);
  }
  return worst;
}

MedResult med_run(const AdaptiveSearchConfig& search, CountedTarget& target, std::size_t n, Rng& rng) {
  if (n < 1) throw ConfigError("point count n must be at least 1");
  require_dim(target.dim(), search.mu0.size(), "search mean");
  MedResult out;
  for (int j = 1; out.points.size() < n; ++j) {
    PointSet batch;
    std::vector<double> lps, values;
    std::optional<std::size_t> best;
    for (int attempt = 0; attempt < 2 && !best; ++attempt) {
      batch = draw_search_batch(search, out.points, j, rng);
      lps.clear();
      values.assign(batch.size(), std::numeric_limits<double>::infinity());
      for (std::size_t l = 0; l < batch.size(); ++l) {
        lps.push_back(target.log_density(batch[l]));
        if (!std::isfinite(lps.back())) continue;
        // Maximised, so stored negated for argmin.
        values[l] = -med_objective(out.points, out.log_p, batch[l], lps.back());
      }
      best = argmin_finite(values);
    }
    if (!best) throw RuntimeFailure("MED: no admissible search point at iteration " + std::to_string(j));
    out.points.push_back(batch[*best]);
    out.log_p.push_back(lps[*best]);
    out.n_eval.push_back(target.n_eval());
  }
  return out;
}

void SvgdConfig::validate() const {
  if (n_particles < 1) throw ConfigError("SVGD needs at least one particle");
  if (!(epsilon_master >= 0)) throw ConfigError("SVGD master step size must be nonnegative");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("SVGD momentum must lie in [0, 1)");
  if (iterations < 0) throw ConfigError("SVGD iteration count must be nonnegative");
  if (!init_sampler) throw ConfigError("SVGD needs an initial sampler");
}

PointSet svgd_direction(const Imq& kernel, const PointSet& particles, const PointSet& scores) {
  const std::size_t n = particles.size();
  const Index d = kernel.dim();
  const Matrix& inv = kernel.lambda_inverse();
  const double b = kernel.beta();
  PointSet phi(n, Vector::Zero(d));
  Vector w(d);
  for (std::size_t i = 0; i < n; ++i) {
    require_dim(d, particles[i].size(), "SVGD particle");
    for (std::size_t j = 0; j < n; ++j) {
      // k(x_j, x_i) s_j + grad_{x_j} k(x_j, x_i)
      w.noalias() = inv * (particles[j] - particles[i]);
      const double base = 1.0 + (particles[j] - particles[i]).dot(w);
      const double k = std::pow(base, b);
      phi[i] += k * scores[j] + (2.0 * b * k / base) * w;
    }
    phi[i] /= static_cast<double>(n);
  }
  return phi;
}

SvgdResult svgd_run(const SvgdConfig& cfg, CountedTarget& target, const Imq& kernel, Rng& rng,
                    const SvgdObserver& observer) {
  cfg.validate();
  require_dim(target.dim(), kernel.dim(), "SVGD kernel");
  const Index d = target.dim();
  const auto n = static_cast<std::size_t>(cfg.n_particles);
  SvgdResult out;
  out.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.particles.push_back(cfg.init_sampler(rng));
    require_dim(d, out.particles.back().size(), "SVGD initial particle");
  }
  const std::uint64_t start_eval = target.n_eval();
  PointSet accum(n, Vector::Zero(d));
  PointSet scores(n);
  for (int it = 1; it <= cfg.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      Evaluation e = target.evaluate(out.particles[i]);
      if (!e.score.allFinite()) {
        std::ostringstream msg;
        msg << "SVGD: non-finite score at iteration " << it << ", particle " << i << " = ["
            << out.particles[i].transpose() << "]";
        throw RuntimeFailure(msg.str());
      }
      scores[i] = std::move(e.score);
    }
    const PointSet phi = svgd_direction(kernel, out.particles, scores);
    for (std::size_t i = 0; i < n; ++i) {
      accum[i] = cfg.momentum * accum[i] + (1.0 - cfg.momentum) * phi[i].cwiseAbs2();
      const Vector step = cfg.epsilon_master * phi[i].cwiseQuotient(
                                                   (accum[i].cwiseSqrt().array() + SvgdConfig::kJitter).matrix());
      if (!step.allFinite()) {
        throw RuntimeFailure("SVGD: non-finite update at iteration " + std::to_string(it) + ", particle " +
                             std::to_string(i));
      }
      out.particles[i] += step;
    }
    if (observer) observer(it, out.particles, target.n_eval());
  }
  out.n_eval = target.n_eval() - start_eval;
  return out;
}

std::vector<ChainState> mcmc_thin_run(const MarkovKernelConfig& cfg, CountedTarget& target, const Vector& init,
                                      std::size_t n, int m, Rng& rng) {
  if (n < 1 || m < 1) throw ConfigError("thinned MCMC needs n >= 1 and m >= 1");
  std::vector<ChainState> kept;
  kept.reserve(n);
  ChainState state = initial_state(target, init);
  const std::size_t length = n * static_cast<std::size_t>(m);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = transition(state, cfg, target, rng);
    if ((t + 1) % static_cast<std::size_t>(m) == 0) kept.push_back(state);
  }
  return kept;
}

}  // namespace steinmc
