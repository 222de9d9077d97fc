#include <gtest/gtest.h>

#include "oracles.hpp"
#include "steinmc/errors.hpp"
#include "steinmc/gaussian_mixture.hpp"
#include "steinmc/metrics.hpp"
#include "steinmc/spmcmc.hpp"

using namespace steinmc;

namespace {

SpMcmcConfig mixture_config(std::size_t n, int m, InitCriterion crit) {
  SpMcmcConfig cfg;
  cfg.n = n;
  cfg.m_schedule = constant_schedule(m);
  cfg.crit = crit;
  cfg.candidate_source = CandidateSource::chain(MarkovKernelConfig::mala(2, 0.8));
  cfg.x1 = Vector{{1.0, 1.0}};
  return cfg;
}

const SteinKernel& identity_ctx() {
  static const SteinKernel ctx(Imq::identity(2), 2);
  return ctx;
}

}  // namespace

TEST(Schedules, ConstantAndPower) {
  EXPECT_EQ(constant_schedule(5)(2), 5);
  EXPECT_EQ(constant_schedule(5)(1000), 5);
  const auto p = power_schedule(1.0, 0.5);
  EXPECT_EQ(p(4), 2);
  EXPECT_EQ(p(10), 4);
  EXPECT_THROW(constant_schedule(0), ConfigError);
}

TEST(Criterion, ParseAndPrint) {
  EXPECT_EQ(parse_criterion("INFL"), InitCriterion::Infl);
  EXPECT_EQ(parse_criterion("last"), InitCriterion::Last);
  EXPECT_EQ(to_string(InitCriterion::Rand), "RAND");
  EXPECT_THROW(parse_criterion("BEST"), ConfigError);
}

TEST(SelectInit, SinglePointForEveryCriterion) {
  QuantisationState s(identity_ctx());
  s.commit_add(Vector{{0.5, 0.5}}, Vector{{-0.5, -0.5}});
  Rng rng(1);
  for (auto c : {InitCriterion::Last, InitCriterion::Rand, InitCriterion::Infl}) EXPECT_EQ(select_init(c, s, rng), 0u);
  QuantisationState empty(identity_ctx());
  EXPECT_THROW(select_init(InitCriterion::Last, empty, rng), UndefinedStateError);
}

TEST(SelectInit, LastAndInflAndCustom) {
  QuantisationState s(identity_ctx());
  for (double a : {0.0, 1.0, 5.0}) s.commit_add(Vector{{a, 0.0}}, Vector{{-a, 0.0}});
  Rng rng(2);
  EXPECT_EQ(select_init(InitCriterion::Last, s, rng), 2u);
  EXPECT_EQ(select_init(InitCriterion::Infl, s, rng), s.most_influential());
  EXPECT_EQ(select_init(InitCriterion::Custom, s, rng, [](const QuantisationState&, Rng&) { return std::size_t{1}; }),
            1u);
  EXPECT_THROW(select_init(InitCriterion::Custom, s, rng, [](const QuantisationState&, Rng&) { return std::size_t{9}; }),
               ArgumentError);
}

TEST(SelectInit, RandIsUniform) {
  QuantisationState s(identity_ctx());
  for (double a : {0.0, 1.0, 2.0}) s.commit_add(Vector{{a, 0.0}}, Vector{{-a, 0.0}});
  Rng rng(3);
  const int n = 100000;
  std::vector<int> counts(3, 0);
  for (int t = 0; t < n; ++t) ++counts[select_init(InitCriterion::Rand, s, rng)];
  const double se = std::sqrt((1.0 / 3) * (2.0 / 3) / n);
  for (int c : counts) EXPECT_LE(std::abs(c / double(n) - 1.0 / 3), 4 * se);
}

TEST(SpMcmc, SinglePointRun) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  CountedTarget t(gm);
  Rng rng(4);
  const auto res = spmcmc_run(mixture_config(1, 5, InitCriterion::Infl), t, identity_ctx(), rng);
  ASSERT_EQ(res.state.size(), 1u);
  const Vector x1{{1.0, 1.0}};
  const Vector s1 = gm.score(x1);
  EXPECT_NEAR(res.state.ksd(), std::sqrt(identity_ctx()(x1, s1, x1, s1)), 1e-14);
  EXPECT_EQ(t.n_eval(), 1u);
}

TEST(SpMcmc, DeterministicTrace) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  auto run = [&] {
    CountedTarget t(gm);
    Rng rng(5);
    return spmcmc_run(mixture_config(100, 5, InitCriterion::Infl), t, identity_ctx(), rng);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].point, b.trace.records[i].point);
    EXPECT_EQ(a.trace.records[i].ksd, b.trace.records[i].ksd);
  }
}

TEST(SpMcmc, CostAndMonotoneSelection) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  for (auto crit : {InitCriterion::Last, InitCriterion::Rand, InitCriterion::Infl}) {
    CountedTarget t(gm);
    Rng rng(6);
    SpMcmcConfig cfg = mixture_config(80, 3, crit);
    cfg.m_schedule = power_schedule(1.0, 0.5);
    const auto res = spmcmc_run(cfg, t, identity_ctx(), rng);
    std::uint64_t expected = 1;
    for (int j = 2; j <= 80; ++j) expected += static_cast<std::uint64_t>(cfg.m_schedule(j));
    EXPECT_EQ(t.n_eval(), expected);
    std::uint64_t prev = 0;
    for (const TraceRecord& r : res.trace.records) {
      EXPECT_GE(r.ksd, 0.0);
      EXPECT_GT(r.n_eval, prev);
      prev = r.n_eval;
      if (r.iteration == 1) continue;
      ASSERT_EQ(r.candidate_scores.size(), static_cast<std::size_t>(cfg.m_schedule(r.iteration)));
      const auto min_it = std::min_element(r.candidate_scores.begin(), r.candidate_scores.end());
      EXPECT_EQ(r.chosen, static_cast<std::size_t>(min_it - r.candidate_scores.begin()));
    }
    EXPECT_LE(std::abs(res.state.ksd() - oracle::brute_ksd(identity_ctx(), res.state.points(), [&] {
                PointSet s;
                for (std::size_t i = 0; i < res.state.size(); ++i) s.push_back(res.state.score(i));
                return s;
              }())),
              1e-10 * res.state.ksd());
  }
}

TEST(SpMcmc, StartPointIsNotACandidate) {
  // With m = 1 on a flat box the single candidate is the post-transition state.
  const oracle::Flat flat(Vector{{-1.0, -1.0}}, Vector{{1.0, 1.0}});
  CountedTarget t(flat);
  Rng rng(7);
  SpMcmcConfig cfg;
  cfg.n = 20;
  cfg.m_schedule = constant_schedule(1);
  cfg.crit = InitCriterion::Last;
  cfg.candidate_source = CandidateSource::chain(MarkovKernelConfig::rwm(2, 0.01));
  cfg.x1 = Vector::Zero(2);
  const auto res = spmcmc_run(cfg, t, identity_ctx(), rng);
  for (std::size_t i = 1; i < res.trace.records.size(); ++i) {
    EXPECT_GT(res.trace.records[i].jump_sq, 0.0);
  }
}

TEST(SpMcmc, IidCandidatesCostAndError) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  CountedTarget t(gm);
  Rng rng(8);
  SpMcmcConfig cfg = mixture_config(30, 7, InitCriterion::Infl);
  cfg.candidate_source = CandidateSource::iid_exact();
  const auto res = spmcmc_run(cfg, t, identity_ctx(), rng);
  EXPECT_EQ(res.state.size(), 30u);
  EXPECT_EQ(t.n_eval(), 1u + 29u * 7u);

  const oracle::Flat flat(2);
  CountedTarget tf(flat);
  cfg.x1 = Vector::Zero(2);
  EXPECT_THROW(spmcmc_run(cfg, tf, identity_ctx(), rng), ConfigError);
}

TEST(SpMcmc, ConfigValidation) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  CountedTarget t(gm);
  Rng rng(9);
  SpMcmcConfig cfg = mixture_config(0, 5, InitCriterion::Infl);
  EXPECT_THROW(spmcmc_run(cfg, t, identity_ctx(), rng), ConfigError);
  cfg = mixture_config(10, 5, InitCriterion::Infl);
  cfg.removal = RemovalPolicy::drop(1.0);
  EXPECT_THROW(spmcmc_run(cfg, t, identity_ctx(), rng), ConfigError);
  cfg = mixture_config(10, 5, InitCriterion::Infl);
  cfg.x1 = Vector::Zero(3);
  EXPECT_ANY_THROW(spmcmc_run(cfg, t, identity_ctx(), rng));
}

TEST(SpMcmc, StuckChainRetriesThenFails) {
  // a box so narrow that every proposal leaves it
  const oracle::Flat box(Vector{{-1e-9, -1e-9}}, Vector{{1e-9, 1e-9}});
  CountedTarget t(box);
  Rng rng(10);
  SpMcmcConfig cfg;
  cfg.n = 3;
  cfg.m_schedule = constant_schedule(4);
  cfg.crit = InitCriterion::Last;
  cfg.candidate_source = CandidateSource::chain(MarkovKernelConfig::rwm(2, 1.0));
  cfg.x1 = Vector::Zero(2);
  // rejected proposals leave the chain at x1, which is inside: candidates are the start point repeated
  const auto res = spmcmc_run(cfg, t, identity_ctx(), rng);
  EXPECT_EQ(res.state.size(), 3u);
}

TEST(AwayOrDrop, PolicyRules) {
  QuantisationState s(identity_ctx());
  Rng rng(11);
  EXPECT_EQ(away_or_drop(s, 0.0, RemovalPolicy::away(), rng).action, RemovalDecision::Action::Add);
  s.commit_add(Vector::Zero(2), Vector::Zero(2));
  EXPECT_EQ(away_or_drop(s, -100.0, RemovalPolicy::away(), rng).action, RemovalDecision::Action::Add);
  s.commit_add(Vector{{0.1, 0.0}}, Vector{{-0.1, 0.0}});
  for (int t = 0; t < 1000; ++t) {
    EXPECT_EQ(away_or_drop(s, 0.0, RemovalPolicy::drop(0.0), rng).action, RemovalDecision::Action::Add);
    EXPECT_EQ(away_or_drop(s, 0.0, RemovalPolicy::none(), rng).action, RemovalDecision::Action::Add);
  }
}

TEST(AwayOrDrop, AwayMatchesBruteForceOnOutlier) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  const SteinKernel& ctx = identity_ctx();
  QuantisationState s(ctx);
  PointSet pts = {Vector{{1.0, 1.0}}, Vector{{-1.0, -1.0}}, Vector{{0.8, 1.3}}, Vector{{9.0, -7.0}}}, scores;
  for (const Vector& x : pts) {
    scores.push_back(gm.score(x));
    s.commit_add(x, scores.back());
  }
  for (const Vector& y : {Vector{{-1.1, -0.9}}, Vector{{30.0, 30.0}}}) {
    const Vector sy = gm.score(y);
    PointSet p_add = pts, s_add = scores;
    p_add.push_back(y);
    s_add.push_back(sy);
    const double d = oracle::brute_ksd(ctx, pts, scores);
    const double good = d - oracle::brute_ksd(ctx, p_add, s_add);
    double bad = -std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      PointSet p = pts, sc = scores;
      p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
      sc.erase(sc.begin() + static_cast<std::ptrdiff_t>(i));
      if (d - oracle::brute_ksd(ctx, p, sc) > bad) {
        bad = d - oracle::brute_ksd(ctx, p, sc);
        worst = i;
      }
    }
    Rng rng(12);
    const RemovalDecision dec = away_or_drop(s, s.add_score(y, sy), RemovalPolicy::away(), rng);
    EXPECT_EQ(dec.action == RemovalDecision::Action::Remove, bad >= good);
    if (dec.action == RemovalDecision::Action::Remove) EXPECT_EQ(dec.index, worst);
  }
}

TEST(SpMcmc, AwayStepsStallAndHitIterationCap) {
  // removal keeps winning against 5-point local search, so the set stays small
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  CountedTarget t(gm);
  Rng rng(13);
  SpMcmcConfig cfg = mixture_config(150, 5, InitCriterion::Infl);
  cfg.removal = RemovalPolicy::away();
  EXPECT_THROW(spmcmc_run(cfg, t, identity_ctx(), rng), RuntimeFailure);
  EXPECT_EQ(t.n_eval(), 1u + 5u * 1499u);
}

TEST(SpMcmc, RemovalRunsReachTargetSize) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  for (RemovalPolicy policy : {RemovalPolicy::away(), RemovalPolicy::drop(0.25)}) {
    CountedTarget t(gm);
    Rng rng(13);
    const std::size_t n = policy.kind == RemovalPolicy::Kind::Away ? 8 : 150;
    SpMcmcConfig cfg = mixture_config(n, 5, InitCriterion::Infl);
    cfg.removal = policy;
    const auto res = spmcmc_run(cfg, t, identity_ctx(), rng);
    EXPECT_EQ(res.state.size(), n);
    EXPECT_EQ(res.trace.adds() - res.trace.removes(), n);
    const int iterations = res.trace.records.back().iteration;
    EXPECT_EQ(t.n_eval(), 1u + 5u * static_cast<std::uint64_t>(iterations - 1));
    std::size_t size = 0;
    for (const TraceRecord& r : res.trace.records) {
      size += r.action == TraceAction::Add ? 1 : 0;
      size -= r.action == TraceAction::Remove ? 1 : 0;
      ASSERT_GE(size, 1u);
      EXPECT_EQ(r.set_size, size);
    }
  }
}

TEST(ArgminFinite, SkipsNonFiniteAndPrefersEarliest) {
  EXPECT_EQ(argmin_finite({3.0, 1.0, 1.0}), 1u);
  EXPECT_EQ(argmin_finite({std::nan(""), 2.0}), 1u);
  EXPECT_FALSE(argmin_finite({std::numeric_limits<double>::infinity()}).has_value());
}

TEST(JumpStatistics, QuantilesAndZeroJump) {
  ExperimentTrace trace;
  for (double a : {0.0, 0.0, 1.0, 3.0}) {
    TraceRecord r;
    r.point = Vector{{a}};
    trace.records.push_back(r);
  }
  trace.records[1].jump_sq = 0.0;
  trace.records[2].jump_sq = 1.0;
  trace.records[3].jump_sq = 4.0;
  trace.records[1].chain_disp_sq = 2.0;
  trace.records[2].chain_disp_sq = 2.0;
  trace.records[3].chain_disp_sq = 5.0;
  const JumpStatistics js = jump_statistics(trace);
  EXPECT_EQ(js.jump_sq.count, 3u);
  EXPECT_EQ(js.jump_sq.min, 0.0);
  EXPECT_EQ(js.jump_sq.q50, 1.0);
  EXPECT_EQ(js.jump_sq.q25, 0.5);
  EXPECT_EQ(js.jump_sq.q75, 2.5);
  EXPECT_NEAR(js.jump_sq.mean, 5.0 / 3, 1e-15);
  EXPECT_LE(js.chain_disp_sq.q25, js.chain_disp_sq.q50);
  EXPECT_LE(js.chain_disp_sq.q50, js.chain_disp_sq.q75);
}
