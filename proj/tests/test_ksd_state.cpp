#include <gtest/gtest.h>

#include "oracles.hpp"
#include "steinmc/errors.hpp"
#include "steinmc/gaussian_mixture.hpp"
#include "steinmc/ksd_state.hpp"

using namespace steinmc;

namespace {

struct Fixture {
  GaussianMixture target = GaussianMixture::symmetric_bimodal();
  SteinKernel ctx{Imq(Matrix{{1.2, 0.3}, {0.3, 0.8}}, -0.5), 2};
  PointSet pts, scores;

  Vector draw(Rng& rng) { return 1.5 * standard_normal(2, rng); }
  void add(QuantisationState& s, const Vector& x) {
    pts.push_back(x);
    scores.push_back(target.score(x));
    s.commit_add(x, scores.back());
  }
  void remove(QuantisationState& s, std::size_t i) {
    s.commit_remove(i);
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
    scores.erase(scores.begin() + static_cast<std::ptrdiff_t>(i));
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST(QuantisationState, SinglePointKsd) {
  QuantisationState s(SteinKernel(Imq::identity(2), 2));
  s.commit_add(Vector::Zero(2), Vector::Zero(2));
  EXPECT_NEAR(s.ksd(), std::sqrt(2.0), 1e-15);
}

TEST(QuantisationState, EmptyStateErrors) {
  QuantisationState s(SteinKernel(Imq::identity(2), 2));
  EXPECT_THROW(s.ksd(), UndefinedStateError);
  s.commit_add(Vector::Zero(2), Vector::Zero(2));
  EXPECT_THROW(s.removal_ksd(0), UndefinedStateError);
  EXPECT_THROW(s.most_influential(), UndefinedStateError);
  EXPECT_THROW(s.commit_remove(0), UndefinedStateError);
  s.commit_add(Vector::Ones(2), -Vector::Ones(2));
  EXPECT_THROW(s.commit_remove(5), ArgumentError);
  EXPECT_THROW(s.commit_add(Vector::Zero(3), Vector::Zero(3)), ArgumentError);
}

TEST(QuantisationState, MatchesBruteForce) {
  Fixture f;
  Rng rng(1);
  QuantisationState s(f.ctx);
  for (int i = 0; i < 200; ++i) f.add(s, f.draw(rng));
  EXPECT_LE(rel(s.ksd(), oracle::brute_ksd(f.ctx, f.pts, f.scores)), 1e-10);
  const Matrix gram = oracle::stein_gram(f.ctx, f.pts, f.scores);
  for (std::size_t i = 0; i < f.pts.size(); ++i) {
    EXPECT_LE(rel(s.row_sums()[i], gram.row(static_cast<Index>(i)).sum()), 1e-10);
  }
  double r = 0;
  for (double v : s.row_sums()) r += v;
  EXPECT_LE(rel(s.total_sum(), r), 1e-9);
}

TEST(QuantisationState, DuplicatingPointsKeepsKsd) {
  Fixture f;
  Rng rng(2);
  QuantisationState a(f.ctx), b(f.ctx);
  for (int i = 0; i < 30; ++i) {
    const Vector x = f.draw(rng);
    a.commit_add(x, f.target.score(x));
    b.commit_add(x, f.target.score(x));
  }
  const PointSet pts = a.points();
  for (const Vector& x : pts) b.commit_add(x, f.target.score(x));
  EXPECT_NEAR(a.ksd(), b.ksd(), 1e-12 * a.ksd());
}

TEST(QuantisationState, AddScoreExamples) {
  const SteinKernel ctx(Imq::identity(1), 1);
  QuantisationState s(ctx);
  const double k11 = ctx(v1(1), v1(-1), v1(1), v1(-1));
  EXPECT_NEAR(s.add_score(v1(1), v1(-1)), 0.5 * k11, 1e-15);
  s.commit_add(v1(0), v1(0));
  EXPECT_NEAR(s.add_score(v1(1), v1(-1)), 0.5 * k11 - 0.5303300858899106, 1e-14);
}

TEST(QuantisationState, AddScoreArgminMatchesRecomputedKsd) {
  Fixture f;
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    QuantisationState s(f.ctx);
    f.pts.clear();
    f.scores.clear();
    const int n = 1 + static_cast<int>(uniform01(rng) * 30);
    for (int i = 0; i < n; ++i) f.add(s, f.draw(rng));
    std::vector<double> by_score, by_ksd;
    for (int c = 0; c < 10; ++c) {
      const Vector y = f.draw(rng);
      by_score.push_back(s.add_score(y, f.target.score(y)));
      PointSet p = f.pts, sc = f.scores;
      p.push_back(y);
      sc.push_back(f.target.score(y));
      by_ksd.push_back(oracle::brute_ksd(f.ctx, p, sc));
      EXPECT_LE(rel(s.ksd_after_add(by_score.back()), by_ksd.back()), 1e-9);
    }
    EXPECT_EQ(std::min_element(by_score.begin(), by_score.end()) - by_score.begin(),
              std::min_element(by_ksd.begin(), by_ksd.end()) - by_ksd.begin());
  }
}

TEST(QuantisationState, CommitDuplicateKeepsNonnegative) {
  Fixture f;
  QuantisationState s(f.ctx);
  const Vector x{{0.3, 0.2}};
  for (int i = 0; i < 5; ++i) f.add(s, x);
  EXPECT_GE(s.total_sum(), 0.0);
  EXPECT_LE(rel(s.ksd(), oracle::brute_ksd(f.ctx, f.pts, f.scores)), 1e-10);
}

TEST(QuantisationState, RemovalKsdMatchesBruteForce) {
  Fixture f;
  Rng rng(4);
  QuantisationState s(f.ctx);
  for (int i = 0; i < 100; ++i) f.add(s, f.draw(rng));
  for (std::size_t i = 0; i < f.pts.size(); ++i) {
    PointSet p = f.pts, sc = f.scores;
    p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
    sc.erase(sc.begin() + static_cast<std::ptrdiff_t>(i));
    EXPECT_LE(rel(s.removal_ksd(i), oracle::brute_ksd(f.ctx, p, sc)), 1e-9);
  }
}

TEST(QuantisationState, SymmetricPairTieBreak) {
  const SteinKernel ctx(Imq::identity(2), 2);
  QuantisationState s(ctx);
  const Vector x{{1.0, 1.0}};
  s.commit_add(x, -x);
  s.commit_add(-x, x);
  EXPECT_DOUBLE_EQ(s.removal_ksd(0), s.removal_ksd(1));
  EXPECT_EQ(s.most_influential(), 0u);
  EXPECT_EQ(s.least_influential(), 0u);
}

TEST(QuantisationState, MostInfluentialOnConstructedInstance) {
  const SteinKernel ctx(Imq::identity(1), 1);
  QuantisationState s(ctx);
  PointSet pts = {v1(0.0), v1(0.05), v1(3.0)}, scores;
  for (const Vector& x : pts) {
    scores.push_back(-x);
    s.commit_add(x, scores.back());
  }
  std::vector<double> brute;
  for (std::size_t i = 0; i < 3; ++i) {
    PointSet p = pts, sc = scores;
    p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
    sc.erase(sc.begin() + static_cast<std::ptrdiff_t>(i));
    brute.push_back(oracle::brute_ksd(ctx, p, sc));
  }
  const auto expected = static_cast<std::size_t>(std::max_element(brute.begin(), brute.end()) - brute.begin());
  EXPECT_EQ(s.most_influential(), expected);
  EXPECT_LT(s.most_influential(), 3u);
  const auto worst = static_cast<std::size_t>(std::min_element(brute.begin(), brute.end()) - brute.begin());
  EXPECT_EQ(s.least_influential(), worst);
}

TEST(QuantisationState, RemoveThenReAddRestoresSum) {
  Fixture f;
  Rng rng(5);
  QuantisationState s(f.ctx);
  for (int i = 0; i < 40; ++i) f.add(s, f.draw(rng));
  const double before = s.total_sum();
  const Vector x = s.point(7), sx = s.score(7);
  s.commit_remove(7);
  s.commit_add(x, sx);
  EXPECT_LE(rel(s.total_sum(), before), 1e-9);
}

TEST(QuantisationState, RemovePreservesOrder) {
  Fixture f;
  Rng rng(6);
  QuantisationState s(f.ctx);
  for (int i = 0; i < 6; ++i) f.add(s, f.draw(rng));
  f.remove(s, 2);
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(s.point(i), f.pts[i]);
}

TEST(QuantisationState, RandomInterleavingMatchesBruteForce) {
  Fixture f;
  Rng rng(7);
  QuantisationState s(f.ctx);
  int adds = 0, removes = 0;
  while (adds < 300 || removes < 100) {
    const bool remove = removes < 100 && s.size() >= 2 && (adds >= 300 || uniform01(rng) < 0.25);
    if (remove) {
      f.remove(s, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(s.size())));
      ++removes;
    } else {
      f.add(s, f.draw(rng));
      ++adds;
    }
  }
  const Matrix gram = oracle::stein_gram(f.ctx, f.pts, f.scores);
  EXPECT_LE(rel(s.total_sum(), gram.sum()), 1e-9);
  EXPECT_LE(rel(s.ksd(), oracle::brute_ksd(f.ctx, f.pts, f.scores)), 1e-9);
  for (std::size_t i = 0; i < f.pts.size(); ++i) {
    EXPECT_LE(rel(s.row_sums()[i], gram.row(static_cast<Index>(i)).sum()), 1e-9);
  }
}

TEST(QuantisationState, LongRunStaysConsistent) {
  // crosses the periodic refresh several times
  Fixture f;
  Rng rng(8);
  QuantisationState s(f.ctx);
  for (int i = 0; i < 1200; ++i) f.add(s, f.draw(rng));
  EXPECT_LE(rel(s.ksd(), oracle::brute_ksd(f.ctx, f.pts, f.scores)), 1e-10);
  s.recompute();
  EXPECT_LE(rel(s.ksd(), oracle::brute_ksd(f.ctx, f.pts, f.scores)), 1e-12);
}
