#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/LU>

#include "steinmc/kernel.hpp"
#include "steinmc/target.hpp"

namespace oracle {

using steinmc::Index;
using steinmc::Matrix;
using steinmc::PointSet;
using steinmc::Rng;
using steinmc::Vector;

inline double central_diff(const std::function<double(const Vector&)>& f, Vector x, Index i, double h) {
  x(i) += h;
  const double up = f(x);
  x(i) -= 2 * h;
  return (up - f(x)) / (2 * h);
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) g(i) = central_diff(f, x, i, h);
  return g;
}

// k(x,y) straight from the definition, no shared code with the library.
inline double imq(const Matrix& lambda, double beta, const Vector& x, const Vector& y) {
  const Vector u = x - y;
  return std::pow(1.0 + u.dot(lambda.ldlt().solve(u)), beta);
}

// sum_i d^2 k / dx_i dy_i by nested central differences.
inline double fd_div_grad(const std::function<double(const Vector&, const Vector&)>& k, const Vector& x,
                          const Vector& y, double h) {
  double total = 0;
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x, yp = y, ym = y;
    xp(i) += h;
    xm(i) -= h;
    yp(i) += h;
    ym(i) -= h;
    total += (k(xp, yp) - k(xp, ym) - k(xm, yp) + k(xm, ym)) / (4 * h * h);
  }
  return total;
}

// Stein kernel assembled from finite-difference derivatives of k.
inline double fd_stein_kernel(const Matrix& lambda, double beta, const Vector& x, const Vector& sx, const Vector& y,
                              const Vector& sy) {
  auto k = [&](const Vector& a, const Vector& b) { return imq(lambda, beta, a, b); };
  const Vector gx = fd_gradient([&](const Vector& a) { return k(a, y); }, x, 1e-6);
  const Vector gy = fd_gradient([&](const Vector& b) { return k(x, b); }, y, 1e-6);
  return fd_div_grad(k, x, y, 1e-4) + gx.dot(sy) + gy.dot(sx) + k(x, y) * sx.dot(sy);
}

inline Matrix stein_gram(const steinmc::SteinKernel& ctx, const PointSet& pts, const PointSet& scores) {
  const auto n = static_cast<Index>(pts.size());
  Matrix g(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) g(a, b) = ctx(pts[a], scores[a], pts[b], scores[b]);
  }
  return g;
}

inline double brute_ksd(const steinmc::SteinKernel& ctx, const PointSet& pts, const PointSet& scores) {
  return std::sqrt(std::max(0.0, stein_gram(ctx, pts, scores).sum())) / static_cast<double>(pts.size());
}

inline double naive_energy(const PointSet& x, const PointSet& z) {
  auto mean_dist = [](const PointSet& a, const PointSet& b) {
    double s = 0;
    for (const Vector& p : a) {
      for (const Vector& q : b) s += (p - q).norm();
    }
    return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  return 2 * mean_dist(x, z) - mean_dist(x, x) - mean_dist(z, z);
}

// 99th percentile of the two-sample energy statistic under random relabelling.
inline double energy_permutation_q99(const PointSet& a, const PointSet& b, int permutations, Rng& rng) {
  PointSet pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> stats;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    const PointSet x(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()));
    const PointSet y(pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), pooled.end());
    stats.push_back(naive_energy(x, y));
  }
  std::sort(stats.begin(), stats.end());
  return stats[static_cast<std::size_t>(0.99 * (stats.size() - 1))];
}

// One-sample Kolmogorov-Smirnov p-value against N(0,1) (asymptotic series).
inline double ks_normal_pvalue(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-xs[i] / std::sqrt(2.0));
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Standard normal in d dimensions with an exact sampler.
class StdNormal final : public steinmc::Target {
 public:
  explicit StdNormal(Index d) : d_(d) {}
  Index dim() const override { return d_; }
  std::string name() const override { return "std-normal"; }
  double log_density(const Vector& x) const override { return -0.5 * x.squaredNorm(); }
  Vector score(const Vector& x) const override { return -x; }
  bool has_exact_sampler() const override { return true; }
  Vector sample(Rng& rng) const override { return steinmc::standard_normal(d_, rng); }

 private:
  Index d_;
};

// log p ≡ 0 on R^d or on an open box.
class Flat final : public steinmc::Target {
 public:
  explicit Flat(Index d) : support_(steinmc::Support::unconstrained(d)) {}
  Flat(Vector lower, Vector upper) : support_(steinmc::Support::box(std::move(lower), std::move(upper))) {}
  Index dim() const override { return support_.lower.size(); }
  std::string name() const override { return "flat"; }
  double log_density(const Vector& x) const override {
    return support_.contains(x) ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  Vector score(const Vector& x) const override {
    return support_.contains(x) ? Vector::Zero(x.size()) : Vector::Constant(x.size(), std::nan(""));
  }
  steinmc::Support support() const override { return support_; }

 private:
  steinmc::Support support_;
};

}  // namespace oracle
