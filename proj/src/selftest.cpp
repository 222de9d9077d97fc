#include <cmath>
#include <functional>
#include <iomanip>

#include "steinmc/gaussian_mixture.hpp"
#include "steinmc/harness.hpp"
#include "steinmc/igarch.hpp"
#include "steinmc/kernel.hpp"
#include "steinmc/ksd_state.hpp"

namespace steinmc {

namespace {

struct Check {
  std::ostream& out;
  int failures = 0;

  void operator()(const std::string& name, double err, double tol) {
    const bool ok = std::isfinite(err) && err <= tol;
    if (!ok) ++failures;
    out << (ok ? "PASS " : "FAIL ") << std::left << std::setw(34) << name << " max_err=" << std::scientific
        << std::setprecision(3) << err << " tol=" << tol << std::defaultfloat << '\n';
  }
};

double central_diff(const std::function<double(const Vector&)>& f, Vector x, Index i, double h) {
  x(i) += h;
  const double up = f(x);
  x(i) -= 2 * h;
  return (up - f(x)) / (2 * h);
}

Matrix random_spd(Index d, Rng& rng) {
  const Matrix a = Matrix::NullaryExpr(d, d, [&] { return standard_normal(1, rng)(0); });
  return a * a.transpose() / static_cast<double>(d) + Matrix::Identity(d, d);
}

double kernel_gradient_error(Rng& rng) {
  double worst = 0;
  for (Index d : {1, 2, 5}) {
    const Imq k(random_spd(d, rng), -0.5);
    const Vector x = standard_normal(d, rng), y = standard_normal(d, rng);
    const Vector g = imq_grad_x(k, x, y);
    for (Index i = 0; i < d; ++i) {
      const double fd = central_diff([&](const Vector& z) { return imq_eval(k, z, y); }, x, i, 1e-5);
      worst = std::max(worst, std::abs(fd - g(i)));
    }
  }
  return worst;
}

double kernel_divergence_error(Rng& rng) {
  double worst = 0;
  for (Index d : {1, 3}) {
    const Imq k(random_spd(d, rng), -0.3);
    const Vector x = standard_normal(d, rng), y = standard_normal(d, rng);
    // sum_i d^2 k / dx_i dy_i by nested central differences
    const double h = 1e-4;
    double fd = 0;
    for (Index i = 0; i < d; ++i) {
      auto dk_dxi = [&](const Vector& yy) {
        return central_diff([&](const Vector& xx) { return imq_eval(k, xx, yy); }, x, i, h);
      };
      fd += central_diff(dk_dxi, y, i, h);
    }
    worst = std::max(worst, std::abs(fd - imq_div_grad(k, x, y)));
  }
  return worst;
}

double target_score_error(Rng& rng) {
  double worst = 0;
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  Rng data_rng = substream(7, "selftest-igarch");
  const IgarchPosterior ig(igarch_synthesize(Vector{{0.01, 0.2}}, 300, data_rng).returns);
  for (int rep = 0; rep < 3; ++rep) {
    const Vector x = standard_normal(2, rng);
    const Vector theta{{0.02 + 0.005 * rep, 0.15 + 0.05 * rep}};
    const Vector sg = gm.score(x), si = ig.score(theta);
    for (Index i = 0; i < 2; ++i) {
      const double fg = central_diff([&](const Vector& z) { return gm.log_density(z); }, x, i, 1e-6);
      const double fi = central_diff([&](const Vector& z) { return ig.log_density(z); }, theta, i, 1e-7);
      worst = std::max({worst, std::abs(fg - sg(i)), std::abs(fi - si(i)) / (1 + std::abs(si(i)))});
    }
  }
  return worst;
}

double bookkeeping_error(Rng& rng) {
  const GaussianMixture gm = GaussianMixture::symmetric_bimodal();
  const SteinKernel ctx(Imq::identity(2), 2);
  QuantisationState state(ctx);
  PointSet pts, scores;
  double worst = 0;
  for (int step = 0; step < 60; ++step) {
    if (pts.size() > 2 && uniform01(rng) < 0.3) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pts.size()));
      state.commit_remove(i);
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
      scores.erase(scores.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      const Vector x = 1.5 * standard_normal(2, rng);
      pts.push_back(x);
      scores.push_back(gm.score(x));
      state.commit_add(x, scores.back());
    }
    double s = 0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = 0; b < pts.size(); ++b) s += ctx(pts[a], scores[a], pts[b], scores[b]);
    }
    const double brute = std::sqrt(std::max(0.0, s)) / static_cast<double>(pts.size());
    worst = std::max(worst, std::abs(brute - state.ksd()) / (1 + brute));
  }
  return worst;
}

double energy_error(Rng& rng) {
  Matrix z(40, 2);
  for (Index i = 0; i < z.rows(); ++i) z.row(i) = standard_normal(2, rng).transpose();
  const ReferenceSample ref(z, "selftest");
  PointSet x;
  for (int i = 0; i < 15; ++i) x.push_back(standard_normal(2, rng));
  double xz = 0, xx = 0, zz = 0;
  for (const Vector& a : x) {
    for (Index j = 0; j < z.rows(); ++j) xz += (a - z.row(j).transpose()).norm();
    for (const Vector& b : x) xx += (a - b).norm();
  }
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.rows(); ++j) zz += (z.row(i) - z.row(j)).norm();
  }
  const double n = static_cast<double>(x.size()), big_n = static_cast<double>(z.rows());
  const double naive = 2 * xz / (n * big_n) - xx / (n * n) - zz / (big_n * big_n);
  return std::abs(naive - energy_distance(x, ref));
}

}  // namespace

int run_selftest(std::ostream& out) {
  Rng rng = substream(20240601, "selftest");
  Check check{out};
  check("kernel gradient vs finite diff", kernel_gradient_error(rng), 1e-6);
  check("kernel divergence vs finite diff", kernel_divergence_error(rng), 1e-5);
  check("target scores vs finite diff", target_score_error(rng), 1e-4);
  check("ksd bookkeeping vs brute force", bookkeeping_error(rng), 1e-10);
  check("energy distance vs naive sum", energy_error(rng), 1e-12);
  out << (check.failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
  return check.failures;
}

}  // namespace steinmc
