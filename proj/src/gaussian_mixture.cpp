#include "steinmc/gaussian_mixture.hpp"

#include <cmath>
#include <numbers>

#include "steinmc/errors.hpp"

namespace steinmc {

GaussianMixture::GaussianMixture(std::vector<double> weights, PointSet means, std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (weights_.empty()) throw ConfigError("mixture needs at least one component");
  if (means_.size() != weights_.size() || covariances_.size() != weights_.size()) {
    throw ConfigError("mixture: weights, means and covariances differ in length");
  }
  double total = 0;
  for (double w : weights_) {
    if (!(w >= 0)) throw ConfigError("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");

  dim_ = means_.front().size();
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    require_dim(dim_, means_[j].size(), "mixture mean");
    if (covariances_[j].rows() != dim_ || covariances_[j].cols() != dim_) {
      throw ArgumentError("mixture covariance has the wrong shape");
    }
    Eigen::LLT<Matrix> llt(covariances_[j]);
    if (llt.info() != Eigen::Success) throw ConfigError("mixture covariance is not positive definite");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm_.push_back(std::log(weights_[j]) - 0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi) -
                        0.5 * log_det);
    factors_.push_back(std::move(llt));
  }
}

GaussianMixture GaussianMixture::symmetric_bimodal() {
  const Vector one = Vector::Ones(2);
  const Matrix cov = 0.5 * Matrix::Identity(2, 2);
  return GaussianMixture({0.5, 0.5}, {-one, one}, {cov, cov});
}

GaussianMixture GaussianMixture::isotropic(Index d, double sigma) {
  return GaussianMixture({1.0}, {Vector::Zero(d)}, {sigma * sigma * Matrix::Identity(d, d)});
}

Evaluation GaussianMixture::evaluate(const Vector& x) const {
  require_dim(dim_, x.size(), "mixture point");
  const std::size_t K = weights_.size();
  std::vector<double> log_terms(K, -std::numeric_limits<double>::infinity());
  PointSet scores(K);
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < K; ++j) {
    const Vector diff = x - means_[j];
    const Vector prec_diff = factors_[j].solve(diff);
    scores[j] = -prec_diff;
    if (weights_[j] > 0) {
      log_terms[j] = log_norm_[j] - 0.5 * diff.dot(prec_diff);
      max_term = std::max(max_term, log_terms[j]);
    }
  }
  double sum = 0;
  for (std::size_t j = 0; j < K; ++j) sum += std::exp(log_terms[j] - max_term);
  Evaluation out;
  out.log_p = max_term + std::log(sum);
  out.score = Vector::Zero(dim_);
  for (std::size_t j = 0; j < K; ++j) {
    if (weights_[j] > 0) out.score += std::exp(log_terms[j] - out.log_p) * scores[j];
  }
  return out;
}

double GaussianMixture::log_density(const Vector& x) const { return evaluate(x).log_p; }

Vector GaussianMixture::score(const Vector& x) const { return evaluate(x).score; }

std::pair<std::size_t, Vector> GaussianMixture::sample_labelled(Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  const std::size_t j = pick(rng);
  Vector z = standard_normal(dim_, rng);
  return {j, means_[j] + factors_[j].matrixL() * z};
}

Vector GaussianMixture::sample(Rng& rng) const { return sample_labelled(rng).second; }

}  // namespace steinmc
