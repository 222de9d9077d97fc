#include "steinmc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "steinmc/errors.hpp"

namespace steinmc {

double mean_pairwise_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw ArgumentError("pairwise distance of an empty sample");
  require_dim(a.cols(), b.cols(), "pairwise distance");
  const Index d = a.cols();
  // Row-major copies keep each point contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ra = a, rb = b;
  double total = 0;
  for (Index i = 0; i < ra.rows(); ++i) {
    const double* x = ra.row(i).data();
    double row = 0;
    for (Index j = 0; j < rb.rows(); ++j) {
      const double* z = rb.row(j).data();
      double s = 0;
      for (Index k = 0; k < d; ++k) s += (x[k] - z[k]) * (x[k] - z[k]);
      row += std::sqrt(s);
    }
    total += row;
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

ReferenceSample::ReferenceSample(Matrix points, std::string provenance)
    : points_(std::move(points)), provenance_(std::move(provenance)) {
  if (points_.rows() < 2) throw ArgumentError("reference sample needs at least two points");
  self_energy_ = mean_pairwise_distance(points_, points_);
}

ReferenceSample::ReferenceSample(Matrix points, std::string provenance, double self_energy)
    : points_(std::move(points)), provenance_(std::move(provenance)), self_energy_(self_energy) {
  if (points_.rows() < 2) throw ArgumentError("reference sample needs at least two points");
  if (!std::isfinite(self_energy_) || self_energy_ < 0) throw ConfigError("invalid reference self-energy");
}

double energy_distance(const Matrix& sample, const ReferenceSample& ref) {
  if (sample.rows() == 0) throw ArgumentError("energy distance of an empty sample");
  require_dim(ref.dim(), sample.cols(), "energy distance sample");
  return 2.0 * mean_pairwise_distance(sample, ref.points()) - mean_pairwise_distance(sample, sample) -
         ref.self_energy();
}

double energy_distance(const PointSet& sample, const ReferenceSample& ref) {
  if (sample.empty()) throw ArgumentError("energy distance of an empty sample");
  return energy_distance(stack_rows(sample), ref);
}

Matrix sample_covariance(const Matrix& points) {
  if (points.rows() < 2) throw ArgumentError("covariance needs at least two points");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix centred = points.rowwise() - mean;
  Matrix cov = centred.transpose() * centred / static_cast<double>(points.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

PreconditionerEstimate estimate_preconditioner(CountedTarget& target, const MarkovKernelConfig& kernel_cfg,
                                               const Vector& init, int warmup, int chain_len, Rng& rng) {
  const Index d = target.dim();
  if (chain_len < d + 2) throw ConfigError("preconditioner chain must have at least d + 2 states");
  ChainState state = initial_state(target, init);
  const MarkovKernelConfig tuned = adapt_step_size(kernel_cfg, target, state, warmup, rng);
  Matrix path(chain_len, d);
  for (int t = 0; t < chain_len; ++t) {
    state = transition(state, tuned, target, rng);
    path.row(t) = state.x.transpose();
  }
  Matrix lambda = sample_covariance(path);
  const double jitter = 1e-8 * lambda.trace() / static_cast<double>(d);
  lambda.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(lambda);
  if (!lambda.allFinite() || llt.info() != Eigen::Success || !(lambda.trace() > 0)) {
    throw ConfigError("estimated preconditioner is degenerate (chain did not move?)");
  }
  return {std::move(lambda), path.colwise().mean().transpose(), tuned, state};
}

QuantileSummary summarise(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  QuantileSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.max = values.back();
  s.q25 = q(0.25);
  s.q50 = q(0.5);
  s.q75 = q(0.75);
  double total = 0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  return s;
}

JumpStatistics jump_statistics(const ExperimentTrace& trace) {
  std::vector<double> jumps, disps;
  for (const TraceRecord& r : trace.records) {
    if (r.action != TraceAction::Add) continue;
    jumps.push_back(r.jump_sq);
    disps.push_back(r.chain_disp_sq);
  }
  return {summarise(std::move(jumps)), summarise(std::move(disps))};
}

}  // namespace steinmc
