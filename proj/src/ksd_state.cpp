#include "steinmc/ksd_state.hpp"

#include <cmath>
#include <iostream>

#include "steinmc/errors.hpp"

namespace steinmc {

QuantisationState::QuantisationState(SteinKernel ctx) : ctx_(std::move(ctx)) {}

double QuantisationState::k0(std::size_t a, std::size_t b) const {
  return ctx_(points_[a], scores_[a], points_[b], scores_[b]);
}

double QuantisationState::total_sum() const { return std::max(total_, 0.0); }

double QuantisationState::ksd() const {
  if (empty()) throw UndefinedStateError("KSD of an empty point set");
  if (total_ < 0) {
    double scale = 0;
    for (double d : diag_) scale += std::abs(d);
    if (total_ < -1e-8 * scale) {
      std::clog << "steinmc: warning: KSD sum drifted to " << total_ << " (n=" << size() << "), clamping at 0\n";
    }
  }
  return std::sqrt(total_sum()) / static_cast<double>(size());
}

double QuantisationState::add_score(const Vector& y, const Vector& score_y) const {
  double s = 0.5 * ctx_(y, score_y, y, score_y);
  for (std::size_t i = 0; i < points_.size(); ++i) s += ctx_(points_[i], scores_[i], y, score_y);
  return s;
}

double QuantisationState::ksd_after_add(double add_score) const {
  return std::sqrt(std::max(total_ + 2.0 * add_score, 0.0)) / static_cast<double>(size() + 1);
}

void QuantisationState::commit_add(const Vector& y, const Vector& score_y, double log_p) {
  require_dim(ctx_.score_dim(), y.size(), "committed point");
  require_dim(ctx_.score_dim(), score_y.size(), "committed score");
  const double self = ctx_(y, score_y, y, score_y);
  double cross_total = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double c = ctx_(points_[i], scores_[i], y, score_y);
    row_sums_[i] += c;
    cross_total += c;
  }
  points_.push_back(y);
  scores_.push_back(score_y);
  log_p_.push_back(log_p);
  diag_.push_back(self);
  row_sums_.push_back(cross_total + self);
  total_ += 2.0 * cross_total + self;
  after_commit();
}

void QuantisationState::check_removal(std::size_t i) const {
  if (size() < 2) throw UndefinedStateError("removal needs at least two points");
  if (i >= size()) throw ArgumentError("removal index out of range");
}

double QuantisationState::removal_ksd(std::size_t i) const {
  check_removal(i);
  const double s = total_ - 2.0 * row_sums_[i] + diag_[i];
  return std::sqrt(std::max(s, 0.0)) / static_cast<double>(size() - 1);
}

std::size_t QuantisationState::most_influential() const {
  if (size() < 2) throw UndefinedStateError("most influential point needs at least two points");
  std::size_t best = 0;
  double best_val = removal_ksd(0);
  for (std::size_t i = 1; i < size(); ++i) {
    const double v = removal_ksd(i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

std::size_t QuantisationState::least_influential() const {
  if (size() < 2) throw UndefinedStateError("least influential point needs at least two points");
  std::size_t best = 0;
  double best_val = removal_ksd(0);
  for (std::size_t i = 1; i < size(); ++i) {
    const double v = removal_ksd(i);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

void QuantisationState::commit_remove(std::size_t i) {
  check_removal(i);
  for (std::size_t a = 0; a < size(); ++a) {
    if (a != i) row_sums_[a] -= k0(a, i);
  }
  total_ -= 2.0 * row_sums_[i] - diag_[i];
  const auto at = static_cast<std::ptrdiff_t>(i);
  points_.erase(points_.begin() + at);
  scores_.erase(scores_.begin() + at);
  log_p_.erase(log_p_.begin() + at);
  diag_.erase(diag_.begin() + at);
  row_sums_.erase(row_sums_.begin() + at);
  after_commit();
}

void QuantisationState::recompute() {
  const std::size_t n = size();
  std::fill(row_sums_.begin(), row_sums_.end(), 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    diag_[a] = k0(a, a);
    row_sums_[a] += diag_[a];
    for (std::size_t b = a + 1; b < n; ++b) {
      const double c = k0(a, b);
      row_sums_[a] += c;
      row_sums_[b] += c;
    }
  }
  total_ = 0;
  for (double r : row_sums_) total_ += r;
  commits_since_refresh_ = 0;
}

void QuantisationState::after_commit() {
  if (++commits_since_refresh_ >= kRefreshInterval) recompute();
}

}  // namespace steinmc
