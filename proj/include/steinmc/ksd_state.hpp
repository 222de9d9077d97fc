#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "steinmc/kernel.hpp"
#include "steinmc/types.hpp"

namespace steinmc {

/**
 * Uniformly weighted point set with incremental kernel Stein discrepancy
 * bookkeeping.
 *
 * Maintains r_i = sum_b k0(x_i, x_b) (diagonal included) and S = sum_i r_i so
 * that candidate scoring is O(n), removal scoring is O(1) and commits are
 * O(n) kernel evaluations. Scores (and log densities, when known) are cached
 * per point so bookkeeping never re-evaluates the target. Everything is
 * recomputed from scratch every kRefreshInterval commits.
 */
class QuantisationState {
 public:
  static constexpr std::size_t kRefreshInterval = 512;

  explicit QuantisationState(SteinKernel ctx);

  const SteinKernel& kernel() const { return ctx_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const PointSet& points() const { return points_; }
  const Vector& point(std::size_t i) const { return points_.at(i); }
  const Vector& score(std::size_t i) const { return scores_.at(i); }
  /// NaN when the caller did not supply it at commit time.
  double log_density(std::size_t i) const { return log_p_.at(i); }
  double diagonal(std::size_t i) const { return diag_.at(i); }
  const std::vector<double>& row_sums() const { return row_sums_; }
  /// S = sum_{a,b} k0(x_a, x_b), floored at zero.
  double total_sum() const;

  /// sqrt(S) / n. Throws UndefinedStateError on an empty set.
  double ksd() const;

  /// k0(y, y)/2 + sum_i k0(x_i, y). Adding y changes S by exactly twice this.
  double add_score(const Vector& y, const Vector& score_y) const;
  /// KSD of the set with y appended, given y's add_score.
  double ksd_after_add(double add_score) const;
  void commit_add(const Vector& y, const Vector& score_y, double log_p = std::numeric_limits<double>::quiet_NaN());

  /// KSD of the set with point i removed. Requires n >= 2.
  double removal_ksd(std::size_t i) const;
  /// argmax_i removal_ksd(i), smallest index on ties.
  std::size_t most_influential() const;
  /// argmin_i removal_ksd(i), smallest index on ties: the point whose removal helps most.
  std::size_t least_influential() const;
  void commit_remove(std::size_t i);

  /// O(n^2) recomputation of all row sums and S.
  void recompute();

 private:
  double k0(std::size_t a, std::size_t b) const;
  void after_commit();
  void check_removal(std::size_t i) const;

  SteinKernel ctx_;
  PointSet points_;
  PointSet scores_;
  std::vector<double> log_p_;
  std::vector<double> diag_;
  std::vector<double> row_sums_;
  double total_ = 0;
  std::size_t commits_since_refresh_ = 0;
};

}  // namespace steinmc
