#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <string>

#include "steinmc/types.hpp"

namespace steinmc {

/// Open box (lower, upper) per coordinate; infinite bounds mean unconstrained.
struct Support {
  Vector lower;
  Vector upper;

  static Support unconstrained(Index d);
  static Support box(Vector lower, Vector upper);

  bool contains(const Vector& x) const;
  bool bounded() const;
};

/// Log density and score from a single (fused) evaluation.
struct Evaluation {
  double log_p = -std::numeric_limits<double>::infinity();
  Vector score;
};

/**
 * Unnormalised target density p~ on R^d (or an open box). Implementations
 * provide log p~ and grad log p~; evaluation outside the support yields a
 * log density of -inf and a NaN score.
 */
class Target {
 public:
  virtual ~Target() = default;

  virtual Index dim() const = 0;
  virtual std::string name() const = 0;
  virtual double log_density(const Vector& x) const = 0;
  virtual Vector score(const Vector& x) const = 0;
  virtual Evaluation evaluate(const Vector& x) const;
  virtual Support support() const { return Support::unconstrained(dim()); }

  virtual bool has_exact_sampler() const { return false; }
  /// Exact draw from the normalised target. Throws UndefinedStateError when unsupported.
  virtual Vector sample(Rng& rng) const;

  bool in_support(const Vector& x) const { return support().contains(x); }
};

/// Number of calls to p~ or its gradient; a fused call counts once.
class EvalCounter {
 public:
  void increment() { count_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t value() const { return count_.load(std::memory_order_relaxed); }
  void reset() { count_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

/// A target paired with the evaluation counter that every algorithm charges.
class CountedTarget {
 public:
  explicit CountedTarget(const Target& target) : target_(&target) {}
  CountedTarget(const CountedTarget&) = delete;
  CountedTarget& operator=(const CountedTarget&) = delete;

  const Target& target() const { return *target_; }
  Index dim() const { return target_->dim(); }
  bool in_support(const Vector& x) const { return target_->in_support(x); }

  double log_density(const Vector& x) {
    counter_.increment();
    return target_->log_density(x);
  }
  Vector score(const Vector& x) {
    counter_.increment();
    return target_->score(x);
  }
  Evaluation evaluate(const Vector& x) {
    counter_.increment();
    return target_->evaluate(x);
  }
  /// Exact draws are not density evaluations and are not charged.
  Vector sample(Rng& rng) const { return target_->sample(rng); }

  std::uint64_t n_eval() const { return counter_.value(); }
  EvalCounter& counter() { return counter_; }

 private:
  const Target* target_;
  EvalCounter counter_;
};

}  // namespace steinmc
