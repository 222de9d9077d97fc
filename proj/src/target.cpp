#include "steinmc/target.hpp"

#include <cmath>

#include "steinmc/errors.hpp"

namespace steinmc {

Support Support::unconstrained(Index d) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vector::Constant(d, -inf), Vector::Constant(d, inf)};
}

Support Support::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw ArgumentError("support box: bound dimensions differ");
  if ((lower.array() >= upper.array()).any()) throw ConfigError("support box: empty interval");
  return {std::move(lower), std::move(upper)};
}

bool Support::contains(const Vector& x) const {
  if (x.size() != lower.size()) return false;
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > lower(i) && x(i) < upper(i))) return false;
  }
  return true;
}

bool Support::bounded() const { return lower.array().isFinite().any() || upper.array().isFinite().any(); }

Evaluation Target::evaluate(const Vector& x) const {
  if (!in_support(x)) {
    return {-std::numeric_limits<double>::infinity(), Vector::Constant(dim(), std::nan(""))};
  }
  return {log_density(x), score(x)};
}

Vector Target::sample(Rng&) const {
  throw UndefinedStateError("target '" + name() + "' has no exact sampler");
}

}  // namespace steinmc
