#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace steinmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using PointSet = std::vector<Vector>;
using Rng = std::mt19937_64;

/// Independent RNG stream derived from a run seed and a stream name ("chain", "search", ...).
inline Rng substream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// Vector of iid N(0,1) draws.
inline Vector standard_normal(Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d);
  for (Index i = 0; i < d; ++i) z(i) = normal(rng);
  return z;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Stacks points as the rows of an n x d matrix.
inline Matrix stack_rows(const PointSet& points) {
  if (points.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Index>(points.size()), points.front().size());
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Index>(i)) = points[i].transpose();
  return out;
}

inline PointSet unstack_rows(const Matrix& m) {
  PointSet out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

}  // namespace steinmc
