#pragma once

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "steinmc/errors.hpp"

namespace steinmc {

/**
 * Inverse multiquadric base kernel with an SPD preconditioner,
 *
 *   k(x, y) = (1 + (x - y)^T Lambda^{-1} (x - y))^beta,   beta in (-1, 0).
 *
 * Lambda is Cholesky-factored at construction; a matrix that fails to factor
 * is rejected with ConfigError.
 */
template <typename Scalar>
class PreconditionedImq {
 public:
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit PreconditionedImq(const MatrixType& lambda, Scalar beta = Scalar(-0.5)) : lambda_(lambda) {
    if (lambda_.rows() == 0 || lambda_.rows() != lambda_.cols()) {
      throw ConfigError("preconditioner must be a non-empty square matrix");
    }
    const Scalar scale = lambda_.cwiseAbs().maxCoeff();
    if ((lambda_ - lambda_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
      throw ConfigError("preconditioner is not symmetric");
    }
    Eigen::LLT<MatrixType> llt(lambda_);
    if (llt.info() != Eigen::Success) throw ConfigError("preconditioner is not positive definite");
    lambda_inverse_ = llt.solve(MatrixType::Identity(lambda_.rows(), lambda_.cols()));
    lambda_inverse_ = Scalar(0.5) * (lambda_inverse_ + lambda_inverse_.transpose()).eval();
    trace_inverse_ = lambda_inverse_.trace();
    set_beta(beta);
  }

  static PreconditionedImq identity(Eigen::Index d, Scalar beta = Scalar(-0.5)) {
    return PreconditionedImq(MatrixType::Identity(d, d), beta);
  }

  Eigen::Index dim() const { return lambda_.rows(); }
  Scalar beta() const { return beta_; }
  const MatrixType& lambda() const { return lambda_; }
  const MatrixType& lambda_inverse() const { return lambda_inverse_; }
  Scalar trace_lambda_inverse() const { return trace_inverse_; }

  void set_beta(Scalar beta) {
    if (!(beta > Scalar(-1) && beta < Scalar(0))) {
      throw ConfigError("IMQ exponent must lie in (-1, 0), got " + std::to_string(static_cast<double>(beta)));
    }
    beta_ = beta;
  }

 private:
  MatrixType lambda_;
  MatrixType lambda_inverse_;
  Scalar trace_inverse_ = 0;
  Scalar beta_ = Scalar(-0.5);
};

namespace detail {

template <typename Scalar, typename DX, typename DY>
void check_pair(const PreconditionedImq<Scalar>& k, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  require_dim(k.dim(), x.size(), "kernel argument x");
  require_dim(k.dim(), y.size(), "kernel argument y");
}

}  // namespace detail

/// k(x, y); lies in (0, 1] and equals 1 exactly when x == y.
template <typename Scalar, typename DX, typename DY>
Scalar imq_eval(const PreconditionedImq<Scalar>& k, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  detail::check_pair(k, x, y);
  const auto u = (x - y).eval();
  const Scalar r2 = u.dot(k.lambda_inverse() * u);
  return std::pow(Scalar(1) + r2, k.beta());
}

/// Gradient in the first argument: 2 beta (1 + r^2)^(beta - 1) Lambda^{-1} (x - y).
template <typename Scalar, typename DX, typename DY>
typename PreconditionedImq<Scalar>::VectorType imq_grad_x(const PreconditionedImq<Scalar>& k,
                                                          const Eigen::MatrixBase<DX>& x,
                                                          const Eigen::MatrixBase<DY>& y) {
  detail::check_pair(k, x, y);
  const auto u = (x - y).eval();
  const typename PreconditionedImq<Scalar>::VectorType w = k.lambda_inverse() * u;
  const Scalar r2 = u.dot(w);
  return Scalar(2) * k.beta() * std::pow(Scalar(1) + r2, k.beta() - Scalar(1)) * w;
}

/// Divergence of the mixed gradient, sum_i d^2 k / dx_i dy_i.
template <typename Scalar, typename DX, typename DY>
Scalar imq_div_grad(const PreconditionedImq<Scalar>& k, const Eigen::MatrixBase<DX>& x,
                    const Eigen::MatrixBase<DY>& y) {
  detail::check_pair(k, x, y);
  const auto u = (x - y).eval();
  const typename PreconditionedImq<Scalar>::VectorType w = k.lambda_inverse() * u;
  const Scalar base = Scalar(1) + u.dot(w);
  const Scalar b = k.beta();
  return Scalar(-4) * b * (b - Scalar(1)) * std::pow(base, b - Scalar(2)) * w.squaredNorm() -
         Scalar(2) * b * std::pow(base, b - Scalar(1)) * k.trace_lambda_inverse();
}

/**
 * Langevin Stein kernel built on a preconditioned IMQ base kernel,
 *
 *   k0(x, y) = div_x div_y k + <grad_x k, s(y)> + <grad_y k, s(x)> + k <s(x), s(y)>,
 *
 * where s = grad log p is supplied by the caller at each evaluation, so scores
 * already computed by a sampler can be reused.
 */
template <typename Scalar>
class SteinKernelContext {
 public:
  using Base = PreconditionedImq<Scalar>;

  SteinKernelContext(Base base, Eigen::Index score_dim) : base_(std::move(base)), score_dim_(score_dim) {
    if (score_dim_ != base_.dim()) {
      throw ConfigError("Stein kernel: preconditioner dimension " + std::to_string(base_.dim()) +
                        " does not match target dimension " + std::to_string(score_dim_));
    }
  }

  const Base& base() const { return base_; }
  Eigen::Index score_dim() const { return score_dim_; }

  /// Evaluates k0 without temporaries; this is the hot path of every greedy loop.
  template <typename DX, typename DSX, typename DY, typename DSY>
  Scalar operator()(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DSX>& score_x,
                    const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DSY>& score_y) const {
    const Eigen::Index d = score_dim_;
    require_dim(d, x.size(), "Stein kernel x");
    require_dim(d, y.size(), "Stein kernel y");
    require_dim(d, score_x.size(), "Stein kernel score_x");
    require_dim(d, score_y.size(), "Stein kernel score_y");

    const auto& inv = base_.lambda_inverse();
    Scalar r2 = 0, w2 = 0, w_dot_ds = 0, sx_dot_sy = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      Scalar wi = 0;
      for (Eigen::Index j = 0; j < d; ++j) wi += inv(i, j) * (x(j) - y(j));
      const Scalar sxi = score_x(i), syi = score_y(i);
      r2 += (x(i) - y(i)) * wi;
      w2 += wi * wi;
      w_dot_ds += wi * (syi - sxi);
      sx_dot_sy += sxi * syi;
    }
    if (!std::isfinite(sx_dot_sy) || !std::isfinite(w_dot_ds)) {
      throw InvalidScoreError("Stein kernel: non-finite score");
    }
    const Scalar b = base_.beta();
    const Scalar base = Scalar(1) + r2;
    const Scalar k = std::pow(base, b);
    const Scalar k1 = k / base;
    const Scalar k2 = k1 / base;
    return Scalar(-4) * b * (b - Scalar(1)) * k2 * w2 - Scalar(2) * b * k1 * base_.trace_lambda_inverse() +
           Scalar(2) * b * k1 * w_dot_ds + k * sx_dot_sy;
  }

 private:
  Base base_;
  Eigen::Index score_dim_;
};

/// k0(x, y) assembled from the four terms; see SteinKernelContext.
template <typename Scalar, typename DX, typename DSX, typename DY, typename DSY>
Scalar stein_kernel_eval(const SteinKernelContext<Scalar>& ctx, const Eigen::MatrixBase<DX>& x,
                         const Eigen::MatrixBase<DSX>& score_x, const Eigen::MatrixBase<DY>& y,
                         const Eigen::MatrixBase<DSY>& score_y) {
  return ctx(x, score_x, y, score_y);
}

using Imq = PreconditionedImq<double>;
using SteinKernel = SteinKernelContext<double>;

}  // namespace steinmc
