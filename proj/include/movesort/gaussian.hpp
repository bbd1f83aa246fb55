// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gaussian.hpp
 * @brief  Gaussian states over box coordinates and closed-form Bayes products.
 *
 * Diagonal states are fused per coordinate in precision form. The full
 * variant factorizes the sum of both covariances once and never forms an
 * explicit inverse.
 */
#pragma once

#include <Eigen/Core>

#include "movesort/geom.hpp"

namespace movesort {

/// Lower bound applied to every variance (normalized coordinates).
inline constexpr double kVarianceFloor = 1e-6;

/// 4-dim mean with a diagonal covariance stored as a variance vector.
struct GaussianState {
  Vec4 mean = Vec4::Zero();
  Vec4 var = Vec4::Constant(kVarianceFloor);

  GaussianState() = default;
  /// Variances below kVarianceFloor are raised to it.
  GaussianState(const Vec4& m, const Vec4& v);

  Box box() const { return Box::from_vec(mean); }
  Vec4 precision() const { return var.cwiseInverse(); }
};

/// Mean and symmetric positive-definite covariance of arbitrary dimension.
struct FullGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Throws std::invalid_argument if cov is not square, not symmetric within
  /// 1e-9, or fails Cholesky factorization.
  FullGaussian(Eigen::VectorXd m, Eigen::MatrixXd c);
};

/// Product of a diagonal prior with a diagonal measurement likelihood.
/// Throws std::invalid_argument on a nonpositive measurement variance.
GaussianState fuse_diag(const GaussianState& prior, const Vec4& meas_mean, const Vec4& meas_var);

/// Product of two full Gaussians, covariance symmetrized.
/// Throws std::invalid_argument on dimension mismatch.
FullGaussian fuse_full(const FullGaussian& prior, const FullGaussian& likelihood);

/// Gaussian negative log-likelihood averaged over the 4 coordinates, with the
/// variance clamped below at kVarianceFloor.
double nll(const Vec4& target, const Vec4& mean, const Vec4& var);

/// Gradient of the summed (not averaged) per-coordinate NLL terms with respect
/// to mean and variance. Coordinates whose variance sits below the floor get a
/// zero variance gradient.
struct NllGrad {
  double loss = 0.0;
  Vec4 d_mean = Vec4::Zero();
  Vec4 d_var = Vec4::Zero();
};
NllGrad nll_sum_grad(const Vec4& target, const Vec4& mean, const Vec4& var);

}  // namespace movesort
