// SPDX-License-Identifier: Apache-2.0
#include "movesort/gaussian.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace movesort {

GaussianState::GaussianState(const Vec4& m, const Vec4& v)
    : mean(m), var(v.cwiseMax(kVarianceFloor)) {}

FullGaussian::FullGaussian(Eigen::VectorXd m, Eigen::MatrixXd c)
    : mean(std::move(m)), cov(std::move(c)) {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
    throw std::invalid_argument("FullGaussian: covariance shape does not match mean");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("FullGaussian: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("FullGaussian: covariance is not positive definite");
  }
}

GaussianState fuse_diag(const GaussianState& prior, const Vec4& meas_mean, const Vec4& meas_var) {
  if ((meas_var.array() <= 0.0).any()) {
    throw std::invalid_argument("fuse_diag: measurement variance must be positive");
  }
  const Vec4 p_prior = prior.var.cwiseInverse();
  const Vec4 p_meas = meas_var.cwiseInverse();
  const Vec4 p_post = p_prior + p_meas;
  const Vec4 mean =
      (p_meas.cwiseProduct(meas_mean) + p_prior.cwiseProduct(prior.mean)).cwiseQuotient(p_post);
  return {mean, p_post.cwiseInverse()};
}

FullGaussian fuse_full(const FullGaussian& prior, const FullGaussian& likelihood) {
  if (prior.mean.size() != likelihood.mean.size()) {
    throw std::invalid_argument("fuse_full: dimension mismatch");
  }
  // With S = A + B: (A^-1 + B^-1)^-1 = A S^-1 B and the mean weights are
  // B S^-1 (prior) and A S^-1 (likelihood).
  const Eigen::MatrixXd& a = prior.cov;
  const Eigen::MatrixXd& b = likelihood.cov;
  Eigen::LLT<Eigen::MatrixXd> s(a + b);
  if (s.info() != Eigen::Success) {
    throw std::invalid_argument("fuse_full: covariance sum is not positive definite");
  }
  Eigen::MatrixXd cov = a * s.solve(b);
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::VectorXd mean = b * s.solve(prior.mean) + a * s.solve(likelihood.mean);
  return {std::move(mean), std::move(cov)};
}

double nll(const Vec4& target, const Vec4& mean, const Vec4& var) {
  const Vec4 v = var.cwiseMax(kVarianceFloor);
  double total = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double r = mean[j] - target[j];
    total += 0.5 * r * r / v[j] + 0.5 * std::log(2.0 * std::numbers::pi * v[j]);
  }
  return total / 4.0;
}

NllGrad nll_sum_grad(const Vec4& target, const Vec4& mean, const Vec4& var) {
  NllGrad g;
  for (int j = 0; j < 4; ++j) {
    const bool clamped = var[j] < kVarianceFloor;
    const double v = clamped ? kVarianceFloor : var[j];
    const double r = mean[j] - target[j];
    g.loss += 0.5 * r * r / v + 0.5 * std::log(2.0 * std::numbers::pi * v);
    g.d_mean[j] = r / v;
    g.d_var[j] = clamped ? 0.0 : 0.5 / v - 0.5 * r * r / (v * v);
  }
  return g;
}

}  // namespace movesort
