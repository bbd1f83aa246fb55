// SPDX-License-Identifier: Apache-2.0
#include "movesort/kalman.hpp"

#include <Eigen/Cholesky>

namespace movesort {

void KalmanParams::validate() const {
  if (sigma_p <= 0.0 || sigma_v <= 0.0 || sigma_m <= 0.0 || dt <= 0.0 || init_pos_mult <= 0.0 ||
      init_vel_mult <= 0.0) {
    throw std::invalid_argument("KalmanParams: all scales must be positive");
  }
}

Mat8 transition_matrix(double dt) {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = dt;
  return f;
}

Mat48 observation_matrix() {
  Mat48 h = Mat48::Zero();
  h.leftCols<4>().setIdentity();
  return h;
}

namespace {

Vec8 size_scaled(double pos_scale, double vel_scale, double w, double h) {
  Vec8 s;
  s << pos_scale * w, pos_scale * h, pos_scale * w, pos_scale * h, vel_scale * w, vel_scale * h,
      vel_scale * w, vel_scale * h;
  return s;
}

}  // namespace

Mat8 process_noise(const KalmanParams& params, double width, double height) {
  const Vec8 s = size_scaled(params.sigma_p, params.sigma_v, width, height);
  return s.cwiseAbs2().asDiagonal();
}

Mat4 measurement_noise(const KalmanParams& params, double width, double height) {
  Vec4 s(params.sigma_m * width, params.sigma_m * height, params.sigma_m * width,
         params.sigma_m * height);
  return s.cwiseAbs2().asDiagonal();
}

KalmanState kf_init(const Box& first_meas, const KalmanParams& params) {
  KalmanState s;
  s.z.head<4>() = first_meas.vec();
  s.z.tail<4>().setZero();
  const Vec8 std = size_scaled(params.init_pos_mult * params.sigma_p,
                               params.init_vel_mult * params.sigma_v, first_meas.width,
                               first_meas.height);
  s.P = std.cwiseAbs2().asDiagonal();
  return s;
}

KalmanPrediction kf_predict(const KalmanState& s, const KalmanParams& params) {
  const Mat8 f = transition_matrix(params.dt);
  KalmanState out;
  out.z = f * s.z;
  out.P = f * s.P * f.transpose() + process_noise(params, s.z[2], s.z[3]);
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  const Vec4 mean = out.z.head<4>();
  const Vec4 var = out.P.topLeftCorner<4, 4>().diagonal();
  return {out, GaussianState(mean, var)};
}

KalmanState kf_update(const KalmanState& prior, const Box& meas, const KalmanParams& params) {
  const Mat48 h = observation_matrix();
  const Mat4 innovation_cov =
      h * prior.P * h.transpose() + measurement_noise(params, meas.width, meas.height);
  Eigen::LLT<Mat4> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw KalmanError("kf_update: innovation covariance is singular");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(h * prior.P).transpose();
  const Vec4 innovation = meas.vec() - h * prior.z;
  KalmanState post;
  post.z = prior.z + gain * innovation;
  post.P = prior.P - gain * innovation_cov * gain.transpose();
  post.P = 0.5 * (post.P + post.P.transpose()).eval();
  return post;
}

}  // namespace movesort
