// SPDX-License-Identifier: Apache-2.0
/**
 * @file   kalman.hpp
 * @brief  Constant-velocity Kalman filter over (left, top, width, height)
 *         with process and measurement noise proportional to box size.
 */
#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "movesort/gaussian.hpp"
#include "movesort/geom.hpp"

namespace movesort {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix4d;
using Mat48 = Eigen::Matrix<double, 4, 8>;

struct KalmanParams {
  double sigma_p = 0.05;     ///< process noise, position
  double sigma_v = 0.00625;  ///< process noise, velocity
  double sigma_m = 0.05;     ///< measurement noise
  double dt = 1.0;
  double init_pos_mult = 2.0;   ///< initial position std = mult * sigma_p * dim
  double init_vel_mult = 10.0;  ///< initial velocity std = mult * sigma_v * dim

  /// Throws std::invalid_argument if any scale is nonpositive.
  void validate() const;
};

/// State: box coordinates followed by their velocities.
struct KalmanState {
  Vec8 z = Vec8::Zero();
  Mat8 P = Mat8::Identity();
};

class KalmanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mat8 transition_matrix(double dt);
Mat48 observation_matrix();
/// Bot-Sort process noise from the previous posterior width and height.
Mat8 process_noise(const KalmanParams& params, double width, double height);
/// Bot-Sort measurement noise from the measured width and height.
Mat4 measurement_noise(const KalmanParams& params, double width, double height);

KalmanState kf_init(const Box& first_meas, const KalmanParams& params);

struct KalmanPrediction {
  KalmanState state;
  GaussianState observation;  ///< mean H z, variance diag(H P H^T), R excluded
};
KalmanPrediction kf_predict(const KalmanState& s, const KalmanParams& params);

/// Throws KalmanError if the innovation covariance cannot be factorized.
KalmanState kf_update(const KalmanState& prior, const Box& meas, const KalmanParams& params);

}  // namespace movesort
