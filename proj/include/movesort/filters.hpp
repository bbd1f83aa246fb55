// SPDX-License-Identifier: Apache-2.0
/**
 * @file   filters.hpp
 * @brief  Uniform per-track filter: init, then repeated predict followed by
 *         exactly one of update or missing.
 *
 * Kinds:
 *  - kalman: constant-velocity Kalman filter.
 *  - bayes:  learned motion-model prior fused with a size-proportional
 *            measurement likelihood.
 *  - rnn-e2e / node-e2e: learned recurrent filter rerun over the measurement
 *            buffer at every predict.
 */
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "movesort/e2e.hpp"
#include "movesort/features.hpp"
#include "movesort/gaussian.hpp"
#include "movesort/kalman.hpp"
#include "movesort/motion.hpp"

namespace movesort {

enum class FilterFamily { kKalman, kBayes, kRnnE2e, kNodeE2e };

std::string_view to_string(FilterFamily f);
/// Accepts "kalman", "bayes", "rnn-e2e", "node-e2e".
FilterFamily parse_filter_family(std::string_view name);

/// Standard deviation factor of the cold-start prior: (0.05 * dim)^2 variance.
inline constexpr double kColdStartSigma = 0.05;

struct FilterKind {
  FilterFamily family = FilterFamily::kKalman;
  KalmanParams kalman;
  std::shared_ptr<const MotionModel> motion;
  std::shared_ptr<const E2eModel> e2e;
  double meas_noise_sigma = 0.05;
  int buffer_size = 30;
  int buffer_min = 5;

  static FilterKind make_kalman(const KalmanParams& params = {});
  static FilterKind make_bayes(std::shared_ptr<const MotionModel> model, double sigma_m = 0.05);
  /// Family follows the model's architecture.
  static FilterKind make_e2e(std::shared_ptr<const E2eModel> model);

  /// Throws std::invalid_argument when the payload does not match the family.
  void validate() const;
};

class FilterContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Measurement variances of the Bayes family, from the measured box.
Vec4 bayes_measurement_var(const Box& meas, double sigma_m);
/// Prior used before a learned motion model has enough history.
GaussianState cold_start_prior(const Box& last);

class Filter {
 public:
  enum class Phase { kUninitialized, kReady, kPredicted };

  explicit Filter(FilterKind kind);

  /// Starts the filter from its first measurement; returns the initial estimate.
  GaussianState init(const Observation& first);
  /// Throws FilterContractError unless the filter is ready and t_next is
  /// after the current frame.
  GaussianState predict(int t_next);
  /// Both throw FilterContractError unless a prior is pending.
  GaussianState update(const Box& meas);
  GaussianState missing();

  Phase phase() const { return phase_; }
  FilterFamily family() const { return kind_.family; }
  int frame() const { return frame_; }
  const MeasurementBuffer& buffer() const { return buffer_; }
  const KalmanState& kalman_state() const { return kf_; }
  const GaussianState& prior() const { return prior_; }

 private:
  friend std::vector<GaussianState> predict_many(std::span<Filter* const> filters,
                                                 std::span<const int> t_next);
  void check_predict(int t_next) const;
  void check_pending(const char* op) const;
  void set_prior(int t_next, const GaussianState& prior);
  E2eSequence e2e_sequence(int t_next) const;

  FilterKind kind_;
  Phase phase_ = Phase::kUninitialized;
  int frame_ = 0;
  MeasurementBuffer buffer_;
  KalmanState kf_;
  nn::Matrix latent_;
  GaussianState prior_;
};

/// Predicts every filter to its target frame, batching learned models.
/// Same contract as Filter::predict for each element.
std::vector<GaussianState> predict_many(std::span<Filter* const> filters, std::span<const int> t_next);

}  // namespace movesort
