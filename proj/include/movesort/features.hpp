// SPDX-License-Identifier: Apache-2.0
/**
 * @file   features.hpp
 * @brief  Trajectory featurization for the motion models.
 *
 * Every encoded row holds 4 transformed box coordinates followed by a time
 * feature T_i = t_i - t_1 + 1, where t_1 is the oldest observation passed in.
 * Standardization, when enabled, is applied column-wise as the last step.
 *
 * Modes:
 *  - absolute:            Y_i = X_i,                              n rows
 *  - first_difference:    Y_i = (X_{i+1} - X_i) / (t_{i+1} - t_i), n-1 rows
 *  - relative_to_last:    Y_i = X_n - X_i,                        n-1 rows
 *  - relative_to_first:   Y_i = X_i - X_1,                        n rows
 *
 * Model outputs live in the same (standardized) space and are mapped back to
 * absolute coordinates by decode().
 */
#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "movesort/gaussian.hpp"
#include "movesort/geom.hpp"

namespace movesort {

struct Observation {
  int t = 0;
  Box box;
};

struct Trajectory {
  int id = 0;
  std::vector<Observation> obs;
};

/// Per-track history with a sliding time window that is extended backwards
/// so that at least min_size entries survive.
class MeasurementBuffer {
 public:
  explicit MeasurementBuffer(int default_size = 30, int min_size = 5);

  /// Appends and trims. Throws std::invalid_argument unless obs.t is greater
  /// than the last entry's frame.
  void push(const Observation& obs);

  const std::vector<Observation>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Observation& back() const { return entries_.back(); }
  int default_size() const { return default_size_; }
  int min_size() const { return min_size_; }

 private:
  int default_size_;
  int min_size_;
  std::vector<Observation> entries_;
};

enum class FeatureMode { kAbsolute, kFirstDifference, kRelativeToLast, kRelativeToFirst };

std::string_view to_string(FeatureMode mode);
/// Accepts "absolute", "sfod", "rloc", "rfirst". Throws std::invalid_argument.
FeatureMode parse_feature_mode(std::string_view name);

using Vec5 = Eigen::Matrix<double, 5, 1>;

struct FeatureCodec {
  FeatureMode mode = FeatureMode::kRelativeToLast;
  bool standardize = true;
  Vec5 mean = Vec5::Zero();
  Vec5 std = Vec5::Ones();

  /// Minimum trajectory length the mode can encode.
  std::size_t min_observations() const;
  /// Number of encoded rows for a trajectory of n observations.
  std::size_t rows_for(std::size_t n) const;
  /// Standardizes a raw time feature value (identity when disabled).
  double time_feature(double t_rel) const;
  /// Throws std::invalid_argument when standardization statistics are invalid.
  void validate() const;
};

/// Encoded features before standardization.
Eigen::MatrixXd encode_raw(FeatureMode mode, std::span<const Observation> obs);

/// Throws std::invalid_argument when obs has fewer than min_observations().
Eigen::MatrixXd encode(const FeatureCodec& codec, std::span<const Observation> obs);

/// Model output in feature space: means and variances of the 4 box columns.
struct FeatureMoments {
  Vec4 mean = Vec4::Zero();
  Vec4 var = Vec4::Ones();
};

/// Maps feature-space outputs for consecutive target frames back to absolute
/// coordinates. `anchor` is the last observation for relative_to_last and
/// first_difference, the first observation for relative_to_first, and is
/// ignored for absolute. First-difference outputs are accumulated with their
/// time steps and their variances summed as independent increments.
std::vector<GaussianState> decode(const FeatureCodec& codec, std::span<const FeatureMoments> outputs,
                                  const Observation& anchor, std::span<const int> target_times);

/// Inverse of decode() on means: feature-space targets for future boxes,
/// with the same anchor convention.
std::vector<Vec4> encode_targets(const FeatureCodec& codec, const Observation& anchor,
                                 std::span<const Observation> targets);

struct Standardizer {
  Vec5 mean;
  Vec5 std;
};

/// Population mean and std over all encoded rows; std floored at 1e-8.
/// Throws std::invalid_argument when no rows can be encoded.
Standardizer fit_standardizer(FeatureMode mode, std::span<const std::vector<Observation>> sequences);

}  // namespace movesort
