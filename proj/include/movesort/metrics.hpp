// SPDX-License-Identifier: Apache-2.0
/**
 * @file   metrics.hpp
 * @brief  Filter accuracy (mean IoU, MSE) and CLEAR-MOT / identity metrics.
 */
#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "movesort/geom.hpp"

namespace movesort {

struct FilterAccuracy {
  double accuracy = 0.0;  ///< mean IoU
  double mse = 0.0;       ///< mean over boxes and coordinates of the squared error
};

/// Throws std::invalid_argument when the lengths differ. Empty input gives zeros.
FilterAccuracy filter_accuracy(std::span<const Box> predictions, std::span<const Box> truth);

/// frame -> (object id, box)
using FrameAnnotations = std::map<int, std::vector<std::pair<int, Box>>>;

inline constexpr double kMotIouGate = 0.5;

struct MotMetrics {
  double mota = 0.0;
  double idf1 = 0.0;
  int idsw = 0;
  int fp = 0;
  int fn = 0;
  int num_gt = 0;
  int matches = 0;
  int idtp = 0;
  int idfp = 0;
  int idfn = 0;
};

/// Per frame, a ground-truth object keeps its most recent hypothesis while
/// their IoU stays at or above kMotIouGate; the remaining objects are matched
/// by minimum -IoU assignment under the same gate. An identity switch is a
/// change of the hypothesis matched to a ground-truth id.
MotMetrics mot_metrics(const FrameAnnotations& hypotheses, const FrameAnnotations& truth);

/// "name,value" lines.
void write_metrics(std::ostream& os, const MotMetrics& m);

}  // namespace movesort
