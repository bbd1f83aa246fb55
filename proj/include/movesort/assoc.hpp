// SPDX-License-Identifier: Apache-2.0
/**
 * @file   assoc.hpp
 * @brief  Track-to-detection association costs and minimum-cost assignment.
 */
#pragma once

#include <Eigen/Core>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "movesort/geom.hpp"

namespace movesort {

enum class CostMode { kIou, kHybrid };

std::string_view to_string(CostMode mode);
/// Accepts "iou" and "hybrid".
CostMode parse_cost_mode(std::string_view name);

struct CostMatrix {
  Eigen::MatrixXd cost;                                          // rows: tracks, cols: detections
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed;  // false where gated out
  double lambda = 0.0;

  Eigen::Index rows() const { return cost.rows(); }
  Eigen::Index cols() const { return cost.cols(); }
};

/// iou: -IoU; hybrid: -IoU + lambda * L1. A cell is allowed iff IoU >= iou_min.
/// Throws std::invalid_argument for lambda < 0 or iou_min outside [0, 1].
CostMatrix build_costs(std::span<const Box> priors, std::span<const Box> dets, double lambda,
                       double iou_min, CostMode mode);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Value standing in for gated cells during the solve.
double sentinel_cost(const CostMatrix& m);

/// Minimum total cost matching over allowed cells (Hungarian method). Among
/// equal-cost optima the lowest row takes the lowest column, then the next row.
Assignment solve_assignment(const CostMatrix& m);

/// Unconstrained minimum-cost matching of min(rows, cols) pairs.
std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost);

}  // namespace movesort
