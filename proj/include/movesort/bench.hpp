// SPDX-License-Identifier: Apache-2.0
/**
 * @file   bench.hpp
 * @brief  Filter robustness sweeps over detector noise and miss rate.
 *
 * Every filter runs along each ground-truth trajectory on the same corrupted
 * detections: init at the first detection, then predict every frame and
 * update or coast. Priors and posteriors are scored against ground truth.
 * Frames inside runs of 5 or more consecutive missed detections are left out.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "movesort/filters.hpp"

namespace movesort {

inline constexpr int kExclusionRun = 5;

struct NamedFilter {
  std::string name;
  FilterKind kind;
};

struct BenchScore {
  double prior_accuracy = 0.0;
  double posterior_accuracy = 0.0;
  double prior_mse = 0.0;
  double posterior_mse = 0.0;
  long count = 0;
};

/// true for frames of `truth` that lie in a run of >= kExclusionRun frames
/// without a detection.
std::vector<char> exclusion_mask(const Trajectory& truth, const Trajectory& dets);

/// Scores one filter on aligned truth/detection trajectories (same order).
BenchScore evaluate_filter(const FilterKind& kind, const std::vector<Trajectory>& truth,
                           const std::vector<Trajectory>& dets);

struct BenchTable {
  std::string axis;  ///< "sigma" or "fn"
  std::vector<double> grid;
  std::vector<std::string> filters;
  /// [filter][grid point], each averaged over seeds
  std::vector<std::vector<BenchScore>> mean;
  /// [filter][grid point][seed]
  std::vector<std::vector<std::vector<BenchScore>>> per_seed;

  /// Header "filter,metric,<grid...>", then prior and posterior accuracy and
  /// MSE rows per filter.
  void write_csv(std::ostream& os) const;
};

inline const std::vector<double> kNoiseGrid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
inline const std::vector<double> kFnGrid = {0.0, 0.2, 0.4, 0.6, 0.8};

struct BenchConfig {
  std::vector<double> grid;
  double fixed_sigma = 0.0;  ///< noise used by the miss-rate sweep
  double fixed_fn = 0.0;     ///< miss rate used by the noise sweep
  int seeds = 1;
  std::uint64_t seed = 0;
};

BenchTable bench_noise(const std::vector<NamedFilter>& filters, const std::vector<Trajectory>& truth,
                       const BenchConfig& cfg);
BenchTable bench_fn(const std::vector<NamedFilter>& filters, const std::vector<Trajectory>& truth,
                    const BenchConfig& cfg);

}  // namespace movesort
