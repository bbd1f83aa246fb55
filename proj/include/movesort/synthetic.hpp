// SPDX-License-Identifier: Apache-2.0
/**
 * @file   synthetic.hpp
 * @brief  Seeded synthetic scenes: ground-truth trajectories and corrupted
 *         detections.
 *
 * Kinds:
 *  - constant-velocity: straight lines at a fixed speed.
 *  - sinusoidal:        constant horizontal drift plus a vertical sine.
 *  - crossing-pair:     two objects on mirrored paths meeting at crossing_frame.
 *  - random-walk-turns: constant speed, heading perturbed at random frames.
 *
 * Detections copy each ground-truth box, add N(0, (sigma w)^2) to left and
 * width and N(0, (sigma h)^2) to top and height, then drop it with fn_prob.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "movesort/features.hpp"
#include "movesort/nn/param_store.hpp"

namespace movesort {

enum class SyntheticKind { kConstantVelocity, kSinusoidal, kCrossingPair, kRandomWalkTurns };

std::string_view to_string(SyntheticKind k);
/// Accepts "constant-velocity", "sinusoidal", "crossing-pair", "random-walk-turns".
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kConstantVelocity;
  int n_objects = 1;
  int n_frames = 100;
  double speed = 0.01;       ///< per frame, normalized units
  double amplitude = 0.1;    ///< sinusoidal
  double period = 40.0;      ///< sinusoidal, frames
  double turn_prob = 0.05;   ///< random-walk-turns, per frame
  double turn_sigma = 0.6;   ///< random-walk-turns, radians
  int crossing_frame = 50;   ///< crossing-pair
  double crossing_dy = 0.0;  ///< crossing-pair: vertical offset of the second object
  double crossing_scale = 0.0;  ///< crossing-pair: second box size over the first; 0 draws it independently
  double crossing_weave = 0.0;  ///< crossing-pair: vertical sinusoid amplitude, zero at the crossing
  double scale_amplitude = 0.1;  ///< relative size oscillation about the box center
  double scale_period = 80.0;    ///< frames
  double min_width = 0.05, max_width = 0.12;
  double min_height = 0.10, max_height = 0.25;
  double noise_sigma = 0.0;
  double fn_prob = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on invalid probabilities or counts.
  void validate() const;
};

struct SyntheticScene {
  std::vector<Trajectory> truth;
  /// Same ids as truth; dropped frames are absent.
  std::vector<Trajectory> detections;
};

SyntheticScene generate(const SyntheticSpec& spec);

/// Truth trajectories only (no detection draws).
std::vector<Trajectory> generate_truth(const SyntheticSpec& spec, nn::Rng& rng);

/// Noise + drop corruption of ground truth with an explicit generator.
std::vector<Trajectory> corrupt(const std::vector<Trajectory>& truth, double sigma, double fn_prob,
                                nn::Rng& rng);

/// Boxes of every trajectory grouped by frame, in trajectory order.
std::map<int, std::vector<Box>> boxes_by_frame(const std::vector<Trajectory>& trajs);

}  // namespace movesort
