// SPDX-License-Identifier: Apache-2.0
/**
 * @file   motion.hpp
 * @brief  Probabilistic motion models predicting a diagonal Gaussian over
 *         future boxes from a trajectory history.
 *
 * All three architectures read the codec rows of the history with a gated
 * recurrent encoder. The output head additionally receives the anchor time
 * feature (time feature of the last observation), since the difference
 * encodings do not carry it in any row.
 *
 *  - ar-rnn:  GRU over rows, head(h, anchor) gives the next frame. Longer
 *             horizons roll forward, appending predicted means to the history.
 *  - rnn-cnp: rows -> MLP encoder -> GRU aggregate r; every target is decoded
 *             independently from head(r, anchor, target time).
 *  - rnn-ode: GRU summary z is integrated with RK4 under an MLP vector field
 *             from the last observation to each target; head(z_t, anchor).
 *
 * Heads emit 4 feature-space means and 4 log-variances, decoded to absolute
 * coordinates through the codec.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "movesort/features.hpp"
#include "movesort/gaussian.hpp"
#include "movesort/nn/gru.hpp"
#include "movesort/nn/layers.hpp"
#include "movesort/nn/ode.hpp"
#include "movesort/nn/serialize.hpp"

namespace movesort {

enum class MotionArch { kArRnn, kRnnCnp, kRnnOde };

std::string_view to_string(MotionArch arch);
/// Accepts "ar-rnn", "rnn-cnp", "rnn-ode". Throws std::invalid_argument.
MotionArch parse_motion_arch(std::string_view name);

struct MotionModelConfig {
  MotionArch arch = MotionArch::kRnnCnp;
  int hidden = 32;
  int history_len = 30;
  double ode_step = 0.25;
  double leaky_slope = nn::kDefaultLeakySlope;
  FeatureMode mode = FeatureMode::kRelativeToLast;
  bool standardize = true;
};

struct NoiseLevel {
  double probability = 0.0;
  double sigma = 0.0;
};

struct TrainConfig {
  int epochs = 8;
  double lr = 1e-3;
  double weight_decay = 1e-2;
  int batch_size = 256;
  /// Per trajectory, at most one level is drawn with the listed probabilities.
  std::vector<NoiseLevel> noise_schedule = {{0.20, 0.05}, {0.05, 0.10}, {0.01, 0.25}};
  double drop_prob = 0.2;
  double shorten_prob = 0.05;
  std::uint64_t seed = 0;
  int max_horizon = 5;
  int lr_period = 4;
  double lr_gamma = 0.1;
  /// Window start stride over each training trajectory.
  int window_stride = 1;
  /// 0 means a full pass over all windows.
  int max_batches_per_epoch = 0;
  double clip_norm = 0.0;

  /// Schedule used for end-to-end filters.
  static TrainConfig end_to_end_defaults();
  /// Same settings with every augmentation probability set to zero.
  TrainConfig without_augmentation() const;
  /// Throws std::invalid_argument on out-of-range probabilities.
  void validate() const;
};

/// Applies noise, point removal and left shortening to each history.
/// Histories of fewer than 2 points are left as they are by the removal steps.
void augment(std::vector<std::vector<Observation>>& histories, const TrainConfig& cfg, nn::Rng& rng);
void augment_one(std::vector<Observation>& history, const TrainConfig& cfg, nn::Rng& rng);

struct MotionBatch {
  std::vector<std::vector<Observation>> histories;
  /// Ground-truth targets; every sample must have the same count.
  std::vector<std::vector<Observation>> targets;
};

class MotionModel {
 public:
  MotionModel(const MotionModelConfig& cfg, std::uint64_t seed);

  static MotionModel from_file(const nn::ModelFile& file);
  nn::ModelFile to_file() const;

  /// One Gaussian per target time, in absolute coordinates. Throws
  /// std::invalid_argument on too short a history or non-increasing targets.
  std::vector<GaussianState> predict(std::span<const Observation> history,
                                     std::span<const int> target_times) const;

  /// Batched one-step-or-more prediction; per-sample target lists may differ.
  std::vector<std::vector<GaussianState>> predict_batch(
      std::span<const std::vector<Observation>> histories,
      std::span<const std::vector<int>> target_times) const;

  /// Mean NLL over samples, targets and coordinates.
  double loss(const MotionBatch& batch) const;
  /// Same as loss(), and accumulates its gradient into params().
  double loss_and_grad(const MotionBatch& batch);

  const MotionModelConfig& config() const { return cfg_; }
  const FeatureCodec& codec() const { return codec_; }
  void set_codec(const FeatureCodec& codec);
  nn::ParamStore& params() { return ps_; }
  const nn::ParamStore& params() const { return ps_; }
  std::vector<nn::LayerSpec> layer_specs() const;

  std::uint64_t seed() const { return seed_; }
  double final_loss() const { return final_loss_; }
  void set_training_record(std::uint64_t seed, double final_loss) {
    seed_ = seed;
    final_loss_ = final_loss;
  }

 private:
  struct Tape;

  /// Core pass: equal target counts; AR-RNN requires exactly one target one
  /// frame after the last observation.
  std::vector<std::vector<GaussianState>> run(const MotionBatch& batch, Tape* tape,
                                              double* loss) const;
  void backward(const Tape& tape);
  std::vector<GaussianState> roll_forward(std::span<const Observation> history,
                                          std::span<const int> target_times) const;

  MotionModelConfig cfg_;
  FeatureCodec codec_;
  nn::ParamStore ps_;
  nn::GruCell encoder_;
  nn::Mlp row_encoder_;  // rnn-cnp only
  nn::Mlp vector_field_;  // rnn-ode only
  nn::Mlp head_;
  std::uint64_t seed_ = 0;
  double final_loss_ = 0.0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
};

/// Trains on windows of history_len observed plus up to max_horizon target
/// entries. Codec statistics are fit on the un-augmented histories. Throws
/// std::invalid_argument when no trajectory is long enough.
MotionModel train_motion(const MotionModelConfig& model_cfg, std::span<const Trajectory> data,
                         const TrainConfig& cfg, TrainReport* report = nullptr);

}  // namespace movesort
