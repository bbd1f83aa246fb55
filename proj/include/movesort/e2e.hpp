// SPDX-License-Identifier: Apache-2.0
/**
 * @file   e2e.hpp
 * @brief  Learned recurrent filters with separate predict and update steps.
 *
 * A latent state z is carried frame by frame. The predict step advances it by
 * one frame (a GRU cell fed with the frame's time feature, or RK4 under an MLP
 * vector field); the update step is a GRU cell fed with the measurement. Two
 * heads map the predicted and updated latents to box Gaussians. Features are
 * relative to the first observation of the sequence so that every frame only
 * depends on the past.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "movesort/features.hpp"
#include "movesort/gaussian.hpp"
#include "movesort/motion.hpp"
#include "movesort/nn/gru.hpp"
#include "movesort/nn/layers.hpp"
#include "movesort/nn/serialize.hpp"

namespace movesort {

enum class E2eArch { kRnnFilter, kNodeFilter };

std::string_view to_string(E2eArch arch);
/// Accepts "rnnfilter" and "nodefilter".
E2eArch parse_e2e_arch(std::string_view name);

struct E2eModelConfig {
  E2eArch arch = E2eArch::kRnnFilter;
  int hidden = 32;
  int history_len = 30;
  double ode_step = 0.25;
  double leaky_slope = nn::kDefaultLeakySlope;
  bool standardize = true;
};

/// Consecutive frames t_first, t_first + 1, ... with an optional measurement
/// per frame. The first frame must carry a measurement.
struct E2eSequence {
  int t_first = 0;
  std::vector<std::optional<Box>> meas;
  /// Ground truth per frame; only needed for the loss.
  std::vector<Box> truth;
};

struct E2eFrame {
  GaussianState prior;
  GaussianState posterior;
  bool updated = false;
};

struct E2eRollout {
  std::vector<std::vector<E2eFrame>> frames;  // [sequence][frame]
  /// Predicted latent at the last frame of each sequence, one row each.
  nn::Matrix last_latent;
};

class E2eModel {
 public:
  E2eModel(const E2eModelConfig& cfg, std::uint64_t seed);

  static E2eModel from_file(const nn::ModelFile& file);
  nn::ModelFile to_file() const;

  /// Throws std::invalid_argument on an empty sequence or a missing first
  /// measurement.
  E2eRollout unroll(std::span<const E2eSequence> seqs) const;

  /// Update step on a stored predicted latent (1 x hidden).
  GaussianState update_latent(const nn::Matrix& z_hat, const Box& anchor, int t_first, int t,
                              const Box& meas) const;

  /// Mean NLL of the prior (except on first frames) and the posterior of every frame.
  double loss(std::span<const E2eSequence> seqs) const;
  double loss_and_grad(std::span<const E2eSequence> seqs);

  const E2eModelConfig& config() const { return cfg_; }
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
  E2eRollout run(std::span<const E2eSequence> seqs, Tape* tape, double* loss) const;
  void backward(const Tape& tape);
  nn::Matrix update_input(const Box& anchor, int t_first, int t, const Box& meas) const;

  E2eModelConfig cfg_;
  FeatureCodec codec_;
  nn::ParamStore ps_;
  nn::GruCell predict_cell_;  // rnnfilter
  nn::Mlp vector_field_;      // nodefilter
  nn::GruCell update_cell_;
  nn::Mlp prior_head_;
  nn::Mlp posterior_head_;
  std::uint64_t seed_ = 0;
  double final_loss_ = 0.0;
};

/// Trains on windows of history_len + 1 consecutive ground-truth frames,
/// with the augmentations of `cfg` applied to the measurements.
E2eModel train_e2e(const E2eModelConfig& model_cfg, std::span<const Trajectory> data,
                   const TrainConfig& cfg, TrainReport* report = nullptr);

}  // namespace movesort
