// SPDX-License-Identifier: Apache-2.0
// Batched decoding of Gaussian head outputs (4 feature means, 4 log-variances)
// into absolute box moments, with the matching reverse pass.
#pragma once

#include <vector>

#include "movesort/features.hpp"
#include "movesort/nn/param_store.hpp"

namespace movesort::detail {

inline constexpr double kLogVarLimit = 30.0;

struct HeadBatch {
  std::vector<Vec4> base;               // [b] box the relative modes add to
  std::vector<int> anchor_t;            // [b] frame of the last observation
  std::vector<std::vector<int>> times;  // [b][k] target frames
};

struct HeadMoments {
  std::vector<std::vector<Vec4>> mean;  // [k][b]
  std::vector<std::vector<Vec4>> var;   // [k][b], not yet floored
};

HeadMoments decode_heads(const FeatureCodec& codec, const std::vector<nn::Matrix>& outs,
                         const HeadBatch& batch);

/// d_mean / d_var are indexed [k][b]; returns one (B x 8) gradient per head output.
std::vector<nn::Matrix> decode_heads_backward(const FeatureCodec& codec,
                                              const std::vector<nn::Matrix>& outs,
                                              const HeadBatch& batch,
                                              const std::vector<std::vector<Vec4>>& d_mean,
                                              const std::vector<std::vector<Vec4>>& d_var);

}  // namespace movesort::detail
