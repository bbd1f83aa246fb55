// SPDX-License-Identifier: Apache-2.0
#include "head_decode.hpp"

#include <algorithm>
#include <cmath>

namespace movesort::detail {

namespace {

struct Scale {
  Vec4 s;
  Vec4 m;
};

Scale scale_of(const FeatureCodec& codec) {
  if (!codec.standardize) return {Vec4::Ones(), Vec4::Zero()};
  return {codec.std.head<4>(), codec.mean.head<4>()};
}

double clamped_log_var(double lv) { return std::clamp(lv, -kLogVarLimit, kLogVarLimit); }

double step_of(const HeadBatch& batch, std::size_t b, std::size_t k) {
  const int prev = k == 0 ? batch.anchor_t[b] : batch.times[b][k - 1];
  return static_cast<double>(batch.times[b][k] - prev);
}

}  // namespace

HeadMoments decode_heads(const FeatureCodec& codec, const std::vector<nn::Matrix>& outs,
                         const HeadBatch& batch) {
  const auto [s, m] = scale_of(codec);
  const std::size_t K = outs.size();
  const std::size_t B = batch.base.size();
  HeadMoments r;
  r.mean.assign(K, std::vector<Vec4>(B));
  r.var.assign(K, std::vector<Vec4>(B));
  for (std::size_t b = 0; b < B; ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    Vec4 acc_mean = batch.base[b];
    Vec4 acc_var = Vec4::Zero();
    for (std::size_t k = 0; k < K; ++k) {
      Vec4 mean, var;
      for (int j = 0; j < 4; ++j) {
        mean[j] = outs[k](row, j) * s[j] + m[j];
        var[j] = std::exp(clamped_log_var(outs[k](row, 4 + j))) * s[j] * s[j];
      }
      switch (codec.mode) {
        case FeatureMode::kAbsolute:
          r.mean[k][b] = mean;
          r.var[k][b] = var;
          break;
        case FeatureMode::kRelativeToLast:
        case FeatureMode::kRelativeToFirst:
          r.mean[k][b] = batch.base[b] + mean;
          r.var[k][b] = var;
          break;
        case FeatureMode::kFirstDifference: {
          const double dt = step_of(batch, b, k);
          acc_mean += mean * dt;
          acc_var += var * dt * dt;
          r.mean[k][b] = acc_mean;
          r.var[k][b] = acc_var;
          break;
        }
      }
    }
  }
  return r;
}

std::vector<nn::Matrix> decode_heads_backward(const FeatureCodec& codec,
                                              const std::vector<nn::Matrix>& outs,
                                              const HeadBatch& batch,
                                              const std::vector<std::vector<Vec4>>& d_mean,
                                              const std::vector<std::vector<Vec4>>& d_var) {
  const auto [s, m] = scale_of(codec);
  const std::size_t K = outs.size();
  const std::size_t B = batch.base.size();
  std::vector<nn::Matrix> d_outs(K, nn::Matrix::Zero(static_cast<Eigen::Index>(B), 8));
  const bool cumulative = codec.mode == FeatureMode::kFirstDifference;
  for (std::size_t b = 0; b < B; ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    Vec4 g_mean = Vec4::Zero();
    Vec4 g_var = Vec4::Zero();
    for (std::size_t k = K; k-- > 0;) {
      // Gradients on the per-step feature moments.
      double dt = 1.0;
      if (cumulative) {
        g_mean += d_mean[k][b];
        g_var += d_var[k][b];
        dt = step_of(batch, b, k);
      } else {
        g_mean = d_mean[k][b];
        g_var = d_var[k][b];
      }
      for (int j = 0; j < 4; ++j) {
        const double lv = outs[k](row, 4 + j);
        d_outs[k](row, j) = g_mean[j] * dt * s[j];
        if (std::abs(lv) < kLogVarLimit) {
          d_outs[k](row, 4 + j) = g_var[j] * std::exp(lv) * s[j] * s[j] * dt * dt;
        }
      }
    }
  }
  return d_outs;
}

}  // namespace movesort::detail
