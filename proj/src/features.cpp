// SPDX-License-Identifier: Apache-2.0
#include "movesort/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace movesort {

MeasurementBuffer::MeasurementBuffer(int default_size, int min_size)
    : default_size_(default_size), min_size_(min_size) {
  if (default_size <= 0 || min_size <= 0) {
    throw std::invalid_argument("MeasurementBuffer: sizes must be positive");
  }
}

void MeasurementBuffer::push(const Observation& obs) {
  if (!entries_.empty() && obs.t <= entries_.back().t) {
    throw std::invalid_argument("MeasurementBuffer: frame " + std::to_string(obs.t) +
                                " is not after frame " + std::to_string(entries_.back().t));
  }
  entries_.push_back(obs);
  const int window_start = obs.t - default_size_;
  const auto first_in_window =
      std::find_if(entries_.begin(), entries_.end(),
                   [&](const Observation& o) { return o.t >= window_start; });
  auto in_window = static_cast<std::size_t>(std::distance(first_in_window, entries_.end()));
  const std::size_t keep = std::min(entries_.size(),
                                    std::max(in_window, static_cast<std::size_t>(min_size_)));
  entries_.erase(entries_.begin(), entries_.end() - static_cast<std::ptrdiff_t>(keep));
}

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kAbsolute: return "absolute";
    case FeatureMode::kFirstDifference: return "sfod";
    case FeatureMode::kRelativeToLast: return "rloc";
    case FeatureMode::kRelativeToFirst: return "rfirst";
  }
  return "unknown";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "absolute") return FeatureMode::kAbsolute;
  if (name == "sfod") return FeatureMode::kFirstDifference;
  if (name == "rloc") return FeatureMode::kRelativeToLast;
  if (name == "rfirst") return FeatureMode::kRelativeToFirst;
  throw std::invalid_argument("unknown feature mode: " + std::string(name));
}

std::size_t FeatureCodec::min_observations() const {
  switch (mode) {
    case FeatureMode::kFirstDifference:
    case FeatureMode::kRelativeToLast: return 2;
    default: return 1;
  }
}

std::size_t FeatureCodec::rows_for(std::size_t n) const {
  if (n < min_observations()) return 0;
  return min_observations() == 2 ? n - 1 : n;
}

double FeatureCodec::time_feature(double t_rel) const {
  return standardize ? (t_rel - mean[4]) / std[4] : t_rel;
}

void FeatureCodec::validate() const {
  if (standardize && (std.array() <= 0.0).any()) {
    throw std::invalid_argument("FeatureCodec: standardization std must be positive");
  }
}

Eigen::MatrixXd encode_raw(FeatureMode mode, std::span<const Observation> obs) {
  const std::size_t n = obs.size();
  const bool diff = mode == FeatureMode::kFirstDifference || mode == FeatureMode::kRelativeToLast;
  if (n == 0 || (diff && n < 2)) {
    throw std::invalid_argument("encode: too few observations for mode " +
                                std::string(to_string(mode)));
  }
  const std::size_t rows = diff ? n - 1 : n;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), 5);
  const int t1 = obs.front().t;
  const Vec4 first = obs.front().box.vec();
  const Vec4 last = obs.back().box.vec();
  for (std::size_t i = 0; i < rows; ++i) {
    Vec4 y;
    const Vec4 xi = obs[i].box.vec();
    switch (mode) {
      case FeatureMode::kAbsolute: y = xi; break;
      case FeatureMode::kFirstDifference:
        y = (obs[i + 1].box.vec() - xi) / static_cast<double>(obs[i + 1].t - obs[i].t);
        break;
      case FeatureMode::kRelativeToLast: y = last - xi; break;
      case FeatureMode::kRelativeToFirst: y = xi - first; break;
    }
    const auto r = static_cast<Eigen::Index>(i);
    out.block<1, 4>(r, 0) = y.transpose();
    out(r, 4) = static_cast<double>(obs[i].t - t1 + 1);
  }
  return out;
}

Eigen::MatrixXd encode(const FeatureCodec& codec, std::span<const Observation> obs) {
  Eigen::MatrixXd raw = encode_raw(codec.mode, obs);
  if (codec.standardize) {
    raw = (raw.rowwise() - codec.mean.transpose()).array().rowwise() /
          codec.std.transpose().array();
  }
  return raw;
}

std::vector<GaussianState> decode(const FeatureCodec& codec, std::span<const FeatureMoments> outputs,
                                  const Observation& anchor, std::span<const int> target_times) {
  if (outputs.size() != target_times.size()) {
    throw std::invalid_argument("decode: outputs and target times differ in length");
  }
  const Vec4 scale = codec.standardize ? Vec4(codec.std.head<4>()) : Vec4::Ones();
  const Vec4 shift = codec.standardize ? Vec4(codec.mean.head<4>()) : Vec4::Zero();
  const Vec4 base = anchor.box.vec();

  std::vector<GaussianState> result;
  result.reserve(outputs.size());
  Vec4 acc_mean = base;
  Vec4 acc_var = Vec4::Zero();
  int prev_t = anchor.t;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const Vec4 mean = outputs[k].mean.cwiseProduct(scale) + shift;
    const Vec4 var = outputs[k].var.cwiseProduct(scale.cwiseAbs2());
    switch (codec.mode) {
      case FeatureMode::kAbsolute: result.emplace_back(mean, var); break;
      case FeatureMode::kRelativeToLast:
      case FeatureMode::kRelativeToFirst: result.emplace_back(base + mean, var); break;
      case FeatureMode::kFirstDifference: {
        const double dt = static_cast<double>(target_times[k] - prev_t);
        acc_mean += mean * dt;
        acc_var += var * dt * dt;
        prev_t = target_times[k];
        result.emplace_back(acc_mean, acc_var);
        break;
      }
    }
  }
  return result;
}

std::vector<Vec4> encode_targets(const FeatureCodec& codec, const Observation& anchor,
                                 std::span<const Observation> targets) {
  std::vector<Vec4> out;
  out.reserve(targets.size());
  Vec4 prev = anchor.box.vec();
  int prev_t = anchor.t;
  for (const auto& o : targets) {
    const Vec4 x = o.box.vec();
    Vec4 y;
    switch (codec.mode) {
      case FeatureMode::kAbsolute: y = x; break;
      case FeatureMode::kRelativeToLast:
      case FeatureMode::kRelativeToFirst: y = x - anchor.box.vec(); break;
      case FeatureMode::kFirstDifference:
        if (o.t <= prev_t) throw std::invalid_argument("encode_targets: target times must increase");
        y = (x - prev) / static_cast<double>(o.t - prev_t);
        break;
    }
    prev = x;
    prev_t = o.t;
    if (codec.standardize) {
      y = (y - codec.mean.head<4>()).cwiseQuotient(codec.std.head<4>());
    }
    out.push_back(y);
  }
  return out;
}

Standardizer fit_standardizer(FeatureMode mode, std::span<const std::vector<Observation>> sequences) {
  const std::size_t need =
      (mode == FeatureMode::kFirstDifference || mode == FeatureMode::kRelativeToLast) ? 2 : 1;
  Vec5 sum = Vec5::Zero();
  double count = 0.0;
  for (const auto& seq : sequences) {
    if (seq.size() < need) continue;
    const Eigen::MatrixXd rows = encode_raw(mode, seq);
    sum += rows.colwise().sum().transpose();
    count += static_cast<double>(rows.rows());
  }
  if (count == 0.0) throw std::invalid_argument("fit_standardizer: no encodable rows");
  Standardizer s;
  s.mean = sum / count;
  Vec5 sum_sq = Vec5::Zero();
  for (const auto& seq : sequences) {
    if (seq.size() < need) continue;
    const Eigen::MatrixXd centered = encode_raw(mode, seq).rowwise() - s.mean.transpose();
    sum_sq += centered.array().square().matrix().colwise().sum().transpose();
  }
  s.std = (sum_sq / count).cwiseSqrt().cwiseMax(1e-8);
  return s;
}

}  // namespace movesort
