// SPDX-License-Identifier: Apache-2.0
#include "movesort/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace movesort {

std::string_view to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kConstantVelocity: return "constant-velocity";
    case SyntheticKind::kSinusoidal: return "sinusoidal";
    case SyntheticKind::kCrossingPair: return "crossing-pair";
    case SyntheticKind::kRandomWalkTurns: return "random-walk-turns";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "constant-velocity") return SyntheticKind::kConstantVelocity;
  if (name == "sinusoidal") return SyntheticKind::kSinusoidal;
  if (name == "crossing-pair") return SyntheticKind::kCrossingPair;
  if (name == "random-walk-turns") return SyntheticKind::kRandomWalkTurns;
  throw std::invalid_argument("unknown synthetic kind: " + std::string(name));
}

void SyntheticSpec::validate() const {
  if (n_objects < 1 || n_frames < 1) throw std::invalid_argument("SyntheticSpec: counts must be positive");
  if (!(fn_prob >= 0.0 && fn_prob <= 1.0) || !(turn_prob >= 0.0 && turn_prob <= 1.0)) {
    throw std::invalid_argument("SyntheticSpec: probabilities must be in [0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SyntheticSpec: negative noise");
  if (!(scale_amplitude >= 0.0 && scale_amplitude < 1.0) || !(scale_period > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: scale_amplitude must be in [0, 1) and scale_period positive");
  }
  if (!(crossing_scale >= 0.0)) throw std::invalid_argument("SyntheticSpec: negative crossing_scale");
  if (!(period > 0.0)) throw std::invalid_argument("SyntheticSpec: period must be positive");
  if (!(min_width > 0.0 && min_width <= max_width && min_height > 0.0 && min_height <= max_height)) {
    throw std::invalid_argument("SyntheticSpec: invalid box size range");
  }
}

std::vector<Trajectory> generate_truth(const SyntheticSpec& spec, nn::Rng& rng) {
  spec.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Trajectory> out;
  // Scales the nominal box about its center.
  auto sized = [&](double left, double top, double w, double h, int k, double psi) {
    const double s = 1.0 + spec.scale_amplitude * std::sin(two_pi * k / spec.scale_period + psi);
    return Box(left + 0.5 * w * (1.0 - s), top + 0.5 * h * (1.0 - s), w * s, h * s);
  };

  if (spec.kind == SyntheticKind::kCrossingPair) {
    // Both centers pass through (0.5, 0.5 +- dy/2) at crossing_frame, weaving
    // vertically in opposite directions with the sinusoid period.
    double w0 = 0.0, h0 = 0.0;
    for (int k = 0; k < 2; ++k) {
      double w = uniform(spec.min_width, spec.max_width);
      double h = uniform(spec.min_height, spec.max_height);
      if (k == 0) {
        w0 = w;
        h0 = h;
      } else if (spec.crossing_scale > 0.0) {
        w = w0 * spec.crossing_scale;
        h = h0 * spec.crossing_scale;
      }
      const double psi = uniform(0.0, two_pi);
      const double dir = k == 0 ? 1.0 : -1.0;
      const double cy0 = 0.5 + (k == 0 ? -0.5 : 0.5) * spec.crossing_dy;
      Trajectory t{k + 1, {}};
      for (int f = 1; f <= spec.n_frames; ++f) {
        const double cx = 0.5 + dir * spec.speed * (f - spec.crossing_frame);
        const double cy = cy0 + dir * spec.crossing_weave * std::sin(two_pi * (f - spec.crossing_frame) / spec.period);
        t.obs.push_back({f, sized(cx - w / 2, cy - h / 2, w, h, f - 1, psi)});
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  for (int i = 0; i < spec.n_objects; ++i) {
    const double w = uniform(spec.min_width, spec.max_width);
    const double h = uniform(spec.min_height, spec.max_height);
    const double theta = uniform(0.0, two_pi);
    const double phase = uniform(0.0, two_pi);
    const double psi = uniform(0.0, two_pi);
    // The path midpoint lies in the central part of the frame.
    const double span = spec.speed * spec.n_frames;
    const bool sinusoidal = spec.kind == SyntheticKind::kSinusoidal;
    const double ux = sinusoidal ? (std::cos(theta) >= 0.0 ? 1.0 : -1.0) : std::cos(theta);
    const double uy = sinusoidal ? 0.0 : std::sin(theta);
    double x = uniform(0.3, 0.7) - span * 0.5 * ux - w / 2;
    double y = uniform(0.3, 0.7) - span * 0.5 * uy - h / 2;
    double heading = theta;
    Trajectory t{i + 1, {}};
    for (int f = 1; f <= spec.n_frames; ++f) {
      const int k = f - 1;
      switch (spec.kind) {
        case SyntheticKind::kConstantVelocity:
          t.obs.push_back({f, sized(x + spec.speed * std::cos(theta) * k, y + spec.speed * std::sin(theta) * k, w, h, k, psi)});
          break;
        case SyntheticKind::kSinusoidal: {
          const double dx = std::cos(theta) >= 0.0 ? spec.speed : -spec.speed;
          const double yy = y + spec.amplitude * std::sin(two_pi * k / spec.period + phase);
          t.obs.push_back({f, sized(x + dx * k, yy, w, h, k, psi)});
          break;
        }
        case SyntheticKind::kRandomWalkTurns: {
          t.obs.push_back({f, sized(x, y, w, h, k, psi)});
          if (unit(rng) < spec.turn_prob) {
            std::normal_distribution<double> turn(0.0, spec.turn_sigma);
            heading += turn(rng);
          }
          x += spec.speed * std::cos(heading);
          y += spec.speed * std::sin(heading);
          break;
        }
        case SyntheticKind::kCrossingPair: break;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Trajectory> corrupt(const std::vector<Trajectory>& truth, double sigma, double fn_prob,
                                nn::Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Trajectory> out;
  out.reserve(truth.size());
  for (const auto& t : truth) {
    Trajectory d{t.id, {}};
    for (const auto& o : t.obs) {
      Box b = o.box;
      if (sigma > 0.0) {
        const double w = b.width;
        const double h = b.height;
        const double n0 = gauss(rng), n1 = gauss(rng), n2 = gauss(rng), n3 = gauss(rng);
        b = Box(b.left + sigma * w * n0, b.top + sigma * h * n1, w + sigma * w * n2, h + sigma * h * n3);
      }
      const bool keep = fn_prob <= 0.0 || unit(rng) >= fn_prob;
      if (keep) d.obs.push_back({o.t, b});
    }
    out.push_back(std::move(d));
  }
  return out;
}

SyntheticScene generate(const SyntheticSpec& spec) {
  nn::Rng rng(spec.seed);
  SyntheticScene s;
  s.truth = generate_truth(spec, rng);
  s.detections = corrupt(s.truth, spec.noise_sigma, spec.fn_prob, rng);
  return s;
}

std::map<int, std::vector<Box>> boxes_by_frame(const std::vector<Trajectory>& trajs) {
  std::map<int, std::vector<Box>> out;
  for (const auto& t : trajs) {
    for (const auto& o : t.obs) out[o.t].push_back(o.box);
  }
  return out;
}

}  // namespace movesort
