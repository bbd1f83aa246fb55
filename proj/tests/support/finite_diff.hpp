// SPDX-License-Identifier: Apache-2.0
// Central finite differences over parameter stores and input matrices.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "movesort/nn/param_store.hpp"

namespace movesort::testing {

inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-10});
  return (analytic - numeric).norm() / scale;
}

/// Derivative at 0 of the one-variable function `f` by central differences.
/// Steps shrink tenfold from `h` until two successive estimates agree, which
/// fails while a step straddles a kink of a piecewise-smooth function.
/// Without agreement, the closest successive pair is used.
inline double converged_derivative(const std::function<double(double)>& f, double h) {
  constexpr int kSteps = 9;
  constexpr double kAgree = 1e-6;
  auto central = [&](double step) { return (f(step) - f(-step)) / (2.0 * step); };
  double prev = central(h);
  double best = prev, best_gap = std::numeric_limits<double>::max();
  for (int k = 1; k < kSteps; ++k) {
    h /= 10.0;
    const double next = central(h);
    const double gap = std::abs(next - prev);
    if (gap <= kAgree * std::max(1.0, std::abs(next))) return next;
    if (gap < best_gap) {
      best_gap = gap;
      best = next;
    }
    prev = next;
  }
  return best;
}

/// Numeric gradient of `loss` with respect to the entries of `x`, which is
/// perturbed in place and restored. `h` is the largest step tried.
inline Eigen::VectorXd numeric_gradient(nn::Matrix& x, const std::function<double()>& loss,
                                        double h = 1e-4) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    g[i] = converged_derivative(
        [&](double d) {
          x.data()[i] = keep + d;
          return loss();
        },
        h);
    x.data()[i] = keep;
  }
  return g;
}

inline Eigen::VectorXd flat(const nn::Matrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

/// Compares the gradients already accumulated in `ps` with central
/// differences of `loss` over every parameter entry.
inline double param_gradient_error(nn::ParamStore& ps, const std::function<double()>& loss,
                                   double h = 1e-4) {
  Eigen::Index total = 0;
  for (const auto& p : ps) total += p.value.size();
  Eigen::VectorXd analytic(total), numeric(total);
  Eigen::Index at = 0;
  for (auto& p : ps) {
    const Eigen::Index n = p.value.size();
    analytic.segment(at, n) = flat(p.grad);
    numeric.segment(at, n) = numeric_gradient(p.value, loss, h);
    at += n;
  }
  return relative_error(analytic, numeric);
}

/// Random weighting of an output, so that L = sum(G .* y) and dL/dy = G.
inline nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, nn::Rng& rng,
                                double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return nn::Matrix::NullaryExpr(rows, cols, [&] { return n(rng); });
}

}  // namespace movesort::testing
