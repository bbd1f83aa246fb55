// SPDX-License-Identifier: Apache-2.0
/**
 * @file   ode.hpp
 * @brief  Fixed-step classical Runge-Kutta integration with reverse-mode
 *         gradients through the unrolled steps.
 *
 * Each batch row integrates its own interval [t0_r, t1_r]. A row takes
 * ceil((t1_r - t0_r) / step) steps, the last one shortened to land exactly on
 * t1_r; rows that have finished take zero-length steps, which leave them
 * unchanged.
 */
#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <vector>

#include "movesort/nn/layers.hpp"

namespace movesort::nn {

/// A vector field dz/dt = f(z, t) with a backward pass. forward() may be given
/// a null cache when no backward pass follows. backward() receives the cache
/// filled by forward() and returns dL/dz, accumulating parameter gradients as
/// a side effect.
template <class F>
concept Dynamics = requires(const F& f, const Matrix& z, const Vector& t, typename F::Cache& c,
                            const Matrix& g) {
  { f.forward(z, t, &c) } -> std::convertible_to<Matrix>;
  { f.backward(c, g) } -> std::convertible_to<Matrix>;
};

template <Dynamics F>
struct Rk4Tape {
  struct Step {
    Vector h;
    std::array<typename F::Cache, 4> cache;
  };
  std::vector<Step> steps;
};

namespace detail {

inline int rk4_step_count(double span, double step) {
  if (span <= 0.0) return 0;
  return static_cast<int>(std::ceil(span / step - 1e-9));
}

}  // namespace detail

template <Dynamics F>
Matrix rk4_integrate(const F& f, const Matrix& z0, const Vector& t0, const Vector& t1, double step,
                     Rk4Tape<F>* tape = nullptr) {
  if (step <= 0.0) throw std::invalid_argument("rk4_integrate: step must be positive");
  const Eigen::Index rows = z0.rows();
  if (t0.size() != rows || t1.size() != rows) {
    throw std::invalid_argument("rk4_integrate: time vectors do not match the batch");
  }
  std::vector<int> counts(static_cast<std::size_t>(rows));
  int max_steps = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (t1[r] < t0[r]) throw std::invalid_argument("rk4_integrate: t1 must not precede t0");
    counts[static_cast<std::size_t>(r)] = detail::rk4_step_count(t1[r] - t0[r], step);
    max_steps = std::max(max_steps, counts[static_cast<std::size_t>(r)]);
  }
  if (tape) tape->steps.assign(static_cast<std::size_t>(max_steps), {});

  Matrix z = z0;
  Vector t = t0;
  for (int k = 0; k < max_steps; ++k) {
    Vector h(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const int n = counts[static_cast<std::size_t>(r)];
      if (k < n - 1) {
        h[r] = step;
      } else if (k == n - 1) {
        h[r] = (t1[r] - t0[r]) - step * (n - 1);
      } else {
        h[r] = 0.0;
      }
    }
    typename F::Cache* c = tape ? tape->steps[static_cast<std::size_t>(k)].cache.data() : nullptr;
    auto slot = [c](int i) { return c ? c + i : nullptr; };
    const Vector half = 0.5 * h;
    const Matrix k1 = f.forward(z, t, slot(0));
    const Matrix k2 = f.forward(z + (k1.array().colwise() * half.array()).matrix(), t + half, slot(1));
    const Matrix k3 = f.forward(z + (k2.array().colwise() * half.array()).matrix(), t + half, slot(2));
    const Matrix k4 = f.forward(z + (k3.array().colwise() * h.array()).matrix(), t + h, slot(3));
    z += ((k1 + 2.0 * k2 + 2.0 * k3 + k4).array().colwise() * (h.array() / 6.0)).matrix();
    t += h;
    if (tape) tape->steps[static_cast<std::size_t>(k)].h = h;
  }
  return z;
}

template <Dynamics F>
Matrix rk4_integrate(const F& f, const Matrix& z0, double t0, double t1, double step,
                     Rk4Tape<F>* tape = nullptr) {
  const Eigen::Index rows = z0.rows();
  return rk4_integrate(f, z0, Vector::Constant(rows, t0), Vector::Constant(rows, t1), step, tape);
}

/// Given dL/dz(t1), returns dL/dz(t0) and accumulates parameter gradients.
template <Dynamics F>
Matrix rk4_backward(const F& f, const Rk4Tape<F>& tape, const Matrix& dz_final) {
  Matrix dz = dz_final;
  for (std::size_t k = tape.steps.size(); k-- > 0;) {
    const auto& s = tape.steps[k];
    const Eigen::ArrayXd h = s.h.array();
    auto scale = [](const Matrix& m, const Eigen::ArrayXd& w) {
      return Matrix((m.array().colwise() * w).matrix());
    };
    Matrix dk1 = scale(dz, h / 6.0);
    Matrix dk2 = scale(dz, h / 3.0);
    Matrix dk3 = scale(dz, h / 3.0);
    const Matrix dk4 = scale(dz, h / 6.0);
    Matrix dnext = dz;

    const Matrix du4 = f.backward(s.cache[3], dk4);
    dnext += du4;
    dk3 += scale(du4, h);
    const Matrix du3 = f.backward(s.cache[2], dk3);
    dnext += du3;
    dk2 += scale(du3, 0.5 * h);
    const Matrix du2 = f.backward(s.cache[1], dk2);
    dnext += du2;
    dk1 += scale(du2, 0.5 * h);
    dnext += f.backward(s.cache[0], dk1);
    dz = std::move(dnext);
  }
  return dz;
}

/// Autonomous vector field given by an MLP.
class MlpDynamics {
 public:
  using Cache = Mlp::Cache;

  MlpDynamics(const Mlp& mlp, const ParamStore& ps, ParamStore* grads = nullptr)
      : mlp_(&mlp), ps_(&ps), grads_(grads) {}

  Matrix forward(const Matrix& z, const Vector& /*t*/, Cache* cache) const {
    return mlp_->forward(*ps_, z, cache);
  }
  /// Requires a mutable store passed at construction.
  Matrix backward(const Cache& cache, const Matrix& g) const {
    if (!grads_) throw std::logic_error("MlpDynamics: constructed without a gradient store");
    return mlp_->backward(*grads_, cache, g);
  }

 private:
  const Mlp* mlp_;
  const ParamStore* ps_;
  ParamStore* grads_;
};

}  // namespace movesort::nn
