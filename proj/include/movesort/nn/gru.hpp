// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gru.hpp
 * @brief  Gated recurrent cell and masked sequence runner.
 *
 *   r  = sigmoid(x Wxr^T + bxr + h Whr^T + bhr)
 *   u  = sigmoid(x Wxu^T + bxu + h Whu^T + bhu)
 *   n  = tanh(x Wxn^T + bxn + r * (h Whn^T + bhn))
 *   h' = (1 - u) * n + u * h
 *
 * The three gates are stacked in (r, u, n) order inside one weight matrix per
 * input. Sequences with different lengths are left-padded; a per-step mask of
 * zeros keeps the hidden state unchanged on padded steps.
 */
#pragma once

#include <span>
#include <string>
#include <vector>

#include "movesort/nn/layers.hpp"

namespace movesort::nn {

class GruCell {
 public:
  struct Cache {
    Matrix x, h, r, u, n, hn;  // hn = h Whn^T + bhn
  };
  struct Grads {
    Matrix dx, dh;
  };

  GruCell() = default;
  GruCell(ParamStore& ps, const std::string& name, int in, int hidden, Rng& rng);

  Matrix forward(const ParamStore& ps, const Matrix& x, const Matrix& h, Cache* cache) const;
  Grads backward(ParamStore& ps, const Cache& cache, const Matrix& dh_next) const;

  int in() const { return in_; }
  int hidden() const { return hidden_; }
  LayerSpec spec() const { return {LayerKind::kGruCell, in_, hidden_}; }
  std::size_t input_bias_index() const { return bx_; }
  std::size_t hidden_bias_index() const { return bh_; }

 private:
  std::size_t wx_ = 0, wh_ = 0, bx_ = 0, bh_ = 0;
  int in_ = 0;
  int hidden_ = 0;
};

struct SequenceCache {
  std::vector<GruCell::Cache> steps;
  std::vector<Vector> masks;
};

/// One masked step: h' = m * cell(x, h) + (1 - m) * h, with m in {0, 1} per row.
Matrix gru_masked_step(const GruCell& cell, const ParamStore& ps, const Matrix& x, const Matrix& h,
                       const Vector& mask, GruCell::Cache* cache);
GruCell::Grads gru_masked_step_backward(const GruCell& cell, ParamStore& ps,
                                        const GruCell::Cache& cache, const Vector& mask,
                                        const Matrix& dh_next);

/// Runs the cell over all steps and returns the final hidden state.
Matrix gru_sequence(const GruCell& cell, const ParamStore& ps, std::span<const Matrix> inputs,
                    std::span<const Vector> masks, const Matrix& h0, SequenceCache* cache);

/// Backpropagates a gradient on the final hidden state. Returns per-step
/// input gradients; dh0, when given, receives the initial-state gradient.
std::vector<Matrix> gru_sequence_backward(const GruCell& cell, ParamStore& ps,
                                          const SequenceCache& cache, const Matrix& dh_final,
                                          Matrix* dh0 = nullptr);

}  // namespace movesort::nn
