// SPDX-License-Identifier: Apache-2.0
/**
 * @file   layers.hpp
 * @brief  Dense, layer-normalization and leaky-ReLU layers with explicit
 *         backward passes, and the MLP block built from them.
 *
 * Backward functions accumulate parameter gradients into the store and return
 * the gradient with respect to the layer input.
 */
#pragma once

#include <string>
#include <vector>

#include "movesort/nn/param_store.hpp"

namespace movesort::nn {

enum class LayerKind : std::uint8_t { kDense = 0, kLayerNorm = 1, kLeakyRelu = 2, kGruCell = 3 };

struct LayerSpec {
  LayerKind kind;
  int in = 0;
  int out = 0;
  bool operator==(const LayerSpec&) const = default;
};

inline constexpr double kDefaultLeakySlope = 0.01;
inline constexpr double kLayerNormEps = 1e-5;

/// y = x W^T + b with W of shape (out x in).
class Dense {
 public:
  Dense() = default;
  /// Weights and bias uniform in +-sqrt(1/in).
  Dense(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);

  Matrix forward(const ParamStore& ps, const Matrix& x) const;
  Matrix backward(ParamStore& ps, const Matrix& x, const Matrix& dy) const;

  int in() const { return in_; }
  int out() const { return out_; }
  std::size_t weight_index() const { return w_; }
  std::size_t bias_index() const { return b_; }

 private:
  std::size_t w_ = 0;
  std::size_t b_ = 0;
  int in_ = 0;
  int out_ = 0;
};

/// Normalizes each row over the feature axis, then applies gain and bias.
class LayerNorm {
 public:
  struct Cache {
    Matrix xhat;
    Vector inv_std;
  };

  LayerNorm() = default;
  LayerNorm(ParamStore& ps, const std::string& name, int dim);

  Matrix forward(const ParamStore& ps, const Matrix& x, Cache* cache) const;
  Matrix backward(ParamStore& ps, const Cache& cache, const Matrix& dy) const;

  int dim() const { return dim_; }

 private:
  std::size_t gain_ = 0;
  std::size_t bias_ = 0;
  int dim_ = 0;
};

Matrix leaky_relu(const Matrix& x, double slope = kDefaultLeakySlope);
Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope = kDefaultLeakySlope);

/// Hidden layers are Dense -> LayerNorm -> LeakyReLU; the output layer is a
/// plain Dense layer.
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> dense_in;
    std::vector<LayerNorm::Cache> norm;
    std::vector<Matrix> act_in;
    Matrix out_in;
  };

  Mlp() = default;
  Mlp(ParamStore& ps, const std::string& name, int in, const std::vector<int>& hidden, int out,
      Rng& rng, double slope = kDefaultLeakySlope);

  Matrix forward(const ParamStore& ps, const Matrix& x, Cache* cache = nullptr) const;
  Matrix backward(ParamStore& ps, const Cache& cache, const Matrix& dy) const;

  int in() const;
  int out() const { return out_.out(); }
  std::vector<LayerSpec> specs() const;

 private:
  std::vector<Dense> dense_;
  std::vector<LayerNorm> norm_;
  Dense out_;
  double slope_ = kDefaultLeakySlope;
};

}  // namespace movesort::nn
