// SPDX-License-Identifier: Apache-2.0
/**
 * @file   param_store.hpp
 * @brief  Flat named collection of trainable arrays with gradient slots.
 *
 * Layers keep indices into a store rather than owning their weights, so a
 * whole model can be serialized, optimized, or compared as one object.
 */
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace movesort::nn {

/// Activations are (batch x features): the batch dimension leads.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
};

class ParamStore {
 public:
  /// Throws std::invalid_argument on a duplicate name.
  std::size_t add(std::string name, Matrix value);
  /// Uniform initialization in [-bound, bound].
  std::size_t add_uniform(std::string name, Eigen::Index rows, Eigen::Index cols, double bound,
                          Rng& rng);

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  const Matrix& value(std::size_t i) const { return params_[i].value; }
  Matrix& grad(std::size_t i) { return params_[i].grad; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Names, shapes and values equal bitwise (gradients ignored).
  bool same_values(const ParamStore& other) const;

 private:
  std::vector<Param> params_;
};

}  // namespace movesort::nn
