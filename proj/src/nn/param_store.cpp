// SPDX-License-Identifier: Apache-2.0
#include "movesort/nn/param_store.hpp"

#include <cstring>
#include <stdexcept>

namespace movesort::nn {

std::size_t ParamStore::add(std::string name, Matrix value) {
  if (find(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
  Matrix grad = Matrix::Zero(value.rows(), value.cols());
  params_.push_back({std::move(name), std::move(value), std::move(grad)});
  return params_.size() - 1;
}

std::size_t ParamStore::add_uniform(std::string name, Eigen::Index rows, Eigen::Index cols,
                                    double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return add(std::move(name), std::move(m));
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
    if (std::memcmp(a.value.data(), b.value.data(),
                    static_cast<std::size_t>(a.value.size()) * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace movesort::nn
