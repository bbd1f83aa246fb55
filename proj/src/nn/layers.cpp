// SPDX-License-Identifier: Apache-2.0
#include "movesort/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace movesort::nn {

namespace {

void check_cols(const Matrix& x, int expected, const char* what) {
  if (x.cols() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected) +
                                " features, got " + std::to_string(x.cols()));
  }
}

}  // namespace

Dense::Dense(ParamStore& ps, const std::string& name, int in, int out, Rng& rng)
    : in_(in), out_(out) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("Dense: dims must be positive");
  const double bound = std::sqrt(1.0 / in);
  w_ = ps.add_uniform(name + ".weight", out, in, bound, rng);
  b_ = ps.add_uniform(name + ".bias", 1, out, bound, rng);
}

Matrix Dense::forward(const ParamStore& ps, const Matrix& x) const {
  check_cols(x, in_, "Dense");
  Matrix y = x * ps.value(w_).transpose();
  y.rowwise() += ps.value(b_).row(0);
  return y;
}

Matrix Dense::backward(ParamStore& ps, const Matrix& x, const Matrix& dy) const {
  check_cols(dy, out_, "Dense backward");
  ps.grad(w_).noalias() += dy.transpose() * x;
  ps.grad(b_) += dy.colwise().sum();
  return dy * ps.value(w_);
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("LayerNorm: dim must be positive");
  gain_ = ps.add(name + ".gain", Matrix::Ones(1, dim));
  bias_ = ps.add(name + ".bias", Matrix::Zero(1, dim));
}

Matrix LayerNorm::forward(const ParamStore& ps, const Matrix& x, Cache* cache) const {
  check_cols(x, dim_, "LayerNorm");
  const Vector mu = x.rowwise().mean();
  Matrix centered = x.colwise() - mu;
  const Vector var = centered.array().square().rowwise().mean();
  const Vector inv_std = (var.array() + kLayerNormEps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * ps.value(gain_).row(0).array();
  y.rowwise() += ps.value(bias_).row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv_std;
  }
  return y;
}

Matrix LayerNorm::backward(ParamStore& ps, const Cache& cache, const Matrix& dy) const {
  ps.grad(gain_) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  ps.grad(bias_) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * ps.value(gain_).row(0).array();
  const double n = dim_;
  const Vector sum_d = dxhat.rowwise().sum();
  const Vector sum_dx = (dxhat.array() * cache.xhat.array()).rowwise().sum();
  Matrix dx = (n * dxhat.array()).colwise() - sum_d.array();
  dx -= (cache.xhat.array().colwise() * sum_dx.array()).matrix();
  dx = dx.array().colwise() * (cache.inv_std.array() / n);
  return dx;
}

Matrix leaky_relu(const Matrix& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope) {
  return dy.binaryExpr(x, [slope](double g, double v) { return v >= 0.0 ? g : slope * g; });
}

Mlp::Mlp(ParamStore& ps, const std::string& name, int in, const std::vector<int>& hidden, int out,
         Rng& rng, double slope)
    : slope_(slope) {
  int prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const std::string prefix = name + "." + std::to_string(i);
    dense_.emplace_back(ps, prefix + ".linear", prev, hidden[i], rng);
    norm_.emplace_back(ps, prefix + ".norm", hidden[i]);
    prev = hidden[i];
  }
  out_ = Dense(ps, name + ".out", prev, out, rng);
}

int Mlp::in() const { return dense_.empty() ? out_.in() : dense_.front().in(); }

Matrix Mlp::forward(const ParamStore& ps, const Matrix& x, Cache* cache) const {
  if (cache) {
    cache->dense_in.resize(dense_.size());
    cache->norm.resize(dense_.size());
    cache->act_in.resize(dense_.size());
  }
  Matrix h = x;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    Matrix a = dense_[i].forward(ps, h);
    Matrix n = norm_[i].forward(ps, a, cache ? &cache->norm[i] : nullptr);
    if (cache) cache->dense_in[i] = std::move(h);
    h = leaky_relu(n, slope_);
    if (cache) cache->act_in[i] = std::move(n);
  }
  Matrix y = out_.forward(ps, h);
  if (cache) cache->out_in = std::move(h);
  return y;
}

Matrix Mlp::backward(ParamStore& ps, const Cache& cache, const Matrix& dy) const {
  Matrix g = out_.backward(ps, cache.out_in, dy);
  for (std::size_t k = dense_.size(); k-- > 0;) {
    g = leaky_relu_backward(cache.act_in[k], g, slope_);
    g = norm_[k].backward(ps, cache.norm[k], g);
    g = dense_[k].backward(ps, cache.dense_in[k], g);
  }
  return g;
}

std::vector<LayerSpec> Mlp::specs() const {
  std::vector<LayerSpec> s;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    s.push_back({LayerKind::kDense, dense_[i].in(), dense_[i].out()});
    s.push_back({LayerKind::kLayerNorm, norm_[i].dim(), norm_[i].dim()});
    s.push_back({LayerKind::kLeakyRelu, norm_[i].dim(), norm_[i].dim()});
  }
  s.push_back({LayerKind::kDense, out_.in(), out_.out()});
  return s;
}

}  // namespace movesort::nn
