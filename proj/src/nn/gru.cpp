// SPDX-License-Identifier: Apache-2.0
#include "movesort/nn/gru.hpp"

#include <cmath>
#include <stdexcept>

namespace movesort::nn {

namespace {

Matrix sigmoid(const Matrix& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

GruCell::GruCell(ParamStore& ps, const std::string& name, int in, int hidden, Rng& rng)
    : in_(in), hidden_(hidden) {
  if (in <= 0 || hidden <= 0) throw std::invalid_argument("GruCell: dims must be positive");
  const double bound = std::sqrt(1.0 / hidden);
  wx_ = ps.add_uniform(name + ".weight_ih", 3 * hidden, in, bound, rng);
  wh_ = ps.add_uniform(name + ".weight_hh", 3 * hidden, hidden, bound, rng);
  bx_ = ps.add_uniform(name + ".bias_ih", 1, 3 * hidden, bound, rng);
  bh_ = ps.add_uniform(name + ".bias_hh", 1, 3 * hidden, bound, rng);
}

Matrix GruCell::forward(const ParamStore& ps, const Matrix& x, const Matrix& h,
                        Cache* cache) const {
  if (x.cols() != in_ || h.cols() != hidden_ || x.rows() != h.rows()) {
    throw std::invalid_argument("GruCell: shape mismatch");
  }
  const Eigen::Index H = hidden_;
  Matrix gx = x * ps.value(wx_).transpose();
  gx.rowwise() += ps.value(bx_).row(0);
  Matrix gh = h * ps.value(wh_).transpose();
  gh.rowwise() += ps.value(bh_).row(0);

  Matrix r = sigmoid(gx.leftCols(H) + gh.leftCols(H));
  Matrix u = sigmoid(gx.middleCols(H, H) + gh.middleCols(H, H));
  Matrix hn = gh.rightCols(H);
  Matrix n = (gx.rightCols(H).array() + r.array() * hn.array()).tanh().matrix();
  Matrix out = ((1.0 - u.array()) * n.array() + u.array() * h.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h = h;
    cache->r = std::move(r);
    cache->u = std::move(u);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return out;
}

GruCell::Grads GruCell::backward(ParamStore& ps, const Cache& c, const Matrix& dh_next) const {
  const Eigen::Index H = hidden_;
  const Eigen::Index B = dh_next.rows();
  const auto& dout = dh_next.array();

  const Eigen::ArrayXXd dn = dout * (1.0 - c.u.array());
  const Eigen::ArrayXXd du = dout * (c.h.array() - c.n.array());
  const Eigen::ArrayXXd dan = dn * (1.0 - c.n.array().square());
  const Eigen::ArrayXXd dr = dan * c.hn.array();
  const Eigen::ArrayXXd dau = du * c.u.array() * (1.0 - c.u.array());
  const Eigen::ArrayXXd dar = dr * c.r.array() * (1.0 - c.r.array());

  Matrix dgx(B, 3 * H);
  Matrix dgh(B, 3 * H);
  dgx.leftCols(H) = dar.matrix();
  dgx.middleCols(H, H) = dau.matrix();
  dgx.rightCols(H) = dan.matrix();
  dgh.leftCols(H) = dar.matrix();
  dgh.middleCols(H, H) = dau.matrix();
  dgh.rightCols(H) = (dan * c.r.array()).matrix();

  ps.grad(wx_).noalias() += dgx.transpose() * c.x;
  ps.grad(bx_) += dgx.colwise().sum();
  ps.grad(wh_).noalias() += dgh.transpose() * c.h;
  ps.grad(bh_) += dgh.colwise().sum();

  Grads g;
  g.dx = dgx * ps.value(wx_);
  g.dh = (dout * c.u.array()).matrix() + dgh * ps.value(wh_);
  return g;
}

Matrix gru_masked_step(const GruCell& cell, const ParamStore& ps, const Matrix& x, const Matrix& h,
                       const Vector& mask, GruCell::Cache* cache) {
  Matrix next = cell.forward(ps, x, h, cache);
  return (next.array().colwise() * mask.array() + h.array().colwise() * (1.0 - mask.array()))
      .matrix();
}

GruCell::Grads gru_masked_step_backward(const GruCell& cell, ParamStore& ps,
                                        const GruCell::Cache& cache, const Vector& mask,
                                        const Matrix& dh_next) {
  const Matrix d_cell = dh_next.array().colwise() * mask.array();
  GruCell::Grads g = cell.backward(ps, cache, d_cell);
  g.dh += (dh_next.array().colwise() * (1.0 - mask.array())).matrix();
  return g;
}

Matrix gru_sequence(const GruCell& cell, const ParamStore& ps, std::span<const Matrix> inputs,
                    std::span<const Vector> masks, const Matrix& h0, SequenceCache* cache) {
  if (inputs.size() != masks.size()) throw std::invalid_argument("gru_sequence: mask count");
  Matrix h = h0;
  if (cache) {
    cache->steps.assign(inputs.size(), {});
    cache->masks.assign(masks.begin(), masks.end());
  }
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    h = gru_masked_step(cell, ps, inputs[s], h, masks[s], cache ? &cache->steps[s] : nullptr);
  }
  return h;
}

std::vector<Matrix> gru_sequence_backward(const GruCell& cell, ParamStore& ps,
                                          const SequenceCache& cache, const Matrix& dh_final,
                                          Matrix* dh0) {
  std::vector<Matrix> dx(cache.steps.size());
  Matrix dh = dh_final;
  for (std::size_t s = cache.steps.size(); s-- > 0;) {
    GruCell::Grads g = gru_masked_step_backward(cell, ps, cache.steps[s], cache.masks[s], dh);
    dx[s] = std::move(g.dx);
    dh = std::move(g.dh);
  }
  if (dh0) *dh0 = std::move(dh);
  return dx;
}

}  // namespace movesort::nn
