// SPDX-License-Identifier: Apache-2.0
#include "movesort/nn/optim.hpp"

#include <cmath>

namespace movesort::nn {

AdamW::AdamW(const ParamStore& ps, AdamWConfig cfg) : cfg_(cfg) {
  for (const auto& p : ps) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void AdamW::step(ParamStore& ps) {
  ++t_;
  double clip = 1.0;
  if (cfg_.clip_norm > 0.0) {
    const double norm = std::sqrt(grad_squared_norm(ps));
    if (norm > cfg_.clip_norm) clip = cfg_.clip_norm / norm;
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Param& p = ps[i];
    const Matrix g = p.grad * clip;
    p.value *= (1.0 - cfg_.lr * cfg_.weight_decay);
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseAbs2();
    const Eigen::ArrayXXd m_hat = m_[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = v_[i].array() / bc2;
    p.value.array() -= cfg_.lr * m_hat / (v_hat.sqrt() + cfg_.eps);
  }
}

double StepScheduler::lr_for_epoch(int epoch) const {
  return base_lr_ * std::pow(gamma_, static_cast<double>(epoch / period_));
}

double grad_squared_norm(const ParamStore& ps) {
  double s = 0.0;
  for (const auto& p : ps) s += p.grad.squaredNorm();
  return s;
}

}  // namespace movesort::nn
