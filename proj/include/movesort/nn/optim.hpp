// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "movesort/nn/param_store.hpp"

namespace movesort::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
};

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(const ParamStore& ps, AdamWConfig cfg);

  void step(ParamStore& ps);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }
  long steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

/// Multiplies the base learning rate by gamma every `period` epochs.
class StepScheduler {
 public:
  explicit StepScheduler(double base_lr, int period = 4, double gamma = 0.1)
      : base_lr_(base_lr), period_(period), gamma_(gamma) {}
  double lr_for_epoch(int epoch) const;

 private:
  double base_lr_;
  int period_;
  double gamma_;
};

/// Sum of squared gradient entries across the store.
double grad_squared_norm(const ParamStore& ps);

}  // namespace movesort::nn
