// SPDX-License-Identifier: Apache-2.0
#include "movesort/e2e.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "head_decode.hpp"
#include "movesort/nn/ode.hpp"
#include "movesort/nn/optim.hpp"

namespace movesort {

using nn::Matrix;
using nn::Vector;

std::string_view to_string(E2eArch arch) {
  return arch == E2eArch::kRnnFilter ? "rnnfilter" : "nodefilter";
}

E2eArch parse_e2e_arch(std::string_view name) {
  if (name == "rnnfilter") return E2eArch::kRnnFilter;
  if (name == "nodefilter") return E2eArch::kNodeFilter;
  throw std::invalid_argument("unknown end-to-end filter: " + std::string(name));
}

struct E2eModel::Tape {
  struct Step {
    Vector active, updated;
    nn::GruCell::Cache predict;
    nn::Rk4Tape<nn::MlpDynamics> ode;
    nn::GruCell::Cache update;
    nn::Mlp::Cache prior_head, posterior_head;
    std::vector<Matrix> prior_out, post_out;  // one element each
    detail::HeadBatch hb;
    std::vector<std::vector<Vec4>> dp_mean, dp_var, dq_mean, dq_var;
  };
  std::vector<Step> steps;
};

E2eModel::E2eModel(const E2eModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  if (cfg.hidden < 1 || cfg.history_len < 1 || !(cfg.ode_step > 0.0)) {
    throw std::invalid_argument("E2eModel: invalid configuration");
  }
  codec_.mode = FeatureMode::kRelativeToFirst;
  codec_.standardize = cfg.standardize;
  nn::Rng rng(seed);
  const int H = cfg.hidden;
  if (cfg.arch == E2eArch::kRnnFilter) {
    predict_cell_ = nn::GruCell(ps_, "predict_cell", 1, H, rng);
  } else {
    vector_field_ = nn::Mlp(ps_, "vector_field", H, {H}, H, rng, cfg.leaky_slope);
  }
  update_cell_ = nn::GruCell(ps_, "update_cell", 5, H, rng);
  prior_head_ = nn::Mlp(ps_, "prior_head", H, {H}, 8, rng, cfg.leaky_slope);
  posterior_head_ = nn::Mlp(ps_, "posterior_head", H, {H}, 8, rng, cfg.leaky_slope);
}

std::vector<nn::LayerSpec> E2eModel::layer_specs() const {
  std::vector<nn::LayerSpec> specs;
  auto append = [&](const std::vector<nn::LayerSpec>& s) { specs.insert(specs.end(), s.begin(), s.end()); };
  if (cfg_.arch == E2eArch::kRnnFilter) {
    specs.push_back(predict_cell_.spec());
  } else {
    append(vector_field_.specs());
  }
  specs.push_back(update_cell_.spec());
  append(prior_head_.specs());
  append(posterior_head_.specs());
  return specs;
}

void E2eModel::set_codec(const FeatureCodec& codec) {
  if (codec.mode != FeatureMode::kRelativeToFirst || codec.standardize != cfg_.standardize) {
    throw std::invalid_argument("E2eModel: codec does not match the configuration");
  }
  codec.validate();
  codec_ = codec;
}

nn::ModelFile E2eModel::to_file() const {
  nn::ModelFile f;
  f.kind = "e2e";
  f.settings = {{"arch", static_cast<double>(cfg_.arch)},
                {"hidden", cfg_.hidden},
                {"history_len", cfg_.history_len},
                {"ode_step", cfg_.ode_step},
                {"leaky_slope", cfg_.leaky_slope}};
  f.layers = layer_specs();
  f.codec = codec_;
  f.seed = seed_;
  f.final_loss = final_loss_;
  f.params = ps_;
  return f;
}

E2eModel E2eModel::from_file(const nn::ModelFile& file) {
  if (file.kind != "e2e") throw nn::FormatError("model kind is '" + file.kind + "', not e2e");
  E2eModelConfig cfg;
  const int arch = static_cast<int>(file.setting("arch"));
  if (arch < 0 || arch > 1) throw nn::FormatError("unknown end-to-end filter id");
  cfg.arch = static_cast<E2eArch>(arch);
  cfg.hidden = static_cast<int>(file.setting("hidden"));
  cfg.history_len = static_cast<int>(file.setting("history_len"));
  cfg.ode_step = file.setting("ode_step");
  cfg.leaky_slope = file.setting("leaky_slope");
  cfg.standardize = file.codec.standardize;
  if (file.codec.mode != FeatureMode::kRelativeToFirst) throw nn::FormatError("unexpected codec mode");

  E2eModel model(cfg, file.seed);
  if (model.layer_specs() != file.layers) throw nn::FormatError("layer list does not match");
  if (model.ps_.size() != file.params.size()) throw nn::FormatError("parameter count mismatch");
  for (std::size_t i = 0; i < model.ps_.size(); ++i) {
    const auto& want = model.ps_[i];
    const auto& got = file.params[i];
    if (want.name != got.name || want.value.rows() != got.value.rows() ||
        want.value.cols() != got.value.cols()) {
      throw nn::FormatError("parameter '" + got.name + "' does not fit the architecture");
    }
  }
  model.ps_ = file.params;
  model.ps_.zero_grad();
  model.set_codec(file.codec);
  model.final_loss_ = file.final_loss;
  return model;
}

Matrix E2eModel::update_input(const Box& anchor, int t_first, int t, const Box& meas) const {
  Matrix x(1, 5);
  const Vec4 rel = meas.vec() - anchor.vec();
  for (int j = 0; j < 4; ++j) {
    x(0, j) = codec_.standardize ? (rel[j] - codec_.mean[j]) / codec_.std[j] : rel[j];
  }
  x(0, 4) = codec_.time_feature(static_cast<double>(t - t_first + 1));
  return x;
}

E2eRollout E2eModel::run(std::span<const E2eSequence> seqs, Tape* tape, double* loss) const {
  const std::size_t B = seqs.size();
  E2eRollout out;
  out.frames.resize(B);
  if (B == 0) return out;
  const int H = cfg_.hidden;
  const auto rows = static_cast<Eigen::Index>(B);

  std::size_t S = 0;
  for (const auto& q : seqs) {
    if (q.meas.empty() || !q.meas.front()) {
      throw std::invalid_argument("E2eModel: a sequence must start with a measurement");
    }
    if (loss && q.truth.size() != q.meas.size()) {
      throw std::invalid_argument("E2eModel: ground truth does not cover the sequence");
    }
    S = std::max(S, q.meas.size());
  }
  for (std::size_t b = 0; b < B; ++b) out.frames[b].resize(seqs[b].meas.size());

  if (tape) tape->steps.assign(S, {});
  const nn::MlpDynamics field(vector_field_, ps_);
  Matrix z = Matrix::Zero(rows, H);
  double total = 0.0;
  double count = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> terms;

  for (std::size_t s = 0; s < S; ++s) {
    Tape::Step* st = tape ? &tape->steps[s] : nullptr;
    Vector active = Vector::Zero(rows);
    Vector updated = Vector::Zero(rows);
    Matrix x_pred = Matrix::Zero(rows, 1);
    Matrix x_upd = Matrix::Zero(rows, 5);
    detail::HeadBatch hb;
    hb.base.assign(B, Vec4::Zero());
    hb.anchor_t.assign(B, 0);
    hb.times.assign(B, {0});
    for (std::size_t b = 0; b < B; ++b) {
      const auto& q = seqs[b];
      const std::size_t offset = S - q.meas.size();
      if (s < offset) continue;
      const std::size_t i = s - offset;
      const auto r = static_cast<Eigen::Index>(b);
      const int t = q.t_first + static_cast<int>(i);
      active[r] = 1.0;
      x_pred(r, 0) = codec_.time_feature(static_cast<double>(i + 1));
      hb.base[b] = q.meas.front()->vec();
      hb.anchor_t[b] = t - 1;
      hb.times[b][0] = t;
      if (q.meas[i]) {
        updated[r] = 1.0;
        x_upd.row(r) = update_input(*q.meas.front(), q.t_first, t, *q.meas[i]);
      }
    }

    Matrix z_hat;
    if (cfg_.arch == E2eArch::kRnnFilter) {
      z_hat = nn::gru_masked_step(predict_cell_, ps_, x_pred, z, active, st ? &st->predict : nullptr);
    } else {
      z_hat = nn::rk4_integrate(field, z, Vector::Zero(rows), active, cfg_.ode_step,
                                st ? &st->ode : nullptr);
    }
    if (s + 1 == S) out.last_latent = z_hat;

    std::vector<Matrix> prior_out{prior_head_.forward(ps_, z_hat, st ? &st->prior_head : nullptr)};
    const Matrix z_upd = nn::gru_masked_step(update_cell_, ps_, x_upd, z_hat, updated,
                                             st ? &st->update : nullptr);
    const Matrix post_raw = posterior_head_.forward(ps_, z_upd, st ? &st->posterior_head : nullptr);
    std::vector<Matrix> post_out{(post_raw.array().colwise() * updated.array() +
                                  prior_out[0].array().colwise() * (1.0 - updated.array()))
                                     .matrix()};

    const detail::HeadMoments pm = detail::decode_heads(codec_, prior_out, hb);
    const detail::HeadMoments qm = detail::decode_heads(codec_, post_out, hb);
    if (st) {
      st->dp_mean.assign(1, std::vector<Vec4>(B, Vec4::Zero()));
      st->dp_var = st->dq_mean = st->dq_var = st->dp_mean;
    }
    for (std::size_t b = 0; b < B; ++b) {
      const auto r = static_cast<Eigen::Index>(b);
      if (active[r] == 0.0) continue;
      const std::size_t i = s - (S - seqs[b].meas.size());
      E2eFrame& f = out.frames[b][i];
      f.prior = GaussianState(pm.mean[0][b], pm.var[0][b]);
      f.posterior = GaussianState(qm.mean[0][b], qm.var[0][b]);
      f.updated = updated[r] != 0.0;
      if (loss) {
        const Vec4 truth = seqs[b].truth[i].vec();
        if (i > 0) {
          const NllGrad g = nll_sum_grad(truth, pm.mean[0][b], pm.var[0][b]);
          total += g.loss;
          count += 1.0;
          if (st) {
            st->dp_mean[0][b] = g.d_mean;
            st->dp_var[0][b] = g.d_var;
          }
        }
        const NllGrad g = nll_sum_grad(truth, qm.mean[0][b], qm.var[0][b]);
        total += g.loss;
        count += 1.0;
        if (st) {
          st->dq_mean[0][b] = g.d_mean;
          st->dq_var[0][b] = g.d_var;
        }
      }
    }
    if (st) {
      st->active = std::move(active);
      st->updated = std::move(updated);
      st->prior_out = std::move(prior_out);
      st->post_out = std::move(post_out);
      st->hb = std::move(hb);
    }
    z = z_upd;
  }

  if (loss) {
    const double norm = 4.0 * std::max(count, 1.0);
    *loss = total / norm;
    if (tape) {
      for (auto& st : tape->steps) {
        for (auto* v : {&st.dp_mean, &st.dp_var, &st.dq_mean, &st.dq_var}) {
          for (auto& g : (*v)[0]) g /= norm;
        }
      }
    }
  }
  return out;
}

void E2eModel::backward(const Tape& tape) {
  const nn::MlpDynamics field(vector_field_, ps_, &ps_);
  Matrix dz;
  for (std::size_t s = tape.steps.size(); s-- > 0;) {
    const auto& st = tape.steps[s];
    Matrix d_prior = detail::decode_heads_backward(codec_, st.prior_out, st.hb, st.dp_mean, st.dp_var)[0];
    const Matrix d_post = detail::decode_heads_backward(codec_, st.post_out, st.hb, st.dq_mean, st.dq_var)[0];
    const Matrix d_post_raw = d_post.array().colwise() * st.updated.array();
    d_prior += (d_post.array().colwise() * (1.0 - st.updated.array())).matrix();

    Matrix d_upd = posterior_head_.backward(ps_, st.posterior_head, d_post_raw);
    if (dz.size() > 0) d_upd += dz;
    Matrix d_hat = nn::gru_masked_step_backward(update_cell_, ps_, st.update, st.updated, d_upd).dh;
    d_hat += prior_head_.backward(ps_, st.prior_head, d_prior);
    if (cfg_.arch == E2eArch::kRnnFilter) {
      dz = nn::gru_masked_step_backward(predict_cell_, ps_, st.predict, st.active, d_hat).dh;
    } else {
      dz = nn::rk4_backward(field, st.ode, d_hat);
    }
  }
}

E2eRollout E2eModel::unroll(std::span<const E2eSequence> seqs) const { return run(seqs, nullptr, nullptr); }

GaussianState E2eModel::update_latent(const Matrix& z_hat, const Box& anchor, int t_first, int t,
                                      const Box& meas) const {
  const Matrix x = update_input(anchor, t_first, t, meas);
  const Matrix z = update_cell_.forward(ps_, x, z_hat, nullptr);
  const std::vector<Matrix> outs{posterior_head_.forward(ps_, z)};
  detail::HeadBatch hb;
  hb.base = {anchor.vec()};
  hb.anchor_t = {t - 1};
  hb.times = {{t}};
  const detail::HeadMoments m = detail::decode_heads(codec_, outs, hb);
  return GaussianState(m.mean[0][0], m.var[0][0]);
}

double E2eModel::loss(std::span<const E2eSequence> seqs) const {
  double value = 0.0;
  run(seqs, nullptr, &value);
  return value;
}

double E2eModel::loss_and_grad(std::span<const E2eSequence> seqs) {
  Tape tape;
  double value = 0.0;
  run(seqs, &tape, &value);
  backward(tape);
  return value;
}

E2eModel train_e2e(const E2eModelConfig& model_cfg, std::span<const Trajectory> data,
                   const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  const auto len = static_cast<std::size_t>(model_cfg.history_len + 1);

  // Windows over runs of consecutive frames.
  std::vector<std::vector<Observation>> windows;
  for (const auto& traj : data) {
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= traj.obs.size(); ++i) {
      if (i < traj.obs.size() && traj.obs[i].t == traj.obs[i - 1].t + 1) continue;
      for (std::size_t s = run_start; s + len <= i; s += static_cast<std::size_t>(cfg.window_stride)) {
        windows.emplace_back(traj.obs.begin() + static_cast<std::ptrdiff_t>(s),
                             traj.obs.begin() + static_cast<std::ptrdiff_t>(s + len));
      }
      run_start = i;
    }
  }
  if (windows.empty()) throw std::invalid_argument("train_e2e: no trajectory is long enough");

  E2eModel model(model_cfg, cfg.seed);
  if (model_cfg.standardize) {
    FeatureCodec codec = model.codec();
    const Standardizer st = fit_standardizer(FeatureMode::kRelativeToFirst, windows);
    codec.mean = st.mean;
    codec.std = st.std;
    model.set_codec(codec);
  }

  nn::Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::AdamW opt(model.params(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay, .clip_norm = cfg.clip_norm});
  const nn::StepScheduler sched(cfg.lr, cfg.lr_period, cfg.lr_gamma);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  double last = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.set_lr(sched.lr_for_epoch(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_batches = (order.size() + bs - 1) / bs;
    if (cfg.max_batches_per_epoch > 0) {
      n_batches = std::min(n_batches, static_cast<std::size_t>(cfg.max_batches_per_epoch));
    }
    double sum = 0.0;
    for (std::size_t bi = 0; bi < n_batches; ++bi) {
      std::vector<E2eSequence> batch;
      for (std::size_t j = bi * bs; j < std::min(order.size(), (bi + 1) * bs); ++j) {
        const auto& w = windows[order[j]];
        std::vector<Observation> seen = w;
        augment_one(seen, cfg, rng);
        E2eSequence q;
        q.t_first = seen.front().t;
        const auto first = static_cast<std::size_t>(q.t_first - w.front().t);
        q.meas.assign(len - first, std::nullopt);
        for (const auto& o : seen) q.meas[static_cast<std::size_t>(o.t - q.t_first)] = o.box;
        for (std::size_t i = first; i < len; ++i) q.truth.push_back(w[i].box);
        batch.push_back(std::move(q));
      }
      model.params().zero_grad();
      sum += model.loss_and_grad(batch);
      opt.step(model.params());
    }
    last = sum / static_cast<double>(n_batches);
    if (report) report->epoch_loss.push_back(last);
  }
  model.params().zero_grad();
  model.set_training_record(cfg.seed, last);
  return model;
}

}  // namespace movesort
