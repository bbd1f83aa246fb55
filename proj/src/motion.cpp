// SPDX-License-Identifier: Apache-2.0
#include "movesort/motion.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "head_decode.hpp"
#include "movesort/nn/optim.hpp"

namespace movesort {

using nn::Matrix;
using nn::Vector;

std::string_view to_string(MotionArch arch) {
  switch (arch) {
    case MotionArch::kArRnn: return "ar-rnn";
    case MotionArch::kRnnCnp: return "rnn-cnp";
    case MotionArch::kRnnOde: return "rnn-ode";
  }
  return "unknown";
}

MotionArch parse_motion_arch(std::string_view name) {
  if (name == "ar-rnn") return MotionArch::kArRnn;
  if (name == "rnn-cnp") return MotionArch::kRnnCnp;
  if (name == "rnn-ode") return MotionArch::kRnnOde;
  throw std::invalid_argument("unknown motion architecture: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Training configuration and augmentation

TrainConfig TrainConfig::end_to_end_defaults() {
  TrainConfig cfg;
  cfg.noise_schedule = {{0.60, 0.05}, {0.20, 0.10}, {0.05, 0.25}};
  return cfg;
}

TrainConfig TrainConfig::without_augmentation() const {
  TrainConfig cfg = *this;
  for (auto& level : cfg.noise_schedule) level.probability = 0.0;
  cfg.drop_prob = 0.0;
  cfg.shorten_prob = 0.0;
  return cfg;
}

void TrainConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string("TrainConfig: ") + what + " must be in [0, 1]");
    }
  };
  double total = 0.0;
  for (const auto& level : noise_schedule) {
    prob(level.probability, "noise probability");
    if (!(level.sigma >= 0.0)) throw std::invalid_argument("TrainConfig: negative noise sigma");
    total += level.probability;
  }
  if (total > 1.0 + 1e-12) throw std::invalid_argument("TrainConfig: noise probabilities exceed 1");
  prob(drop_prob, "drop probability");
  prob(shorten_prob, "shorten probability");
  if (epochs < 1 || batch_size < 1 || max_horizon < 1 || window_stride < 1 || lr_period < 1) {
    throw std::invalid_argument("TrainConfig: counts must be positive");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (max_batches_per_epoch < 0) throw std::invalid_argument("TrainConfig: negative batch cap");
}

void augment_one(std::vector<Observation>& history, const TrainConfig& cfg, nn::Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double sigma = 0.0;
  double u = unit(rng);
  for (const auto& level : cfg.noise_schedule) {
    if (u < level.probability) {
      sigma = level.sigma;
      break;
    }
    u -= level.probability;
  }
  if (sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& o : history) {
      const double w = o.box.width;
      const double h = o.box.height;
      o.box = Box(o.box.left + sigma * w * gauss(rng), o.box.top + sigma * h * gauss(rng),
                  w + sigma * w * gauss(rng), h + sigma * h * gauss(rng));
    }
  }

  if (cfg.drop_prob > 0.0 && history.size() > 2) {
    std::vector<char> keep(history.size());
    std::size_t kept = 0;
    for (auto& k : keep) {
      k = unit(rng) >= cfg.drop_prob;
      kept += static_cast<std::size_t>(k);
    }
    for (std::size_t i = history.size(); kept < 2 && i-- > 0;) {
      if (!keep[i]) {
        keep[i] = 1;
        ++kept;
      }
    }
    std::vector<Observation> out;
    out.reserve(kept);
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (keep[i]) out.push_back(history[i]);
    }
    history = std::move(out);
  }

  if (cfg.shorten_prob > 0.0 && history.size() > 2 && unit(rng) < cfg.shorten_prob) {
    std::uniform_int_distribution<std::size_t> len(2, history.size());
    const std::size_t n = len(rng);
    history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(n));
  }
}

void augment(std::vector<std::vector<Observation>>& histories, const TrainConfig& cfg,
             nn::Rng& rng) {
  for (auto& h : histories) augment_one(h, cfg, rng);
}

// ---------------------------------------------------------------------------
// Model

struct MotionModel::Tape {
  std::vector<Matrix> gru_in;
  std::vector<Vector> masks;
  Matrix rows_stacked;
  nn::Mlp::Cache row_cache;
  nn::SequenceCache seq;
  std::vector<nn::Mlp::Cache> head_cache;
  std::vector<nn::Rk4Tape<nn::MlpDynamics>> ode;
  std::vector<Matrix> outs;
  detail::HeadBatch hb;
  std::vector<std::vector<Vec4>> d_mean, d_var;
  int batch = 0;
  int padded_len = 0;
};

namespace {

int head_extra_inputs(MotionArch arch) { return arch == MotionArch::kRnnCnp ? 2 : 1; }

}  // namespace

MotionModel::MotionModel(const MotionModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  if (cfg.hidden < 1 || cfg.history_len < 2 || !(cfg.ode_step > 0.0)) {
    throw std::invalid_argument("MotionModel: invalid configuration");
  }
  codec_.mode = cfg.mode;
  codec_.standardize = cfg.standardize;
  nn::Rng rng(seed);
  const int H = cfg.hidden;
  if (cfg.arch == MotionArch::kRnnCnp) {
    row_encoder_ = nn::Mlp(ps_, "row_encoder", 5, {H}, H, rng, cfg.leaky_slope);
    encoder_ = nn::GruCell(ps_, "encoder", H, H, rng);
  } else {
    encoder_ = nn::GruCell(ps_, "encoder", 5, H, rng);
  }
  if (cfg.arch == MotionArch::kRnnOde) {
    vector_field_ = nn::Mlp(ps_, "vector_field", H, {H}, H, rng, cfg.leaky_slope);
  }
  head_ = nn::Mlp(ps_, "head", H + head_extra_inputs(cfg.arch), {H}, 8, rng, cfg.leaky_slope);
}

std::vector<nn::LayerSpec> MotionModel::layer_specs() const {
  std::vector<nn::LayerSpec> specs;
  auto append = [&](const std::vector<nn::LayerSpec>& s) { specs.insert(specs.end(), s.begin(), s.end()); };
  if (cfg_.arch == MotionArch::kRnnCnp) append(row_encoder_.specs());
  specs.push_back(encoder_.spec());
  if (cfg_.arch == MotionArch::kRnnOde) append(vector_field_.specs());
  append(head_.specs());
  return specs;
}

void MotionModel::set_codec(const FeatureCodec& codec) {
  if (codec.mode != cfg_.mode || codec.standardize != cfg_.standardize) {
    throw std::invalid_argument("MotionModel: codec does not match the configuration");
  }
  codec.validate();
  codec_ = codec;
}

nn::ModelFile MotionModel::to_file() const {
  nn::ModelFile f;
  f.kind = "motion";
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

MotionModel MotionModel::from_file(const nn::ModelFile& file) {
  if (file.kind != "motion") throw nn::FormatError("model kind is '" + file.kind + "', not motion");
  MotionModelConfig cfg;
  const int arch = static_cast<int>(file.setting("arch"));
  if (arch < 0 || arch > 2) throw nn::FormatError("unknown motion architecture id");
  cfg.arch = static_cast<MotionArch>(arch);
  cfg.hidden = static_cast<int>(file.setting("hidden"));
  cfg.history_len = static_cast<int>(file.setting("history_len"));
  cfg.ode_step = file.setting("ode_step");
  cfg.leaky_slope = file.setting("leaky_slope");
  cfg.mode = file.codec.mode;
  cfg.standardize = file.codec.standardize;

  MotionModel model(cfg, file.seed);
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

std::vector<std::vector<GaussianState>> MotionModel::run(const MotionBatch& batch, Tape* tape,
                                                         double* loss) const {
  const std::size_t B = batch.histories.size();
  if (B == 0) return {};
  if (batch.targets.size() != B) throw std::invalid_argument("MotionModel: target count mismatch");
  const std::size_t K = batch.targets[0].size();
  if (K == 0) throw std::invalid_argument("MotionModel: no target times");
  if (cfg_.arch == MotionArch::kArRnn && K != 1) {
    throw std::invalid_argument("MotionModel: ar-rnn decodes one frame per pass");
  }
  const int H = cfg_.hidden;

  std::vector<Matrix> rows(B);
  int L = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& hist = batch.histories[b];
    if (hist.size() < std::max<std::size_t>(2, codec_.min_observations())) {
      throw std::invalid_argument("MotionModel: history needs at least 2 observations");
    }
    if (batch.targets[b].size() != K) throw std::invalid_argument("MotionModel: ragged targets");
    int prev = hist.back().t;
    for (const auto& tgt : batch.targets[b]) {
      if (tgt.t <= prev) throw std::invalid_argument("MotionModel: target times must increase");
      prev = tgt.t;
    }
    rows[b] = encode(codec_, hist);
    L = std::max(L, static_cast<int>(rows[b].rows()));
  }

  // Left-padded encoder inputs.
  std::vector<Matrix> steps(static_cast<std::size_t>(L), Matrix::Zero(static_cast<Eigen::Index>(B), 5));
  std::vector<Vector> masks(static_cast<std::size_t>(L), Vector::Zero(static_cast<Eigen::Index>(B)));
  for (std::size_t b = 0; b < B; ++b) {
    const int m = static_cast<int>(rows[b].rows());
    for (int j = 0; j < m; ++j) {
      const auto s = static_cast<std::size_t>(L - m + j);
      steps[s].row(static_cast<Eigen::Index>(b)) = rows[b].row(j);
      masks[s][static_cast<Eigen::Index>(b)] = 1.0;
    }
  }
  if (cfg_.arch == MotionArch::kRnnCnp) {
    Matrix stacked(static_cast<Eigen::Index>(L) * static_cast<Eigen::Index>(B), 5);
    for (int s = 0; s < L; ++s) stacked.middleRows(s * static_cast<Eigen::Index>(B), B) = steps[s];
    const Matrix enc = row_encoder_.forward(ps_, stacked, tape ? &tape->row_cache : nullptr);
    for (int s = 0; s < L; ++s) steps[s] = enc.middleRows(s * static_cast<Eigen::Index>(B), B);
    if (tape) tape->rows_stacked = std::move(stacked);
  }
  const Matrix summary = nn::gru_sequence(encoder_, ps_, steps, masks,
                                          Matrix::Zero(static_cast<Eigen::Index>(B), H),
                                          tape ? &tape->seq : nullptr);

  Vector anchor_feat(static_cast<Eigen::Index>(B));
  detail::HeadBatch hb;
  hb.base.resize(B);
  hb.anchor_t.resize(B);
  hb.times.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& hist = batch.histories[b];
    anchor_feat[static_cast<Eigen::Index>(b)] =
        codec_.time_feature(static_cast<double>(hist.back().t - hist.front().t + 1));
    switch (codec_.mode) {
      case FeatureMode::kAbsolute: hb.base[b] = Vec4::Zero(); break;
      case FeatureMode::kRelativeToFirst: hb.base[b] = hist.front().box.vec(); break;
      default: hb.base[b] = hist.back().box.vec(); break;
    }
    hb.anchor_t[b] = hist.back().t;
    for (const auto& tgt : batch.targets[b]) hb.times[b].push_back(tgt.t);
  }

  if (tape) {
    tape->head_cache.assign(K, {});
    tape->ode.assign(cfg_.arch == MotionArch::kRnnOde ? K : 0, {});
  }
  const nn::MlpDynamics field(vector_field_, ps_);
  std::vector<Matrix> outs(K);
  Matrix latent = summary;
  Vector t_prev(static_cast<Eigen::Index>(B));
  for (std::size_t b = 0; b < B; ++b) t_prev[static_cast<Eigen::Index>(b)] = hb.anchor_t[b];
  const int extra = head_extra_inputs(cfg_.arch);
  for (std::size_t k = 0; k < K; ++k) {
    Vector t_next(static_cast<Eigen::Index>(B));
    for (std::size_t b = 0; b < B; ++b) t_next[static_cast<Eigen::Index>(b)] = hb.times[b][k];
    if (cfg_.arch == MotionArch::kRnnOde) {
      latent = nn::rk4_integrate(field, latent, t_prev, t_next, cfg_.ode_step,
                                 tape ? &tape->ode[k] : nullptr);
    }
    Matrix in(static_cast<Eigen::Index>(B), H + extra);
    in.leftCols(H) = latent;
    in.col(H) = anchor_feat;
    if (cfg_.arch == MotionArch::kRnnCnp) {
      for (std::size_t b = 0; b < B; ++b) {
        const auto& hist = batch.histories[b];
        in(static_cast<Eigen::Index>(b), H + 1) =
            codec_.time_feature(static_cast<double>(hb.times[b][k] - hist.front().t + 1));
      }
    }
    outs[k] = head_.forward(ps_, in, tape ? &tape->head_cache[k] : nullptr);
    t_prev = t_next;
  }

  const detail::HeadMoments mom = detail::decode_heads(codec_, outs, hb);
  std::vector<std::vector<GaussianState>> result(B, std::vector<GaussianState>(K));
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t k = 0; k < K; ++k) result[b][k] = GaussianState(mom.mean[k][b], mom.var[k][b]);
  }

  if (loss) {
    const double norm = 4.0 * static_cast<double>(B * K);
    double total = 0.0;
    if (tape) {
      tape->d_mean.assign(K, std::vector<Vec4>(B));
      tape->d_var.assign(K, std::vector<Vec4>(B));
    }
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t k = 0; k < K; ++k) {
        const NllGrad g = nll_sum_grad(batch.targets[b][k].box.vec(), mom.mean[k][b], mom.var[k][b]);
        total += g.loss;
        if (tape) {
          tape->d_mean[k][b] = g.d_mean / norm;
          tape->d_var[k][b] = g.d_var / norm;
        }
      }
    }
    *loss = total / norm;
  }

  if (tape) {
    tape->gru_in = std::move(steps);
    tape->masks = std::move(masks);
    tape->outs = std::move(outs);
    tape->hb = std::move(hb);
    tape->batch = static_cast<int>(B);
    tape->padded_len = L;
  }
  return result;
}

void MotionModel::backward(const Tape& tape) {
  const int H = cfg_.hidden;
  const std::size_t K = tape.outs.size();
  const std::vector<Matrix> d_outs =
      detail::decode_heads_backward(codec_, tape.outs, tape.hb, tape.d_mean, tape.d_var);

  std::vector<Matrix> d_latent(K);
  for (std::size_t k = 0; k < K; ++k) {
    d_latent[k] = head_.backward(ps_, tape.head_cache[k], d_outs[k]).leftCols(H);
  }

  Matrix d_summary;
  if (cfg_.arch == MotionArch::kRnnOde) {
    const nn::MlpDynamics field(vector_field_, ps_, &ps_);
    Matrix g = d_latent[K - 1];
    for (std::size_t k = K; k-- > 0;) {
      g = nn::rk4_backward(field, tape.ode[k], g);
      if (k > 0) g += d_latent[k - 1];
    }
    d_summary = std::move(g);
  } else {
    d_summary = d_latent[0];
    for (std::size_t k = 1; k < K; ++k) d_summary += d_latent[k];
  }

  const std::vector<Matrix> d_steps = nn::gru_sequence_backward(encoder_, ps_, tape.seq, d_summary);
  if (cfg_.arch == MotionArch::kRnnCnp) {
    const Eigen::Index B = tape.batch;
    Matrix d_stacked(static_cast<Eigen::Index>(tape.padded_len) * B, H);
    for (int s = 0; s < tape.padded_len; ++s) d_stacked.middleRows(s * B, B) = d_steps[s];
    row_encoder_.backward(ps_, tape.row_cache, d_stacked);
  }
}

double MotionModel::loss(const MotionBatch& batch) const {
  double value = 0.0;
  run(batch, nullptr, &value);
  return value;
}

double MotionModel::loss_and_grad(const MotionBatch& batch) {
  Tape tape;
  double value = 0.0;
  run(batch, &tape, &value);
  backward(tape);
  return value;
}

std::vector<GaussianState> MotionModel::predict(std::span<const Observation> history,
                                                std::span<const int> target_times) const {
  const std::vector<std::vector<Observation>> h{{history.begin(), history.end()}};
  const std::vector<std::vector<int>> t{{target_times.begin(), target_times.end()}};
  return predict_batch(h, t)[0];
}

std::vector<std::vector<GaussianState>> MotionModel::predict_batch(
    std::span<const std::vector<Observation>> histories,
    std::span<const std::vector<int>> target_times) const {
  const std::size_t N = histories.size();
  if (target_times.size() != N) throw std::invalid_argument("predict_batch: size mismatch");
  for (std::size_t i = 0; i < N; ++i) {
    if (histories[i].size() < 2) {
      throw std::invalid_argument("predict: history needs at least 2 observations");
    }
    int prev = histories[i].back().t;
    for (int t : target_times[i]) {
      if (t <= prev) throw std::invalid_argument("predict: target times must increase");
      prev = t;
    }
  }
  std::vector<std::vector<GaussianState>> result(N);

  if (cfg_.arch == MotionArch::kArRnn) {
    // Frame-by-frame rollout with predicted means appended to the history.
    std::vector<std::vector<Observation>> hist(histories.begin(), histories.end());
    std::vector<std::size_t> next_target(N, 0);
    for (;;) {
      MotionBatch step;
      std::vector<std::size_t> who;
      for (std::size_t i = 0; i < N; ++i) {
        if (next_target[i] < target_times[i].size()) {
          who.push_back(i);
          step.histories.push_back(hist[i]);
          step.targets.push_back({Observation{hist[i].back().t + 1, Box{}}});
        }
      }
      if (who.empty()) break;
      const auto out = run(step, nullptr, nullptr);
      for (std::size_t j = 0; j < who.size(); ++j) {
        const std::size_t i = who[j];
        const int t = hist[i].back().t + 1;
        if (t == target_times[i][next_target[i]]) {
          result[i].push_back(out[j][0]);
          ++next_target[i];
        }
        hist[i].push_back(Observation{t, out[j][0].box()});
      }
    }
    return result;
  }

  std::map<std::size_t, std::vector<std::size_t>> by_count;
  for (std::size_t i = 0; i < N; ++i) {
    if (!target_times[i].empty()) by_count[target_times[i].size()].push_back(i);
  }
  for (const auto& [count, members] : by_count) {
    MotionBatch group;
    for (std::size_t i : members) {
      group.histories.push_back(histories[i]);
      std::vector<Observation> tg;
      for (int t : target_times[i]) tg.push_back(Observation{t, Box{}});
      group.targets.push_back(std::move(tg));
    }
    auto out = run(group, nullptr, nullptr);
    for (std::size_t j = 0; j < members.size(); ++j) result[members[j]] = std::move(out[j]);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Window {
  std::size_t traj;
  std::size_t start;
  std::size_t hist_len;
  std::size_t total;
};

}  // namespace

MotionModel train_motion(const MotionModelConfig& model_cfg, std::span<const Trajectory> data,
                         const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  const int horizon = model_cfg.arch == MotionArch::kArRnn ? 1 : cfg.max_horizon;
  const auto full = static_cast<std::size_t>(model_cfg.history_len + horizon);

  std::vector<Window> windows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t n = data[i].obs.size();
    if (n < 2 + static_cast<std::size_t>(horizon)) continue;
    if (n < full) {
      windows.push_back({i, 0, n - static_cast<std::size_t>(horizon), n});
      continue;
    }
    for (std::size_t s = 0; s + full <= n; s += static_cast<std::size_t>(cfg.window_stride)) {
      windows.push_back({i, s, static_cast<std::size_t>(model_cfg.history_len), full});
    }
  }
  if (windows.empty()) throw std::invalid_argument("train_motion: no trajectory is long enough");

  MotionModel model(model_cfg, cfg.seed);
  {
    std::vector<std::vector<Observation>> clean;
    clean.reserve(windows.size());
    for (const auto& w : windows) {
      const auto& obs = data[w.traj].obs;
      clean.emplace_back(obs.begin() + static_cast<std::ptrdiff_t>(w.start),
                         obs.begin() + static_cast<std::ptrdiff_t>(w.start + w.hist_len));
    }
    FeatureCodec codec = model.codec();
    if (codec.standardize) {
      const Standardizer st = fit_standardizer(codec.mode, clean);
      codec.mean = st.mean;
      codec.std = st.std;
    }
    model.set_codec(codec);
  }

  nn::Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::AdamW opt(model.params(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay, .clip_norm = cfg.clip_norm});
  const nn::StepScheduler sched(cfg.lr, cfg.lr_period, cfg.lr_gamma);
  std::uniform_int_distribution<int> horizon_dist(1, horizon);

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
      const auto K = static_cast<std::size_t>(horizon_dist(rng));
      MotionBatch batch;
      for (std::size_t j = bi * bs; j < std::min(order.size(), (bi + 1) * bs); ++j) {
        const Window& w = windows[order[j]];
        const auto& obs = data[w.traj].obs;
        const auto first = obs.begin() + static_cast<std::ptrdiff_t>(w.start);
        std::vector<Observation> hist(first, first + static_cast<std::ptrdiff_t>(w.hist_len));
        augment_one(hist, cfg, rng);
        // Targets are the clean entries right after the last kept observation.
        auto it = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(w.total), hist.back().t,
                                   [](int t, const Observation& o) { return t < o.t; });
        batch.targets.emplace_back(it, it + static_cast<std::ptrdiff_t>(K));
        batch.histories.push_back(std::move(hist));
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
