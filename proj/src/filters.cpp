// SPDX-License-Identifier: Apache-2.0
#include "movesort/filters.hpp"

#include <map>
#include <string>

namespace movesort {

std::string_view to_string(FilterFamily f) {
  switch (f) {
    case FilterFamily::kKalman: return "kalman";
    case FilterFamily::kBayes: return "bayes";
    case FilterFamily::kRnnE2e: return "rnn-e2e";
    case FilterFamily::kNodeE2e: return "node-e2e";
  }
  return "unknown";
}

FilterFamily parse_filter_family(std::string_view name) {
  if (name == "kalman") return FilterFamily::kKalman;
  if (name == "bayes") return FilterFamily::kBayes;
  if (name == "rnn-e2e") return FilterFamily::kRnnE2e;
  if (name == "node-e2e") return FilterFamily::kNodeE2e;
  throw std::invalid_argument("unknown filter kind: " + std::string(name));
}

FilterKind FilterKind::make_kalman(const KalmanParams& params) {
  FilterKind k;
  k.kalman = params;
  return k;
}

FilterKind FilterKind::make_bayes(std::shared_ptr<const MotionModel> model, double sigma_m) {
  FilterKind k;
  k.family = FilterFamily::kBayes;
  k.motion = std::move(model);
  k.meas_noise_sigma = sigma_m;
  return k;
}

FilterKind FilterKind::make_e2e(std::shared_ptr<const E2eModel> model) {
  FilterKind k;
  k.family = model && model->config().arch == E2eArch::kNodeFilter ? FilterFamily::kNodeE2e
                                                                   : FilterFamily::kRnnE2e;
  k.e2e = std::move(model);
  return k;
}

void FilterKind::validate() const {
  switch (family) {
    case FilterFamily::kKalman: kalman.validate(); break;
    case FilterFamily::kBayes:
      if (!motion) throw std::invalid_argument("bayes filter needs a motion model");
      if (!(meas_noise_sigma > 0.0)) throw std::invalid_argument("meas_noise_sigma must be positive");
      break;
    case FilterFamily::kRnnE2e:
    case FilterFamily::kNodeE2e: {
      if (!e2e) throw std::invalid_argument("end-to-end filter needs a model");
      const bool node = e2e->config().arch == E2eArch::kNodeFilter;
      if (node != (family == FilterFamily::kNodeE2e)) {
        throw std::invalid_argument("end-to-end model does not match the filter kind");
      }
      break;
    }
  }
  if (buffer_size < 1 || buffer_min < 1) throw std::invalid_argument("buffer sizes must be positive");
}

Vec4 bayes_measurement_var(const Box& meas, double sigma_m) {
  const double w = sigma_m * meas.width;
  const double h = sigma_m * meas.height;
  return Vec4(w * w, h * h, w * w, h * h).cwiseMax(kVarianceFloor);
}

GaussianState cold_start_prior(const Box& last) {
  const double w = kColdStartSigma * last.width;
  const double h = kColdStartSigma * last.height;
  return GaussianState(last.vec(), Vec4(w * w, h * h, w * w, h * h));
}

Filter::Filter(FilterKind kind) : kind_(std::move(kind)), buffer_(kind_.buffer_size, kind_.buffer_min) {
  kind_.validate();
}

GaussianState Filter::init(const Observation& first) {
  if (phase_ != Phase::kUninitialized) throw FilterContractError("init: filter already initialized");
  frame_ = first.t;
  buffer_.push(first);
  phase_ = Phase::kReady;
  if (kind_.family == FilterFamily::kKalman) {
    kf_ = kf_init(first.box, kind_.kalman);
    const Mat48 H = observation_matrix();
    return GaussianState(H * kf_.z, (H * kf_.P * H.transpose()).diagonal());
  }
  return cold_start_prior(first.box);
}

void Filter::check_predict(int t_next) const {
  if (phase_ == Phase::kUninitialized) throw FilterContractError("predict: filter not initialized");
  if (phase_ == Phase::kPredicted) throw FilterContractError("predict: previous prior not consumed");
  if (t_next <= frame_) {
    throw FilterContractError("predict: frame " + std::to_string(t_next) + " is not after " +
                              std::to_string(frame_));
  }
}

void Filter::check_pending(const char* op) const {
  if (phase_ != Phase::kPredicted) {
    throw FilterContractError(std::string(op) + ": no pending prior from predict");
  }
}

void Filter::set_prior(int t_next, const GaussianState& prior) {
  prior_ = prior;
  frame_ = t_next;
  phase_ = Phase::kPredicted;
}

E2eSequence Filter::e2e_sequence(int t_next) const {
  E2eSequence q;
  const auto& entries = buffer_.entries();
  q.t_first = entries.front().t;
  q.meas.assign(static_cast<std::size_t>(t_next - q.t_first + 1), std::nullopt);
  for (const auto& o : entries) q.meas[static_cast<std::size_t>(o.t - q.t_first)] = o.box;
  return q;
}

GaussianState Filter::predict(int t_next) {
  Filter* self = this;
  const int t[1] = {t_next};
  return predict_many(std::span<Filter* const>(&self, 1), t)[0];
}

GaussianState Filter::update(const Box& meas) {
  check_pending("update");
  GaussianState post;
  switch (kind_.family) {
    case FilterFamily::kKalman: {
      kf_ = kf_update(kf_, meas, kind_.kalman);
      const Mat48 H = observation_matrix();
      post = GaussianState(H * kf_.z, (H * kf_.P * H.transpose()).diagonal());
      break;
    }
    case FilterFamily::kBayes:
      post = fuse_diag(prior_, meas.vec(), bayes_measurement_var(meas, kind_.meas_noise_sigma));
      break;
    case FilterFamily::kRnnE2e:
    case FilterFamily::kNodeE2e: {
      const Observation& anchor = buffer_.entries().front();
      post = kind_.e2e->update_latent(latent_, anchor.box, anchor.t, frame_, meas);
      break;
    }
  }
  buffer_.push(Observation{frame_, meas});
  phase_ = Phase::kReady;
  return post;
}

GaussianState Filter::missing() {
  check_pending("missing");
  phase_ = Phase::kReady;
  return prior_;
}

std::vector<GaussianState> predict_many(std::span<Filter* const> filters, std::span<const int> t_next) {
  if (filters.size() != t_next.size()) throw std::invalid_argument("predict_many: size mismatch");
  for (std::size_t i = 0; i < filters.size(); ++i) filters[i]->check_predict(t_next[i]);

  std::vector<GaussianState> priors(filters.size());
  std::map<const MotionModel*, std::vector<std::size_t>> bayes;
  std::map<const E2eModel*, std::vector<std::size_t>> e2e;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    Filter& f = *filters[i];
    switch (f.kind_.family) {
      case FilterFamily::kKalman: {
        KalmanPrediction p{f.kf_, {}};
        for (int t = f.frame_; t < t_next[i]; ++t) p = kf_predict(p.state, f.kind_.kalman);
        f.kf_ = p.state;
        priors[i] = p.observation;
        break;
      }
      case FilterFamily::kBayes:
        if (f.buffer_.size() < 2) {
          priors[i] = cold_start_prior(f.buffer_.back().box);
        } else {
          bayes[f.kind_.motion.get()].push_back(i);
        }
        break;
      case FilterFamily::kRnnE2e:
      case FilterFamily::kNodeE2e: e2e[f.kind_.e2e.get()].push_back(i); break;
    }
  }

  for (const auto& [model, members] : bayes) {
    std::vector<std::vector<Observation>> hist;
    std::vector<std::vector<int>> times;
    for (std::size_t i : members) {
      hist.push_back(filters[i]->buffer_.entries());
      times.push_back({t_next[i]});
    }
    const auto out = model->predict_batch(hist, times);
    for (std::size_t j = 0; j < members.size(); ++j) priors[members[j]] = out[j][0];
  }
  for (const auto& [model, members] : e2e) {
    std::vector<E2eSequence> seqs;
    for (std::size_t i : members) seqs.push_back(filters[i]->e2e_sequence(t_next[i]));
    const E2eRollout r = model->unroll(seqs);
    for (std::size_t j = 0; j < members.size(); ++j) {
      Filter& f = *filters[members[j]];
      priors[members[j]] = r.frames[j].back().prior;
      f.latent_ = r.last_latent.row(static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t i = 0; i < filters.size(); ++i) filters[i]->set_prior(t_next[i], priors[i]);
  return priors;
}

}  // namespace movesort
