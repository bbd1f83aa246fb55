// SPDX-License-Identifier: Apache-2.0
#include "movesort/tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace movesort {

std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::kTentative: return "tentative";
    case TrackStatus::kConfirmed: return "confirmed";
    case TrackStatus::kLost: return "lost";
    case TrackStatus::kDeleted: return "deleted";
  }
  return "unknown";
}

void TrackerConfig::validate() const {
  if (t_lost < 1 || init_hits < 1 || interp_max_gap < 0 || min_track_len < 0) {
    throw std::invalid_argument("TrackerConfig: counts must be positive");
  }
  if (!(iou_min >= 0.0 && iou_min <= 1.0)) throw std::invalid_argument("TrackerConfig: iou_min outside [0, 1]");
  if (!(lambda >= 0.0)) throw std::invalid_argument("TrackerConfig: lambda must be nonnegative");
  filter.validate();
}

std::vector<HistoryEntry> interpolate_gap(const HistoryEntry& last, int frame, const Box& box,
                                          int max_gap) {
  const int gap = frame - last.frame - 1;
  std::vector<HistoryEntry> out;
  if (gap < 1 || gap > max_gap) return out;
  const Vec4 a = last.box.vec();
  const Vec4 b = box.vec();
  for (int k = 1; k <= gap; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(gap + 1);
    out.push_back({last.frame + k, Box::from_vec(a + w * (b - a)), BoxSource::kInterpolated});
  }
  return out;
}

namespace {

TrackRecord record_of(const Track& t) { return {t.id, t.ever_confirmed, t.history}; }

const HistoryEntry* last_detection(const std::vector<HistoryEntry>& h) {
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->source == BoxSource::kDetection) return &*it;
  }
  return nullptr;
}

}  // namespace

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<TrackOutput> Tracker::step(int frame, std::span<const Box> dets) {
  if (started_ && frame <= last_frame_) {
    throw std::invalid_argument("Tracker::step: frame " + std::to_string(frame) +
                                " is not after " + std::to_string(last_frame_));
  }
  started_ = true;
  last_frame_ = frame;

  // (1) priors for every live track
  std::vector<Filter*> filters;
  filters.reserve(tracks_.size());
  for (auto& t : tracks_) filters.push_back(&t.filter);
  const std::vector<int> frames(tracks_.size(), frame);
  const std::vector<GaussianState> priors = predict_many(filters, frames);

  // (2) one association stage over tentative, confirmed and lost tracks
  std::vector<Box> prior_boxes;
  prior_boxes.reserve(priors.size());
  for (const auto& p : priors) prior_boxes.push_back(p.box());
  const Assignment a =
      solve_assignment(build_costs(prior_boxes, dets, cfg_.lambda, cfg_.iou_min, cfg_.cost_mode));

  // (3) update matched tracks, coast the rest
  std::vector<char> matched(tracks_.size(), 0);
  std::vector<TrackOutput> out;
  for (const auto& [r, c] : a.pairs) {
    Track& t = tracks_[static_cast<std::size_t>(r)];
    const Box& det = dets[static_cast<std::size_t>(c)];
    const GaussianState post = t.filter.update(det);
    matched[static_cast<std::size_t>(r)] = 1;
    if (t.status == TrackStatus::kLost) {
      // Re-identified: replace coasted boxes by interpolation when the gap is short.
      const HistoryEntry* prev = last_detection(t.history);
      std::vector<HistoryEntry> fill;
      if (prev) fill = interpolate_gap(*prev, frame, post.box(), cfg_.interp_max_gap);
      if (!fill.empty()) {
        std::erase_if(t.history, [&](const HistoryEntry& e) { return e.frame > prev->frame; });
        t.history.insert(t.history.end(), fill.begin(), fill.end());
      }
      t.status = TrackStatus::kConfirmed;
    }
    t.history.push_back({frame, post.box(), BoxSource::kDetection});
    ++t.consecutive_hits;
    t.frames_since_update = 0;
  }
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (matched[i]) continue;
    Track& t = tracks_[i];
    const GaussianState post = t.filter.missing();
    t.history.push_back({frame, post.box(), BoxSource::kPrior});
    t.consecutive_hits = 0;
    ++t.frames_since_update;
    if (t.status == TrackStatus::kTentative) {
      t.status = TrackStatus::kDeleted;
    } else if (t.status == TrackStatus::kConfirmed) {
      t.status = TrackStatus::kLost;
    }
    if (t.frames_since_update > cfg_.t_lost) t.status = TrackStatus::kDeleted;
  }

  // (4) spawn, confirm, emit, retire
  for (int c : a.unmatched_cols) {
    Track t(next_id_++, cfg_.filter);
    const Box& det = dets[static_cast<std::size_t>(c)];
    t.filter.init(Observation{frame, det});
    t.consecutive_hits = 1;
    t.history.push_back({frame, det, BoxSource::kDetection});
    tracks_.push_back(std::move(t));
  }
  for (auto& t : tracks_) {
    if (t.status == TrackStatus::kTentative && t.consecutive_hits >= cfg_.init_hits) {
      t.status = TrackStatus::kConfirmed;
      t.ever_confirmed = true;
    }
    if (t.status == TrackStatus::kConfirmed && t.frames_since_update == 0) {
      out.push_back({t.id, t.history.back().box, t.status});
    }
  }
  for (auto& t : tracks_) {
    if (t.status == TrackStatus::kDeleted) finished_.push_back(record_of(t));
  }
  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::kDeleted; });
  std::sort(out.begin(), out.end(), [](const TrackOutput& x, const TrackOutput& y) { return x.id < y.id; });
  return out;
}

std::vector<TrackRecord> Tracker::finalize() const {
  std::vector<TrackRecord> all = finished_;
  for (const auto& t : tracks_) all.push_back(record_of(t));
  std::sort(all.begin(), all.end(), [](const TrackRecord& x, const TrackRecord& y) { return x.id < y.id; });
  return all;
}

std::vector<TrackRecord> postprocess(std::vector<TrackRecord> tracks, const TrackerConfig& cfg) {
  std::vector<TrackRecord> out;
  for (auto& t : tracks) {
    if (!t.confirmed) continue;
    std::vector<HistoryEntry> kept;
    for (const auto& e : t.history) {
      if (e.source == BoxSource::kPrior) continue;
      if (!kept.empty() && e.source == BoxSource::kDetection) {
        const auto fill = interpolate_gap(kept.back(), e.frame, e.box, cfg.interp_max_gap);
        kept.insert(kept.end(), fill.begin(), fill.end());
      }
      kept.push_back(e);
    }
    std::sort(kept.begin(), kept.end(),
              [](const HistoryEntry& x, const HistoryEntry& y) { return x.frame < y.frame; });
    if (static_cast<int>(kept.size()) < cfg.min_track_len) continue;
    out.push_back({t.id, true, std::move(kept)});
  }
  std::sort(out.begin(), out.end(), [](const TrackRecord& x, const TrackRecord& y) { return x.id < y.id; });
  return out;
}

}  // namespace movesort
