// SPDX-License-Identifier: Apache-2.0
/**
 * @file   tracker.hpp
 * @brief  Tracking-by-detection loop: predict every live track, associate in
 *         one stage, update or coast, then spawn, confirm and delete.
 */
#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "movesort/assoc.hpp"
#include "movesort/filters.hpp"
#include "movesort/geom.hpp"

namespace movesort {

enum class TrackStatus { kTentative, kConfirmed, kLost, kDeleted };
enum class BoxSource { kDetection, kPrior, kInterpolated };

std::string_view to_string(TrackStatus s);

struct HistoryEntry {
  int frame = 0;
  Box box;
  BoxSource source = BoxSource::kDetection;
};

struct TrackerConfig {
  int t_lost = 30;
  int init_hits = 3;
  double iou_min = 0.25;
  double lambda = 5.0;
  int interp_max_gap = 5;
  int min_track_len = 20;
  CostMode cost_mode = CostMode::kHybrid;
  FilterKind filter;

  /// Throws std::invalid_argument on nonpositive counts or iou_min outside [0, 1].
  void validate() const;
};

struct Track {
  explicit Track(int id_, const FilterKind& kind) : id(id_), filter(kind) {}

  int id;
  TrackStatus status = TrackStatus::kTentative;
  int consecutive_hits = 0;
  int frames_since_update = 0;
  bool ever_confirmed = false;
  Filter filter;
  std::vector<HistoryEntry> history;
};

struct TrackOutput {
  int id = 0;
  Box box;
  TrackStatus status = TrackStatus::kConfirmed;
};

/// Finished track as handed to postprocess().
struct TrackRecord {
  int id = 0;
  bool confirmed = false;
  std::vector<HistoryEntry> history;
};

/// Boxes for the frames strictly between `last` and the rediscovery, linear
/// per coordinate. Empty when the gap exceeds max_gap or is zero.
std::vector<HistoryEntry> interpolate_gap(const HistoryEntry& last, int frame, const Box& box,
                                          int max_gap);

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  /// Processes one frame. Throws std::invalid_argument unless frame is greater
  /// than the previous one. Returns the confirmed tracks updated this frame.
  std::vector<TrackOutput> step(int frame, std::span<const Box> dets);

  /// Every track created so far, by id.
  std::vector<TrackRecord> finalize() const;

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<TrackRecord> finished_;
  int next_id_ = 1;
  int last_frame_ = 0;
  bool started_ = false;
};

/// Keeps confirmed tracks, including their tentative-period detections,
/// fills gaps up to interp_max_gap, drops tracks shorter than min_track_len
/// boxes, and orders the result by id. Only detection and interpolated boxes
/// are kept.
std::vector<TrackRecord> postprocess(std::vector<TrackRecord> tracks, const TrackerConfig& cfg);

}  // namespace movesort
