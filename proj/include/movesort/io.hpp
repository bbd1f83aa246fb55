// SPDX-License-Identifier: Apache-2.0
/**
 * @file   io.hpp
 * @brief  MOT-format rows, trajectory dataset files, run manifests and
 *         content hashes.
 *
 * MOT rows: frame,id,left,top,width,height,conf,x,y,z with pixel boxes.
 * Numbers are written in shortest round-trip form, so reading a file written
 * by write_mot and writing it again reproduces it byte for byte.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "movesort/features.hpp"
#include "movesort/metrics.hpp"
#include "movesort/tracker.hpp"

namespace movesort {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MotRow {
  int frame = 1;
  int id = -1;
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
  double conf = 1.0;
  double x = -1.0;
  double y = -1.0;
  double z = -1.0;

  bool operator==(const MotRow&) const = default;
};

/// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

/// Throws ParseError naming `source` and the 1-based line on malformed rows,
/// frame < 1, or negative width/height. Blank lines are skipped.
std::vector<MotRow> parse_mot(std::istream& is, const std::string& source = "<stream>");
std::vector<MotRow> read_mot(const std::string& path);
void write_mot(std::ostream& os, const std::vector<MotRow>& rows);
void write_mot(const std::string& path, const std::vector<MotRow>& rows);

struct ImageSize {
  double width = 1.0;
  double height = 1.0;
};

/// Pixel rows to normalized boxes grouped by frame.
FrameAnnotations to_annotations(const std::vector<MotRow>& rows, const ImageSize& image);
/// Normalized boxes back to pixel rows (conf 1), ordered by frame then id.
std::vector<MotRow> to_rows(const FrameAnnotations& ann, const ImageSize& image);
/// Boxes per frame, ignoring ids.
std::map<int, std::vector<Box>> detections_by_frame(const std::vector<MotRow>& rows, const ImageSize& image);
/// Track records to normalized annotations.
FrameAnnotations records_to_annotations(const std::vector<TrackRecord>& tracks);

/// Groups annotations into per-id trajectories ordered by frame.
std::vector<Trajectory> annotations_to_trajectories(const FrameAnnotations& ann);
FrameAnnotations trajectories_to_annotations(const std::vector<Trajectory>& trajs);

/// Trajectory dataset: header "track_id,frame,left,top,width,height", then one
/// row per observation in normalized coordinates, grouped by track.
void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs);
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> parse_trajectories(std::istream& is, const std::string& source = "<stream>");
std::vector<Trajectory> read_trajectories(const std::string& path);

/// Track records: header "track_id,frame,left,top,width,height,source,confirmed"
/// with normalized boxes; source is detection, prior or interpolated.
void write_records(std::ostream& os, const std::vector<TrackRecord>& tracks);
void write_records(const std::string& path, const std::vector<TrackRecord>& tracks);
std::vector<TrackRecord> parse_records(std::istream& is, const std::string& source = "<stream>");
std::vector<TrackRecord> read_records(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
/// Hex digest of a file's contents. Throws std::runtime_error if unreadable.
std::string hash_file(const std::string& path);
std::string read_file(const std::string& path);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;      ///< flattened section.key -> value
  std::map<std::string, std::string> inputs;      ///< path -> hash
  std::map<std::string, std::string> outputs;     ///< path -> hash
  std::uint64_t seed = 0;
};

/// JSON object with sorted keys.
std::string manifest_json(const Manifest& m);
void write_manifest(const std::string& path, const Manifest& m);

}  // namespace movesort
