// SPDX-License-Identifier: Apache-2.0
#include "movesort/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

namespace movesort {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // folds -0 into 0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    std::string_view field = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double to_double(std::string_view f, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    fail(source, line, "not a number: '" + std::string(f) + "'");
  }
  return v;
}

int to_int(std::string_view f, const std::string& source, std::size_t line) {
  const double v = to_double(f, source, line);
  if (v != static_cast<double>(static_cast<int>(v))) {
    fail(source, line, "not an integer: '" + std::string(f) + "'");
  }
  return static_cast<int>(v);
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

std::vector<MotRow> parse_mot(std::istream& is, const std::string& source) {
  std::vector<MotRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (blank(line)) continue;
    const auto f = split_commas(line);
    if (f.size() != 10) fail(source, n, "expected 10 fields, found " + std::to_string(f.size()));
    MotRow r;
    r.frame = to_int(f[0], source, n);
    r.id = to_int(f[1], source, n);
    r.left = to_double(f[2], source, n);
    r.top = to_double(f[3], source, n);
    r.width = to_double(f[4], source, n);
    r.height = to_double(f[5], source, n);
    r.conf = to_double(f[6], source, n);
    r.x = to_double(f[7], source, n);
    r.y = to_double(f[8], source, n);
    r.z = to_double(f[9], source, n);
    if (r.frame < 1) fail(source, n, "frame must be at least 1");
    if (r.width < 0.0 || r.height < 0.0) fail(source, n, "negative box width or height");
    rows.push_back(r);
  }
  return rows;
}

std::vector<MotRow> read_mot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_mot(is, path);
}

void write_mot(std::ostream& os, const std::vector<MotRow>& rows) {
  for (const auto& r : rows) {
    os << r.frame << ',' << r.id << ',' << format_number(r.left) << ',' << format_number(r.top) << ','
       << format_number(r.width) << ',' << format_number(r.height) << ',' << format_number(r.conf)
       << ',' << format_number(r.x) << ',' << format_number(r.y) << ',' << format_number(r.z) << '\n';
  }
}

void write_mot(const std::string& path, const std::vector<MotRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_mot(os, rows);
}

FrameAnnotations to_annotations(const std::vector<MotRow>& rows, const ImageSize& image) {
  FrameAnnotations ann;
  for (const auto& r : rows) {
    ann[r.frame].emplace_back(
        r.id, Box::from_pixels(r.left, r.top, r.width, r.height, image.width, image.height));
  }
  return ann;
}

std::vector<MotRow> to_rows(const FrameAnnotations& ann, const ImageSize& image) {
  std::vector<MotRow> rows;
  for (const auto& [frame, objs] : ann) {
    auto sorted = objs;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [id, b] : sorted) {
      MotRow r;
      r.frame = frame;
      r.id = id;
      r.left = b.left * image.width;
      r.top = b.top * image.height;
      r.width = b.width * image.width;
      r.height = b.height * image.height;
      rows.push_back(r);
    }
  }
  return rows;
}

std::map<int, std::vector<Box>> detections_by_frame(const std::vector<MotRow>& rows, const ImageSize& image) {
  std::map<int, std::vector<Box>> out;
  for (const auto& r : rows) {
    out[r.frame].push_back(Box::from_pixels(r.left, r.top, r.width, r.height, image.width, image.height));
  }
  return out;
}

FrameAnnotations records_to_annotations(const std::vector<TrackRecord>& tracks) {
  FrameAnnotations ann;
  for (const auto& t : tracks) {
    for (const auto& e : t.history) ann[e.frame].emplace_back(t.id, e.box);
  }
  return ann;
}

std::vector<Trajectory> annotations_to_trajectories(const FrameAnnotations& ann) {
  std::map<int, Trajectory> by_id;
  for (const auto& [frame, objs] : ann) {
    for (const auto& [id, b] : objs) {
      auto& t = by_id[id];
      t.id = id;
      t.obs.push_back({frame, b});
    }
  }
  std::vector<Trajectory> out;
  for (auto& [_, t] : by_id) out.push_back(std::move(t));
  return out;
}

FrameAnnotations trajectories_to_annotations(const std::vector<Trajectory>& trajs) {
  FrameAnnotations ann;
  for (const auto& t : trajs) {
    for (const auto& o : t.obs) ann[o.t].emplace_back(t.id, o.box);
  }
  return ann;
}

void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs) {
  os << "track_id,frame,left,top,width,height\n";
  for (const auto& t : trajs) {
    for (const auto& o : t.obs) {
      os << t.id << ',' << o.t << ',' << format_number(o.box.left) << ',' << format_number(o.box.top)
         << ',' << format_number(o.box.width) << ',' << format_number(o.box.height) << '\n';
    }
  }
}

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_trajectories(os, trajs);
}

std::vector<Trajectory> parse_trajectories(std::istream& is, const std::string& source) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t n = 0;
  bool header = true;
  while (std::getline(is, line)) {
    ++n;
    if (blank(line)) continue;
    if (header) {
      header = false;
      if (line.rfind("track_id", 0) == 0) continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 6) fail(source, n, "expected 6 fields, found " + std::to_string(f.size()));
    const int id = to_int(f[0], source, n);
    Observation o{to_int(f[1], source, n),
                  Box(to_double(f[2], source, n), to_double(f[3], source, n),
                      to_double(f[4], source, n), to_double(f[5], source, n))};
    if (to_double(f[4], source, n) < 0.0 || to_double(f[5], source, n) < 0.0) {
      fail(source, n, "negative box width or height");
    }
    if (out.empty() || out.back().id != id) {
      out.push_back(Trajectory{id, {}});
    } else if (o.t <= out.back().obs.back().t) {
      fail(source, n, "frames of a track must increase");
    }
    out.back().obs.push_back(o);
  }
  return out;
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_trajectories(is, path);
}

namespace {

std::string_view source_name(BoxSource s) {
  switch (s) {
    case BoxSource::kDetection: return "detection";
    case BoxSource::kPrior: return "prior";
    case BoxSource::kInterpolated: return "interpolated";
  }
  return "unknown";
}

}  // namespace

void write_records(std::ostream& os, const std::vector<TrackRecord>& tracks) {
  os << "track_id,frame,left,top,width,height,source,confirmed\n";
  for (const auto& t : tracks) {
    for (const auto& e : t.history) {
      os << t.id << ',' << e.frame << ',' << format_number(e.box.left) << ','
         << format_number(e.box.top) << ',' << format_number(e.box.width) << ','
         << format_number(e.box.height) << ',' << source_name(e.source) << ','
         << (t.confirmed ? 1 : 0) << '\n';
    }
  }
}

void write_records(const std::string& path, const std::vector<TrackRecord>& tracks) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_records(os, tracks);
}

std::vector<TrackRecord> parse_records(std::istream& is, const std::string& source) {
  std::vector<TrackRecord> out;
  std::string line;
  std::size_t n = 0;
  bool header = true;
  while (std::getline(is, line)) {
    ++n;
    if (blank(line)) continue;
    if (header) {
      header = false;
      if (line.rfind("track_id", 0) == 0) continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 8) fail(source, n, "expected 8 fields, found " + std::to_string(f.size()));
    HistoryEntry e;
    const int id = to_int(f[0], source, n);
    e.frame = to_int(f[1], source, n);
    e.box = Box(to_double(f[2], source, n), to_double(f[3], source, n), to_double(f[4], source, n),
                to_double(f[5], source, n));
    if (f[6] == "detection") {
      e.source = BoxSource::kDetection;
    } else if (f[6] == "prior") {
      e.source = BoxSource::kPrior;
    } else if (f[6] == "interpolated") {
      e.source = BoxSource::kInterpolated;
    } else {
      fail(source, n, "unknown box source '" + std::string(f[6]) + "'");
    }
    const bool confirmed = to_int(f[7], source, n) != 0;
    if (out.empty() || out.back().id != id) out.push_back(TrackRecord{id, confirmed, {}});
    out.back().history.push_back(e);
  }
  return out;
}

std::vector<TrackRecord> read_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_records(is, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string hash_file(const std::string& path) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(read_file(path));
  return ss.str();
}

std::string manifest_json(const Manifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << manifest_json(m);
}

}  // namespace movesort
