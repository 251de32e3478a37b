#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mskit/atomic_file.hpp"
#include "mskit/error.hpp"
#include "mskit/trajectory.hpp"

namespace mskit {

enum class TrajectoryFormat { csv, json };

/// Picks the format from the file extension (".csv" or ".json").
inline TrajectoryFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return TrajectoryFormat::csv;
  if (ext == ".json") return TrajectoryFormat::json;
  fail_usage("cannot infer landmark format from extension '" + ext +
             "' (expected .csv or .json)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void csv_error(std::size_t line, std::size_t column,
                                   const std::string& what) {
  fail_io("landmark CSV line " + std::to_string(line) + ", column " +
          std::to_string(column) + ": " + what);
}

inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace detail

/// Parses the `frame,point,x,y` CSV layout. The header row is optional and
/// rows may come in any order, but every (frame, point) pair must appear
/// exactly once.
inline LandmarkTrajectory parse_trajectory_csv(std::string_view text,
                                               double fps = 25.0) {
  using detail::csv_error;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> rows;
  std::size_t max_frame = 0, max_point = 0;
  std::size_t line_no = 0;
  bool first_content = true;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (first_content) {
      first_content = false;
      if (line.find_first_of("abcdefghijklmnopqrstuvwxyz") == 0) continue;  // header
    }

    std::string_view fields[4];
    std::size_t nfields = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      if (nfields == 4) csv_error(line_no, 5, "too many fields (expected 4)");
      fields[nfields++] = detail::trim(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (nfields != 4)
      csv_error(line_no, nfields + 1, "expected 4 fields, got " + std::to_string(nfields));

    std::size_t idx[2];
    for (int c = 0; c < 2; ++c) {
      const auto f = fields[c];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), idx[c]);
      if (ec != std::errc{} || p != f.data() + f.size() || f.empty())
        csv_error(line_no, c + 1, "expected a non-negative integer, got '" +
                                      std::string(f) + "'");
    }
    double val[2];
    for (int c = 0; c < 2; ++c) {
      const auto f = fields[c + 2];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), val[c]);
      if (ec != std::errc{} || p != f.data() + f.size() || f.empty())
        csv_error(line_no, c + 3, "malformed number '" + std::string(f) + "'");
      if (!std::isfinite(val[c])) csv_error(line_no, c + 3, "non-finite value");
    }
    if (!rows.emplace(std::pair{idx[0], idx[1]}, std::pair{val[0], val[1]}).second)
      csv_error(line_no, 1, "duplicate (frame, point) pair");
    max_frame = std::max(max_frame, idx[0]);
    max_point = std::max(max_point, idx[1]);
  }
  if (rows.empty()) fail_io("landmark CSV has no data rows");

  const std::size_t frames = max_frame + 1;
  std::vector<std::size_t> per_frame(frames, 0);
  for (const auto& [key, _] : rows) ++per_frame[key.first];
  const std::size_t points = per_frame[0];
  for (std::size_t t = 0; t < frames; ++t) {
    if (per_frame[t] == 0) fail_io("landmark CSV: frame " + std::to_string(t) + " is missing");
    if (per_frame[t] != points)
      fail_io("landmark CSV: inconsistent point count (frame 0 has " +
              std::to_string(points) + ", frame " + std::to_string(t) + " has " +
              std::to_string(per_frame[t]) + ")");
  }
  if (max_point + 1 != points)
    fail_io("landmark CSV: point indices are not contiguous from 0");

  std::vector<double> coords(frames * points * 2);
  for (const auto& [key, xy] : rows) {
    const std::size_t k = (key.first * points + key.second) * 2;
    coords[k] = xy.first;
    coords[k + 1] = xy.second;
  }
  return LandmarkTrajectory(frames, points, std::move(coords), fps);
}

inline std::string trajectory_to_csv(const LandmarkTrajectory& traj) {
  std::string out = "frame,point,x,y\n";
  for (std::size_t t = 0; t < traj.frames(); ++t)
    for (std::size_t i = 0; i < traj.points(); ++i) {
      out += std::to_string(t);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += detail::format_double(traj.x(t, i));
      out += ',';
      out += detail::format_double(traj.y(t, i));
      out += '\n';
    }
  return out;
}

inline LandmarkTrajectory parse_trajectory_json(std::string_view text) try {
  const auto doc = nlohmann::json::parse(text);
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array())
    fail_io("landmark JSON: missing \"frames\" array");
  const double fps = doc.value("fps", 25.0);
  const auto& frames = doc["frames"];
  if (frames.empty()) fail_io("landmark JSON: no frames");
  const std::size_t points = doc.contains("points")
                                 ? doc["points"].get<std::size_t>()
                                 : frames[0].size();
  std::vector<double> coords;
  coords.reserve(frames.size() * points * 2);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& frame = frames[t];
    if (!frame.is_array() || frame.size() != points)
      fail_io("landmark JSON: inconsistent point count at frame " + std::to_string(t));
    for (std::size_t i = 0; i < points; ++i) {
      const auto& p = frame[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail_io("landmark JSON: malformed point at frame " + std::to_string(t) +
                ", point " + std::to_string(i));
      coords.push_back(p[0].get<double>());
      coords.push_back(p[1].get<double>());
    }
  }
  return LandmarkTrajectory(frames.size(), points, std::move(coords), fps);
} catch (const nlohmann::json::exception& e) {
  fail_io(std::string("landmark JSON: ") + e.what());
}

inline std::string trajectory_to_json(const LandmarkTrajectory& traj) {
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t t = 0; t < traj.frames(); ++t) {
    nlohmann::json frame = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.points(); ++i)
      frame.push_back({traj.x(t, i), traj.y(t, i)});
    frames.push_back(std::move(frame));
  }
  nlohmann::json doc;
  doc["fps"] = traj.fps();
  doc["points"] = traj.points();
  doc["frames"] = std::move(frames);
  return doc.dump() + "\n";
}

inline LandmarkTrajectory load_trajectory(const std::filesystem::path& path,
                                          std::optional<TrajectoryFormat> format = {}) {
  const auto fmt = format.value_or(format_from_path(path));
  const std::string text = read_file(path);
  return fmt == TrajectoryFormat::csv ? parse_trajectory_csv(text)
                                      : parse_trajectory_json(text);
}

inline void save_trajectory(const LandmarkTrajectory& traj,
                            const std::filesystem::path& path,
                            std::optional<TrajectoryFormat> format = {}) {
  const auto fmt = format.value_or(format_from_path(path));
  write_file_atomic(path, fmt == TrajectoryFormat::csv ? trajectory_to_csv(traj)
                                                       : trajectory_to_json(traj));
}

/// Region map file: `{"lip": [..], "jaw": [..], "mouth_corners": [l, r]}`.
/// `mouth_corners` is optional and returned separately.
inline std::pair<RegionMap, std::optional<MouthCorners>> parse_region_map(
    std::string_view text) try {
  const auto doc = nlohmann::json::parse(text);
  if (!doc.is_object()) fail_io("region map JSON must be an object");
  RegionMap map;
  std::optional<MouthCorners> corners;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_array()) fail_io("region map entry '" + name + "' must be an array");
    auto indices = value.get<std::vector<std::size_t>>();
    if (name == "mouth_corners") {
      if (indices.size() != 2) fail_io("mouth_corners must have two entries");
      corners = MouthCorners{indices[0], indices[1]};
    } else {
      map.set(name, std::move(indices));
    }
  }
  return {std::move(map), corners};
} catch (const nlohmann::json::exception& e) {
  fail_io(std::string("region map JSON: ") + e.what());
}

}  // namespace mskit
