#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mskit/error.hpp"

namespace mskit {

/// Coordinate space a trajectory lives in.
enum class SpaceTag { raw, normalized256 };

inline const char* to_string(SpaceTag tag) {
  return tag == SpaceTag::raw ? "raw" : "normalized256";
}

/// Per-frame 2-D coordinates of N tracked points over T frames.
///
/// Storage is frame-major: coordinate `axis` of point `i` at frame `t`
/// lives at `(t * N + i) * 2 + axis`. Instances are immutable; every
/// operation in the library returns a new trajectory.
class LandmarkTrajectory {
public:
  LandmarkTrajectory(std::size_t frames, std::size_t points,
                     std::vector<double> coords, double fps = 25.0,
                     SpaceTag tag = SpaceTag::raw)
      : frames_(frames), points_(points), coords_(std::move(coords)),
        fps_(fps), tag_(tag) {
    if (frames_ < 1 || points_ < 1)
      fail("trajectory needs at least one frame and one point");
    if (coords_.size() != frames_ * points_ * 2)
      fail("coordinate buffer size " + std::to_string(coords_.size()) +
           " does not match T*N*2 = " + std::to_string(frames_ * points_ * 2));
    if (!(fps_ > 0.0) || !std::isfinite(fps_)) fail("fps must be positive");
    for (std::size_t k = 0; k < coords_.size(); ++k) {
      if (!std::isfinite(coords_[k])) {
        const std::size_t t = k / (points_ * 2);
        const std::size_t i = (k / 2) % points_;
        fail("non-finite coordinate at frame " + std::to_string(t) +
             ", point " + std::to_string(i));
      }
    }
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t points() const noexcept { return points_; }
  double fps() const noexcept { return fps_; }
  SpaceTag space() const noexcept { return tag_; }

  double at(std::size_t t, std::size_t i, std::size_t axis) const {
    return coords_[(t * points_ + i) * 2 + axis];
  }
  double x(std::size_t t, std::size_t i) const { return at(t, i, 0); }
  double y(std::size_t t, std::size_t i) const { return at(t, i, 1); }

  std::span<const double> coords() const noexcept { return coords_; }

  /// Same coordinates under a different space tag. Used when a caller
  /// knowingly feeds already-normalized data back through the pipeline.
  LandmarkTrajectory retagged(SpaceTag tag) const {
    return LandmarkTrajectory(frames_, points_, coords_, fps_, tag);
  }

  friend bool operator==(const LandmarkTrajectory& a,
                         const LandmarkTrajectory& b) {
    return a.frames_ == b.frames_ && a.points_ == b.points_ &&
           a.tag_ == b.tag_ && a.fps_ == b.fps_ && a.coords_ == b.coords_;
  }

private:
  std::size_t frames_;
  std::size_t points_;
  std::vector<double> coords_;
  double fps_;
  SpaceTag tag_;
};

/// Named point-index sets over a trajectory.
///
/// The name "all" is reserved: it always resolves to every point, whether
/// or not the map defines it.
class RegionMap {
public:
  RegionMap() = default;

  void set(const std::string& name, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    regions_[name] = std::move(indices);
  }

  bool contains(const std::string& name) const {
    return name == "all" || regions_.count(name) != 0;
  }

  /// Indices of `name` for a trajectory with `num_points` points.
  std::vector<std::size_t> resolve(const std::string& name,
                                   std::size_t num_points) const {
    std::vector<std::size_t> out;
    if (auto it = regions_.find(name); it != regions_.end()) {
      out = it->second;
    } else if (name == "all") {
      out.resize(num_points);
      std::iota(out.begin(), out.end(), std::size_t{0});
    } else {
      std::string known;
      for (const auto& [key, _] : regions_) known += (known.empty() ? "" : ", ") + key;
      known += known.empty() ? "all" : ", all";
      fail("unknown region '" + name + "' (available: " + known + ")");
    }
    for (std::size_t idx : out)
      if (idx >= num_points)
        fail("region '" + name + "' index " + std::to_string(idx) +
             " out of range for " + std::to_string(num_points) + " points");
    return out;
  }

  const std::map<std::string, std::vector<std::size_t>>& regions() const {
    return regions_;
  }

  /// 68-point iBUG layout: jaw 0-16, lip 48-67.
  static RegionMap ibug68() {
    RegionMap map;
    std::vector<std::size_t> jaw(17), lip(20);
    std::iota(jaw.begin(), jaw.end(), std::size_t{0});
    std::iota(lip.begin(), lip.end(), std::size_t{48});
    map.set("jaw", std::move(jaw));
    map.set("lip", std::move(lip));
    return map;
  }

private:
  std::map<std::string, std::vector<std::size_t>> regions_;
};

/// Left/right mouth-corner landmarks (iBUG 48 and 54 by default).
struct MouthCorners {
  std::size_t left = 48;
  std::size_t right = 54;
};

struct CropSpec {
  double ratio = 0.25;             // mouth width / crop side
  std::size_t warmup_frames = 5;   // frames averaged to place the box
  std::size_t out_size = 256;      // output side in pixels

  void validate() const {
    if (!(ratio > 0.0 && ratio < 1.0)) fail("crop ratio must lie in (0, 1)");
    if (warmup_frames < 1) fail("crop warmup_frames must be >= 1");
    if (out_size < 16) fail("crop out_size must be >= 16");
  }
};

/// Axis-aligned square crop, mapping p -> (p - origin) * scale.
struct CropTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double side = 0.0;   // crop side S in source pixels
  double scale = 1.0;  // out_size / S
  double mouth_width = 0.0;
};

inline CropTransform compute_crop(const LandmarkTrajectory& traj,
                                  const CropSpec& spec,
                                  MouthCorners corners = {}) {
  spec.validate();
  if (traj.frames() < spec.warmup_frames)
    fail("trajectory has " + std::to_string(traj.frames()) +
         " frames, crop warmup needs " + std::to_string(spec.warmup_frames));
  if (corners.left >= traj.points() || corners.right >= traj.points())
    fail("mouth corner index out of range");
  if (corners.left == corners.right) fail("mouth corner indices must differ");

  double width = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t t = 0; t < spec.warmup_frames; ++t) {
    width += std::abs(traj.x(t, corners.right) - traj.x(t, corners.left));
    cx += 0.5 * (traj.x(t, corners.left) + traj.x(t, corners.right));
    cy += 0.5 * (traj.y(t, corners.left) + traj.y(t, corners.right));
  }
  const double n = static_cast<double>(spec.warmup_frames);
  width /= n;
  cx /= n;
  cy /= n;
  if (width < 1e-6) fail("degenerate mouth width");

  CropTransform crop;
  crop.mouth_width = width;
  crop.side = width / spec.ratio;
  crop.scale = static_cast<double>(spec.out_size) / crop.side;
  crop.origin_x = cx - 0.5 * crop.side;
  crop.origin_y = cy - 0.5 * crop.side;
  return crop;
}

inline LandmarkTrajectory apply_crop(const LandmarkTrajectory& traj,
                                     const CropTransform& crop) {
  std::vector<double> out(traj.coords().begin(), traj.coords().end());
  for (std::size_t k = 0; k < out.size(); k += 2) {
    out[k] = (out[k] - crop.origin_x) * crop.scale;
    out[k + 1] = (out[k + 1] - crop.origin_y) * crop.scale;
  }
  return LandmarkTrajectory(traj.frames(), traj.points(), std::move(out),
                            traj.fps(), SpaceTag::normalized256);
}

/// Mouth-anchored square crop rescaled to `spec.out_size`. The box side is
/// the warmup-averaged mouth width divided by `spec.ratio`; the box is
/// centered on the warmup-averaged mouth-corner midpoint.
inline LandmarkTrajectory normalize_crop(const LandmarkTrajectory& traj,
                                         const CropSpec& spec = {},
                                         MouthCorners corners = {}) {
  if (traj.space() != SpaceTag::raw)
    fail("normalize_crop expects a raw-space trajectory");
  return apply_crop(traj, compute_crop(traj, spec, corners));
}

/// Number of coordinates outside the tolerated normalized window
/// [-out/4, 5*out/4]. Points may drift outside the crop; this is advisory.
inline std::size_t normalized_range_violations(const LandmarkTrajectory& traj,
                                               std::size_t out_size = 256) {
  const double lo = -0.25 * static_cast<double>(out_size);
  const double hi = 1.25 * static_cast<double>(out_size);
  std::size_t count = 0;
  for (double v : traj.coords())
    if (v < lo || v > hi) ++count;
  return count;
}

inline LandmarkTrajectory select_points(const LandmarkTrajectory& traj,
                                        std::span<const std::size_t> indices) {
  if (indices.empty()) fail("empty region");
  std::vector<double> out;
  out.reserve(traj.frames() * indices.size() * 2);
  for (std::size_t t = 0; t < traj.frames(); ++t)
    for (std::size_t i : indices) {
      if (i >= traj.points()) fail("point index out of range");
      out.push_back(traj.x(t, i));
      out.push_back(traj.y(t, i));
    }
  return LandmarkTrajectory(traj.frames(), indices.size(), std::move(out),
                            traj.fps(), traj.space());
}

inline LandmarkTrajectory select_region(const LandmarkTrajectory& traj,
                                        const RegionMap& map,
                                        const std::string& name) {
  const auto indices = map.resolve(name, traj.points());
  return select_points(traj, indices);
}

}  // namespace mskit
