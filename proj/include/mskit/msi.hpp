#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mskit/error.hpp"
#include "mskit/trajectory.hpp"

namespace mskit {

/// Boundary handling for the velocity/acceleration chain.
///
/// `paper`: v[t] = Z[t+1] - Z[t] for t < T-1, v[T-1] = 0, a[t] = v[t] - v[t-1]
/// with v[-1] = 0. Every frame contributes a sample, including the padded ends.
///
/// `interior`: only differences that never touch padding are kept, i.e.
/// v over [0, T-1) and a over [1, T-1).
enum class PaddingMode { paper, interior };

inline const char* to_string(PaddingMode mode) {
  return mode == PaddingMode::paper ? "paper" : "interior";
}

inline PaddingMode padding_from_string(const std::string& s) {
  if (s == "paper") return PaddingMode::paper;
  if (s == "interior") return PaddingMode::interior;
  fail_usage("unknown padding mode '" + s + "' (expected paper|interior)");
}

struct Kinematics {
  std::size_t frames = 0;
  std::size_t points = 0;
  PaddingMode mode = PaddingMode::paper;
  std::vector<double> velocity;      // T x N x 2, same layout as the trajectory
  std::vector<double> acceleration;  // T x N x 2
  // Half-open frame ranges holding included samples.
  std::size_t velocity_begin = 0, velocity_end = 0;
  std::size_t accel_begin = 0, accel_end = 0;

  double v(std::size_t t, std::size_t i, std::size_t axis) const {
    return velocity[(t * points + i) * 2 + axis];
  }
  double a(std::size_t t, std::size_t i, std::size_t axis) const {
    return acceleration[(t * points + i) * 2 + axis];
  }
  bool velocity_included(std::size_t t) const {
    return t >= velocity_begin && t < velocity_end;
  }
  bool accel_included(std::size_t t) const {
    return t >= accel_begin && t < accel_end;
  }
};

inline Kinematics kinematics(const LandmarkTrajectory& traj,
                             PaddingMode mode = PaddingMode::paper) {
  const std::size_t T = traj.frames(), N = traj.points();
  if (T < 3) fail("trajectory too short for acceleration (need >= 3 frames)");

  Kinematics kin;
  kin.frames = T;
  kin.points = N;
  kin.mode = mode;
  kin.velocity.assign(T * N * 2, 0.0);
  kin.acceleration.assign(T * N * 2, 0.0);

  const auto z = traj.coords();
  const std::size_t stride = N * 2;
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (std::size_t k = 0; k < stride; ++k)
      kin.velocity[t * stride + k] = z[(t + 1) * stride + k] - z[t * stride + k];
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < stride; ++k) {
      const double prev = t == 0 ? 0.0 : kin.velocity[(t - 1) * stride + k];
      kin.acceleration[t * stride + k] = kin.velocity[t * stride + k] - prev;
    }

  if (mode == PaddingMode::paper) {
    kin.velocity_begin = 0;
    kin.velocity_end = T;
    kin.accel_begin = 0;
    kin.accel_end = T;
  } else {
    kin.velocity_begin = 0;
    kin.velocity_end = T - 1;
    kin.accel_begin = 1;
    kin.accel_end = T - 1;
    // Excluded entries are zeroed so they cannot leak into any consumer.
    for (std::size_t k = 0; k < stride; ++k) {
      kin.velocity[(T - 1) * stride + k] = 0.0;
      kin.acceleration[k] = 0.0;
      kin.acceleration[(T - 1) * stride + k] = 0.0;
    }
  }
  return kin;
}

/// Per-axis sample variances and their mean.
struct AxisVariance {
  double x = 0.0;
  double y = 0.0;
  double mean = 0.0;  // (x + y) / 2
};

namespace detail {

template <typename Sample>
AxisVariance axis_variance(std::size_t begin, std::size_t end, Sample sample) {
  const std::size_t n = end - begin;
  if (n < 2) fail("variance needs at least 2 included samples, got " + std::to_string(n));
  AxisVariance out;
  double* dst[2] = {&out.x, &out.y};
  for (std::size_t axis = 0; axis < 2; ++axis) {
    double mean = 0.0;
    for (std::size_t t = begin; t < end; ++t) mean += sample(t, axis);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      const double d = sample(t, axis) - mean;
      ss += d * d;
    }
    *dst[axis] = ss / static_cast<double>(n - 1);
  }
  out.mean = 0.5 * (out.x + out.y);
  return out;
}

}  // namespace detail

/// Variance of the included acceleration samples of one point, with an
/// (n - 1) divisor; n = T in paper mode.
inline AxisVariance acceleration_variance(const Kinematics& kin, std::size_t point) {
  if (point >= kin.points) fail("point index out of range");
  return detail::axis_variance(kin.accel_begin, kin.accel_end,
                               [&](std::size_t t, std::size_t axis) {
                                 return kin.a(t, point, axis);
                               });
}

inline AxisVariance velocity_variance(const Kinematics& kin, std::size_t point) {
  if (point >= kin.points) fail("point index out of range");
  return detail::axis_variance(kin.velocity_begin, kin.velocity_end,
                               [&](std::size_t t, std::size_t axis) {
                                 return kin.v(t, point, axis);
                               });
}

/// Held in extended precision: the binary64 value nearest 1e-5 has a
/// reciprocal that rounds to 99999.99999999999, not the 1e5 ceiling.
inline constexpr long double kDefaultEpsilon = 1e-5L;

struct MsiOptions {
  long double epsilon = kDefaultEpsilon;
  PaddingMode padding = PaddingMode::paper;
  /// Accept raw-space input. Scores are then not comparable across videos.
  bool allow_raw = false;
};

/// Region statistics. `msi` and `inv_sigma_v` are means of per-point
/// reciprocals 1/(sigma + epsilon); `sigma_a` and `sigma_v` are means of the
/// per-point variances.
struct RegionScore {
  double msi = 0.0;
  double sigma_a = 0.0;
  double sigma_v = 0.0;
  double inv_sigma_v = 0.0;
  std::size_t points = 0;
};

/// Score of an already-selected point set: every point of `traj` is used.
inline RegionScore msi_score(const LandmarkTrajectory& traj, const MsiOptions& opts = {}) {
  if (traj.space() != SpaceTag::normalized256 && !opts.allow_raw)
    fail("normalize first: MSI expects normalized256 coordinates");
  if (!(opts.epsilon >= 0.0)) fail("epsilon must be non-negative");

  const Kinematics kin = kinematics(traj, opts.padding);
  RegionScore score;
  score.points = traj.points();
  long double msi_sum = 0.0L, inv_v_sum = 0.0L;
  for (std::size_t i = 0; i < traj.points(); ++i) {
    const double sa = acceleration_variance(kin, i).mean;
    const double sv = velocity_variance(kin, i).mean;
    if (sa + opts.epsilon <= 0.0L || sv + opts.epsilon <= 0.0L)
      fail("zero variance with epsilon = 0 gives an infinite index");
    msi_sum += 1.0L / (sa + opts.epsilon);
    inv_v_sum += 1.0L / (sv + opts.epsilon);
    score.sigma_a += sa;
    score.sigma_v += sv;
  }
  const double k = static_cast<double>(traj.points());
  score.msi = static_cast<double>(msi_sum / static_cast<long double>(k));
  score.inv_sigma_v = static_cast<double>(inv_v_sum / static_cast<long double>(k));
  score.sigma_a /= k;
  score.sigma_v /= k;
  return score;
}

inline RegionScore msi(const LandmarkTrajectory& traj, const RegionMap& map,
                       const std::string& region, const MsiOptions& opts = {}) {
  const auto indices = map.resolve(region, traj.points());
  if (indices.empty()) fail("empty region '" + region + "'");
  return msi_score(select_points(traj, indices), opts);
}

struct MsiReport {
  std::string video;
  double epsilon = static_cast<double>(kDefaultEpsilon);
  PaddingMode padding = PaddingMode::paper;
  std::size_t frames = 0;
  std::optional<CropSpec> crop_spec;
  std::optional<CropTransform> crop;
  std::map<std::string, RegionScore> regions;
};

inline nlohmann::json to_json(const MsiReport& report) {
  nlohmann::json doc;
  doc["video"] = report.video;
  doc["epsilon"] = report.epsilon;
  doc["padding"] = to_string(report.padding);
  doc["frames"] = report.frames;
  if (report.crop && report.crop_spec) {
    doc["crop"] = {{"ratio", report.crop_spec->ratio},
                   {"warmup_frames", report.crop_spec->warmup_frames},
                   {"out_size", report.crop_spec->out_size},
                   {"side", report.crop->side},
                   {"scale", report.crop->scale},
                   {"origin", {report.crop->origin_x, report.crop->origin_y}}};
  } else {
    doc["crop"] = nullptr;
  }
  nlohmann::json regions = nlohmann::json::object();
  for (const auto& [name, s] : report.regions)
    regions[name] = {{"msi", s.msi},
                     {"sigma_a", s.sigma_a},
                     {"sigma_v", s.sigma_v},
                     {"inv_sigma_v", s.inv_sigma_v},
                     {"points", s.points}};
  doc["regions"] = std::move(regions);
  return doc;
}

inline MsiReport msi_report_from_json(const nlohmann::json& doc) try {
  MsiReport report;
  report.video = doc.at("video").get<std::string>();
  report.epsilon = doc.at("epsilon").get<double>();
  report.padding = padding_from_string(doc.at("padding").get<std::string>());
  report.frames = doc.value("frames", std::size_t{0});
  for (const auto& [name, r] : doc.at("regions").items()) {
    RegionScore s;
    s.msi = r.at("msi").get<double>();
    s.sigma_a = r.at("sigma_a").get<double>();
    s.sigma_v = r.at("sigma_v").get<double>();
    s.inv_sigma_v = r.at("inv_sigma_v").get<double>();
    s.points = r.value("points", std::size_t{0});
    report.regions[name] = s;
  }
  return report;
} catch (const nlohmann::json::exception& e) {
  fail_io(std::string("MSI report JSON: ") + e.what());
}

}  // namespace mskit
