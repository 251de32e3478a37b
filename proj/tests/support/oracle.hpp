#pragma once

// Straightforward reference implementations used as test oracles. They are
// written independently of the library (plain loops, no shared helpers) so a
// bug in one is unlikely to be mirrored in the other.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

namespace oracle {

/// Positions of one point: z[t] = {x, y}.
using Track = std::vector<std::array<double, 2>>;

/// Differencing with zero padding: v[t] = z[t+1] - z[t], v[T-1] = 0,
/// a[t] = v[t] - v[t-1] with v[-1] = 0.
inline Track accel_paper(const Track& z) {
  const std::size_t T = z.size();
  Track v(T, {0.0, 0.0}), a(T, {0.0, 0.0});
  for (std::size_t t = 0; t + 1 < T; ++t)
    for (int d = 0; d < 2; ++d) v[t][d] = z[t + 1][d] - z[t][d];
  for (std::size_t t = 0; t < T; ++t)
    for (int d = 0; d < 2; ++d) a[t][d] = v[t][d] - (t == 0 ? 0.0 : v[t - 1][d]);
  return a;
}

/// Second differences z[t+1] - 2 z[t] + z[t-1] for 1 <= t <= T-2.
inline Track accel_interior(const Track& z) {
  Track a;
  for (std::size_t t = 1; t + 1 < z.size(); ++t)
    a.push_back({z[t + 1][0] - 2.0 * z[t][0] + z[t - 1][0], z[t + 1][1] - 2.0 * z[t][1] + z[t - 1][1]});
  return a;
}

/// Mean over axes of sum((a - mean)^2) / (n - 1).
inline double axis_mean_variance(const Track& a) {
  double out = 0.0;
  for (int d = 0; d < 2; ++d) {
    long double m = 0.0L;
    for (const auto& s : a) m += s[d];
    m /= static_cast<long double>(a.size());
    long double ss = 0.0L;
    for (const auto& s : a) ss += (s[d] - m) * (s[d] - m);
    out += static_cast<double>(ss / static_cast<long double>(a.size() - 1));
  }
  return out / 2.0;
}

inline double msi(const std::vector<Track>& points, bool paper, double eps) {
  double acc = 0.0;
  for (const auto& z : points) acc += 1.0 / (axis_mean_variance(paper ? accel_paper(z) : accel_interior(z)) + eps);
  return acc / static_cast<double>(points.size());
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) /
                             std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

/// Weighted average of a 1-D signal over a centred window, edges replicated.
inline std::vector<double> smooth(const std::vector<double>& s, const std::vector<double>& row) {
  const long h = static_cast<long>(row.size() / 2), T = static_cast<long>(s.size());
  std::vector<double> out(s.size(), 0.0);
  for (long t = 0; t < T; ++t)
    for (long k = -h; k <= h; ++k) out[t] += row[k + h] * s[std::clamp(t + k, 0L, T - 1)];
  return out;
}

/// Row-major boolean grid.
struct Grid {
  int w = 0, h = 0;
  std::vector<int> v;
  int at(int x, int y) const { return v[y * w + x]; }
};

/// Erosion/dilation straight from the definition: compare every pixel with
/// every other pixel of the frame.
inline Grid morph(const Grid& g, int r, bool erode, bool outside) {
  Grid out{g.w, g.h, std::vector<int>(g.v.size(), 0)};
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      bool all = true, any = false;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (std::hypot(dx, dy) > r + 1e-12) continue;
          const int sx = x + dx, sy = y + dy;
          const bool in = sx >= 0 && sy >= 0 && sx < g.w && sy < g.h;
          const bool val = in ? g.at(sx, sy) != 0 : outside;
          all = all && val;
          any = any || val;
        }
      out.v[y * g.w + x] = erode ? all : any;
    }
  return out;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint64_t file_hash(const std::string& path) { return fnv1a(slurp(path)); }

/// 68 points in the iBUG layout on a 640x480 frame. `open` lowers the
/// lower lip and chin, `drift` shifts the whole face horizontally.
inline std::vector<std::array<double, 2>> face68(double open, double drift) {
  std::vector<std::array<double, 2>> p(68);
  const double cx = 320.0 + drift;
  for (int i = 0; i <= 16; ++i) {  // jaw
    const double phi = std::numbers::pi * i / 16.0;
    const double down = std::sin(phi) * 0.6 * open;
    p[i] = {cx - 110.0 * std::cos(phi), 240.0 + 120.0 * std::sin(phi) + down};
  }
  for (int i = 0; i < 10; ++i) p[17 + i] = {cx - 80.0 + 17.8 * i, 180.0 - 6.0 * std::sin(std::numbers::pi * (i % 5) / 4.0)};
  for (int i = 0; i < 9; ++i) p[27 + i] = i < 4 ? std::array<double, 2>{cx, 200.0 + 15.0 * i}
                                                  : std::array<double, 2>{cx - 20.0 + 10.0 * (i - 4), 265.0};
  for (int e = 0; e < 2; ++e)
    for (int i = 0; i < 6; ++i) {
      const double a = std::numbers::pi * i / 3.0;
      p[36 + 6 * e + i] = {cx + (e ? 45.0 : -45.0) - 14.0 * std::cos(a), 205.0 - 6.0 * std::sin(a)};
    }
  const double my = 320.0;
  for (int i = 0; i < 12; ++i) {  // outer lip, 48 = left corner, 54 = right corner
    const double a = std::numbers::pi * i / 6.0;
    const double s = -std::sin(a);  // upper lip first (negative y is up)
    p[48 + i] = {cx - 32.0 * std::cos(a), my + 14.0 * s + (s > 0 ? open : 0.0)};
  }
  for (int i = 0; i < 8; ++i) {  // inner lip, 60 = left, 64 = right
    const double a = std::numbers::pi * i / 4.0;
    const double s = -std::sin(a);
    p[60 + i] = {cx - 20.0 * std::cos(a), my + 6.0 * s + (s > 0 ? open : 0.0)};
  }
  return p;
}

}  // namespace oracle
