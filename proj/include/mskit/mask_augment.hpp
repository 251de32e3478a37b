#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "mskit/error.hpp"
#include "mskit/raster.hpp"

namespace mskit {

/// Value assumed for pixels beyond the frame. Morphology defaults to
/// `outside_false` (masks never grow in from the border); the dual operator
/// of an erosion with `outside_false` is a dilation with `outside_true`.
enum class Border { outside_false, outside_true };

/// Offsets of the Euclidean disk {(dx, dy) : dx^2 + dy^2 <= r^2}.
inline std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
  return offs;
}

namespace detail {

template <bool Erode>
BinaryMask morph(const BinaryMask& mask, int radius, Border border) {
  if (radius < 0) fail("morphology radius must be >= 0");
  if (radius == 0) return mask;
  const auto offs = disk_offsets(radius);
  const bool outside = border == Border::outside_true;
  const auto W = static_cast<long>(mask.width()), H = static_cast<long>(mask.height());
  BinaryMask out(mask.width(), mask.height());
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      // Erosion: all disk pixels set. Dilation: any disk pixel set.
      bool result = Erode;
      for (const auto& [dx, dy] : offs) {
        const long sx = x + dx, sy = y + dy;
        const bool v = (sx < 0 || sy < 0 || sx >= W || sy >= H)
                           ? outside
                           : mask(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
        if (v != Erode) {
          result = !Erode;
          break;
        }
      }
      out.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), result);
    }
  return out;
}

}  // namespace detail

inline BinaryMask erode(const BinaryMask& mask, int radius,
                        Border border = Border::outside_false) {
  return detail::morph<true>(mask, radius, border);
}

inline BinaryMask dilate(const BinaryMask& mask, int radius,
                         Border border = Border::outside_false) {
  return detail::morph<false>(mask, radius, border);
}

/// Rotates by `theta_deg` about the mask centroid, then shifts by (dx, dy).
/// Nearest-neighbour inverse mapping; content leaving the frame is dropped.
/// Rotation follows the pixel axes (x right, y down), so positive angles
/// turn clockwise on screen.
inline BinaryMask transform_mask(const BinaryMask& mask, double dx, double dy, double theta_deg) {
  double cx = 0.0, cy = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < mask.height(); ++y)
    for (std::size_t x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        cx += static_cast<double>(x);
        cy += static_cast<double>(y);
        ++n;
      }
  if (n == 0) fail("cannot transform an empty mask (no centroid)");
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);

  const double th = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  const auto W = static_cast<long>(mask.width()), H = static_cast<long>(mask.height());
  BinaryMask out(mask.width(), mask.height());
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      // Undo the shift, then the rotation.
      const double ux = static_cast<double>(x) - dx - cx;
      const double uy = static_cast<double>(y) - dy - cy;
      const double sx = c * ux + s * uy + cx;
      const double sy = -s * ux + c * uy + cy;
      const long ix = std::lround(sx), iy = std::lround(sy);
      if (ix < 0 || iy < 0 || ix >= W || iy >= H) continue;
      if (mask(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)))
        out.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), true);
    }
  return out;
}

template <std::size_t C>
Raster<C> apply_mask_out(const Raster<C>& image, const BinaryMask& mask, double fill) {
  if (image.width() != mask.width() || image.height() != mask.height())
    fail("image and mask dimensions differ");
  if (!(fill >= 0.0 && fill <= 1.0)) fail("fill value must lie in [0, 1]");
  Raster<C> out = image;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      if (mask(x, y))
        for (std::size_t c = 0; c < C; ++c) out.at(x, y, c) = fill;
  return out;
}

struct AugmentSpec {
  int radius_min = -2;  // negative radii erode, positive dilate
  int radius_max = 2;
  int shift_range = 4;  // +- pixels
  double rotate_range = 10.0;  // +- degrees
  double fill = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (radius_min > radius_max) fail("radius range must be ordered");
    if (shift_range < 0) fail("shift range must be >= 0");
    if (!(rotate_range >= 0.0)) fail("rotate range must be >= 0");
    if (!(fill >= 0.0 && fill <= 1.0)) fail("fill value must lie in [0, 1]");
  }
};

struct AugmentSample {
  int radius = 0;
  int dx = 0;
  int dy = 0;
  double theta = 0.0;
};

template <std::size_t C>
struct AugmentResult {
  Raster<C> image;
  BinaryMask mask;
  AugmentSample sample;
};

/// Draws radius, shift and rotation uniformly from `spec`, applies
/// morphology, then the rigid transform, then masks the image out.
template <std::size_t C>
AugmentResult<C> random_augment(const Raster<C>& image, const BinaryMask& mask,
                                const AugmentSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  AugmentSample s;
  s.radius = std::uniform_int_distribution<int>(spec.radius_min, spec.radius_max)(rng);
  s.dx = std::uniform_int_distribution<int>(-spec.shift_range, spec.shift_range)(rng);
  s.dy = std::uniform_int_distribution<int>(-spec.shift_range, spec.shift_range)(rng);
  s.theta = spec.rotate_range > 0.0
                ? std::uniform_real_distribution<double>(-spec.rotate_range, spec.rotate_range)(rng)
                : 0.0;

  BinaryMask m = s.radius < 0 ? erode(mask, -s.radius) : dilate(mask, s.radius);
  // An eroded-away mask stays empty: there is no centroid to move.
  if (!m.empty()) m = transform_mask(m, s.dx, s.dy, s.theta);
  auto out = apply_mask_out(image, m, spec.fill);
  return {std::move(out), std::move(m), s};
}

}  // namespace mskit
