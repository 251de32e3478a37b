#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mskit/error.hpp"

namespace mskit {

/// Row-major H x W image with `Channels` interleaved channels in [0, 1].
template <std::size_t Channels>
class Raster {
public:
  static constexpr std::size_t channels = Channels;

  Raster() = default;
  Raster(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), pixels_(width * height * Channels, fill) {
    if (width < 1 || height < 1) fail("image dimensions must be >= 1");
    if (!(fill >= 0.0 && fill <= 1.0)) fail("pixel values must lie in [0, 1]");
  }
  Raster(std::size_t width, std::size_t height, std::vector<double> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) fail("image dimensions must be >= 1");
    if (pixels_.size() != width * height * Channels) fail("pixel buffer size mismatch");
    for (double& v : pixels_) {
      if (!std::isfinite(v)) fail("non-finite pixel value");
      v = std::clamp(v, 0.0, 1.0);
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels_[(y * width_ + x) * Channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels_[(y * width_ + x) * Channels + c];
  }
  void set(std::size_t x, std::size_t y, std::size_t c, double v) {
    at(x, y, c) = std::clamp(v, 0.0, 1.0);
  }

  std::span<const double> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

using GrayImage = Raster<1>;
using RgbImage = Raster<3>;

/// H x W booleans; true marks the masked (mouth) region.
class BinaryMask {
public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height, bool fill = false)
      : width_(width), height_(height), bits_(width * height, fill ? 1 : 0) {
    if (width < 1 || height < 1) fail("mask dimensions must be >= 1");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool operator()(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v) { bits_[y * width_ + x] = v ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }
  bool empty() const { return count() == 0; }

  BinaryMask complement() const {
    BinaryMask out = *this;
    for (auto& b : out.bits_) b = b ? 0 : 1;
    return out;
  }

  /// True when every set pixel of `*this` is also set in `other`.
  bool subset_of(const BinaryMask& other) const {
    if (width_ != other.width_ || height_ != other.height_) return false;
    for (std::size_t k = 0; k < bits_.size(); ++k)
      if (bits_[k] && !other.bits_[k]) return false;
    return true;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<unsigned char> bits_;
};

}  // namespace mskit
