#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mskit/error.hpp"
#include "mskit/raster.hpp"

namespace mskit {

/// Ordered frames of identical size.
template <std::size_t C>
class FrameSequence {
public:
  explicit FrameSequence(std::vector<Raster<C>> frames) : frames_(std::move(frames)) {
    if (frames_.size() < 2) fail("a frame sequence needs at least 2 frames");
    for (const auto& f : frames_)
      if (f.width() != frames_[0].width() || f.height() != frames_[0].height())
        fail("all frames must share the same dimensions");
  }

  std::size_t size() const noexcept { return frames_.size(); }
  std::size_t width() const { return frames_[0].width(); }
  std::size_t height() const { return frames_[0].height(); }
  const Raster<C>& operator[](std::size_t t) const { return frames_[t]; }

private:
  std::vector<Raster<C>> frames_;
};

/// Stacks one pixel column per frame along x: output column t is column
/// `column` of frame t. With `band` > 1 the output averages the band of
/// columns centred on `column` (clipped to the frame).
template <std::size_t C>
Raster<C> slice_image(const FrameSequence<C>& seq, std::size_t column, std::size_t band = 1) {
  if (column >= seq.width())
    fail("slice column " + std::to_string(column) + " out of range for width " +
         std::to_string(seq.width()));
  if (band < 1) fail("slice band must be >= 1");
  const std::size_t half = (band - 1) / 2;
  const std::size_t lo = column >= half ? column - half : 0;
  const std::size_t hi = std::min(seq.width() - 1, lo + band - 1);

  Raster<C> out(seq.size(), seq.height());
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (std::size_t y = 0; y < seq.height(); ++y)
      for (std::size_t c = 0; c < C; ++c) {
        if (band == 1) {
          out.at(t, y, c) = seq[t].at(column, y, c);
        } else {
          double acc = 0.0;
          for (std::size_t x = lo; x <= hi; ++x) acc += seq[t].at(x, y, c);
          out.at(t, y, c) = acc / static_cast<double>(hi - lo + 1);
        }
      }
  return out;
}

struct TriptychPanel {
  std::string label;
  std::size_t x_offset = 0;
  std::size_t width = 0;
};

template <std::size_t C>
struct Triptych {
  Raster<C> image;
  std::vector<TriptychPanel> panels;
};

inline constexpr std::size_t kSeparatorWidth = 2;
inline constexpr double kSeparatorValue = 0.5;

/// Slice images side by side, separated by 2-px gray bars, under a one-row
/// marker strip. Row 0 is the marker strip: within each panel a single white
/// pixel sits at the slice column's relative position across the frame
/// width; everything else in row 0 is black. Rows 1.. hold the slices.
template <std::size_t C>
Triptych<C> slice_triptych(const std::vector<FrameSequence<C>>& seqs,
                           const std::vector<std::string>& labels, std::size_t column,
                           std::size_t band = 1) {
  if (seqs.empty() || seqs.size() > 3) fail("triptych takes 1 to 3 sequences");
  const std::size_t H = seqs[0].height();
  std::vector<Raster<C>> slices;
  std::size_t total = 0;
  for (const auto& s : seqs) {
    if (s.height() != H) fail("triptych sequences must share the same frame height");
    slices.push_back(slice_image(s, column, band));
    total += slices.back().width();
  }
  total += kSeparatorWidth * (seqs.size() - 1);

  Triptych<C> out{Raster<C>(total, H + 1), {}};
  std::size_t x0 = 0;
  for (std::size_t p = 0; p < slices.size(); ++p) {
    if (p > 0) {
      for (std::size_t x = x0; x < x0 + kSeparatorWidth; ++x)
        for (std::size_t y = 0; y <= H; ++y)
          for (std::size_t c = 0; c < C; ++c) out.image.at(x, y, c) = kSeparatorValue;
      x0 += kSeparatorWidth;
    }
    const auto& sl = slices[p];
    const std::size_t frame_w = seqs[p].width();
    const double rel = frame_w > 1 ? static_cast<double>(column) / static_cast<double>(frame_w - 1)
                                   : 0.0;
    const auto marker = static_cast<std::size_t>(
        std::lround(rel * static_cast<double>(sl.width() - 1)));
    for (std::size_t c = 0; c < C; ++c) out.image.at(x0 + marker, 0, c) = 1.0;
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < sl.width(); ++x)
        for (std::size_t c = 0; c < C; ++c) out.image.at(x0 + x, y + 1, c) = sl.at(x, y, c);
    out.panels.push_back({p < labels.size() ? labels[p] : "panel" + std::to_string(p), x0,
                          sl.width()});
    x0 += sl.width();
  }
  return out;
}

/// Number of horizontally adjacent pixel pairs (any channel) that differ
/// in row `y`, restricted to columns [x0, x0 + width).
template <std::size_t C>
std::size_t row_transitions(const Raster<C>& img, std::size_t y, std::size_t x0,
                            std::size_t width) {
  std::size_t n = 0;
  for (std::size_t x = x0 + 1; x < x0 + width; ++x)
    for (std::size_t c = 0; c < C; ++c)
      if (img.at(x, y, c) != img.at(x - 1, y, c)) {
        ++n;
        break;
      }
  return n;
}

template <std::size_t C>
std::size_t total_transitions(const Raster<C>& img, std::size_t x0, std::size_t width,
                              std::size_t y0 = 0) {
  std::size_t n = 0;
  for (std::size_t y = y0; y < img.height(); ++y) n += row_transitions(img, y, x0, width);
  return n;
}

}  // namespace mskit
