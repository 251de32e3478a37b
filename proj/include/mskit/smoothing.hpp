#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mskit/error.hpp"
#include "mskit/trajectory.hpp"

namespace mskit {

inline void require_odd_width(std::size_t k) {
  if (k == 0 || k % 2 == 0) fail("K must be odd (got " + std::to_string(k) + ")");
}

/// T x K per-frame combination weights. Column k holds the weight of frame
/// offset k - (K-1)/2.
class SmoothingWeights {
public:
  SmoothingWeights(std::size_t frames, std::size_t width, std::vector<double> weights,
                   bool normalized)
      : frames_(frames), width_(width), weights_(std::move(weights)),
        normalized_(normalized) {
    require_odd_width(width_);
    if (frames_ < 1) fail("smoothing weights need at least one frame");
    if (weights_.size() != frames_ * width_) fail("weight matrix size mismatch");
    for (double w : weights_)
      if (!(w >= 0.0) || !std::isfinite(w)) fail("smoothing weights must be finite and >= 0");
    if (normalized_) {
      for (std::size_t t = 0; t < frames_; ++t) {
        double sum = 0.0;
        for (std::size_t k = 0; k < width_; ++k) sum += weights_[t * width_ + k];
        if (std::abs(sum - 1.0) > 1e-9)
          fail("normalized weight row " + std::to_string(t) + " sums to " + std::to_string(sum));
      }
    }
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t width() const noexcept { return width_; }
  std::ptrdiff_t half_width() const noexcept { return static_cast<std::ptrdiff_t>(width_ / 2); }
  bool normalized() const noexcept { return normalized_; }
  double operator()(std::size_t t, std::size_t k) const { return weights_[t * width_ + k]; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(weights_).subspan(t * width_, width_);
  }
  std::span<const double> data() const noexcept { return weights_; }

private:
  std::size_t frames_;
  std::size_t width_;
  std::vector<double> weights_;
  bool normalized_;
};

inline std::size_t clamp_frame(std::ptrdiff_t t, std::size_t frames) {
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(frames) - 1));
}

/// Weighted temporal smoothing of a frame-major T x C signal. Neighbours
/// beyond either end replicate the edge frame.
///
/// Normalized weights are applied as s[t] + sum_k W[t,k] (s[t+k] - s[t]),
/// which equals the plain weighted sum when rows sum to one but returns
/// constant signals bit-for-bit.
inline std::vector<double> smooth_signal(std::span<const double> signal, std::size_t channels,
                                         const SmoothingWeights& w) {
  const std::size_t T = w.frames();
  if (signal.size() != T * channels) fail("signal length does not match weight frames");
  const std::ptrdiff_t h = w.half_width();
  const bool centered = w.normalized();
  std::vector<double> out(signal.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double* dst = out.data() + t * channels;
    const double* cur = signal.data() + t * channels;
    for (std::size_t k = 0; k < w.width(); ++k) {
      const double wk = w(t, k);
      const std::size_t src_t =
          clamp_frame(static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - h, T);
      const double* src = signal.data() + src_t * channels;
      if (centered)
        for (std::size_t c = 0; c < channels; ++c) dst[c] += wk * (src[c] - cur[c]);
      else
        for (std::size_t c = 0; c < channels; ++c) dst[c] += wk * src[c];
    }
    if (centered)
      for (std::size_t c = 0; c < channels; ++c) dst[c] += cur[c];
  }
  return out;
}

/// dLoss/dW for the plain weighted sum, given dLoss/d(output). For
/// normalized weights this differs from the gradient of the centred form
/// only by a per-row constant, which the softmax and row-renormalization
/// Jacobians both annihilate.
inline std::vector<double> smooth_signal_weight_grad(std::span<const double> signal,
                                                     std::size_t channels,
                                                     std::span<const double> upstream,
                                                     std::size_t frames, std::size_t width) {
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(width / 2);
  std::vector<double> grad(frames * width, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* g = upstream.data() + t * channels;
    for (std::size_t k = 0; k < width; ++k) {
      const std::size_t src_t =
          clamp_frame(static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - h, frames);
      const double* src = signal.data() + src_t * channels;
      double acc = 0.0;
      for (std::size_t c = 0; c < channels; ++c) acc += g[c] * src[c];
      grad[t * width + k] = acc;
    }
  }
  return grad;
}

/// Applies the weights independently to every point and axis.
inline LandmarkTrajectory smooth_apply(const LandmarkTrajectory& traj, const SmoothingWeights& w) {
  if (w.frames() != traj.frames())
    fail("weight frames (" + std::to_string(w.frames()) + ") != trajectory frames (" +
         std::to_string(traj.frames()) + ")");
  if (w.width() > 2 * traj.frames() - 1) fail("smoothing width exceeds 2T-1");
  auto out = smooth_signal(traj.coords(), traj.points() * 2, w);
  return LandmarkTrajectory(traj.frames(), traj.points(), std::move(out), traj.fps(),
                            traj.space());
}

enum class KernelKind { uniform, gaussian };

/// One hand-made row broadcast to every frame. Gaussian rows are
/// proportional to exp(-k^2 / (2 sigma^2)); sigma is clamped at 1e-3.
inline SmoothingWeights fixed_weights(KernelKind kind, std::size_t width, std::size_t frames,
                                      double sigma = 1.0) {
  require_odd_width(width);
  std::vector<double> row(width);
  if (kind == KernelKind::uniform) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(width));
  } else {
    if (!(sigma > 0.0)) fail("gaussian sigma must be > 0");
    const double s = std::max(sigma, 1e-3);
    const double h = static_cast<double>(width / 2);
    double sum = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double off = static_cast<double>(k) - h;
      row[k] = std::exp(-off * off / (2.0 * s * s));
      sum += row[k];
    }
    for (double& v : row) v /= sum;
  }
  std::vector<double> all;
  all.reserve(width * frames);
  for (std::size_t t = 0; t < frames; ++t) all.insert(all.end(), row.begin(), row.end());
  return SmoothingWeights(frames, width, std::move(all), true);
}

/// A single learnable row shared by all frames, parameterized by softmax
/// logits so the row always sums to one.
class GlobalSmoother {
public:
  explicit GlobalSmoother(std::size_t width) : logits_(width, 0.0) { require_odd_width(width); }
  explicit GlobalSmoother(std::vector<double> logits) : logits_(std::move(logits)) {
    require_odd_width(logits_.size());
  }

  std::size_t width() const noexcept { return logits_.size(); }
  std::span<const double> logits() const noexcept { return logits_; }
  std::span<double> logits_mut() noexcept { return logits_; }

  std::vector<double> row() const {
    const double mx = *std::max_element(logits_.begin(), logits_.end());
    std::vector<double> r(logits_.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) sum += r[k] = std::exp(logits_[k] - mx);
    for (double& v : r) v /= sum;
    return r;
  }

  SmoothingWeights weights(std::size_t frames) const {
    const auto r = row();
    std::vector<double> all;
    all.reserve(r.size() * frames);
    for (std::size_t t = 0; t < frames; ++t) all.insert(all.end(), r.begin(), r.end());
    return SmoothingWeights(frames, width(), std::move(all), true);
  }

  /// Chain rule through the broadcast and softmax: `weight_grad` is
  /// dLoss/dW for a T x K matrix.
  std::vector<double> backward(std::span<const double> weight_grad) const {
    const std::size_t K = width();
    if (weight_grad.size() % K != 0) fail("weight gradient shape mismatch");
    std::vector<double> row_grad(K, 0.0);
    for (std::size_t i = 0; i < weight_grad.size(); ++i) row_grad[i % K] += weight_grad[i];
    const auto p = row();
    double dot = 0.0;
    for (std::size_t k = 0; k < K; ++k) dot += p[k] * row_grad[k];
    std::vector<double> g(K);
    for (std::size_t k = 0; k < K; ++k) g[k] = p[k] * (row_grad[k] - dot);
    return g;
  }

private:
  std::vector<double> logits_;
};

}  // namespace mskit
