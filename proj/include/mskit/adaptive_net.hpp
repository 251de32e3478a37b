#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mskit/error.hpp"
#include "mskit/parallel.hpp"
#include "mskit/smoothing.hpp"

namespace mskit {

struct AdaptiveConfig {
  std::size_t in_channels = 4;
  std::size_t width = 5;  // K
};

/// Temporal conv net that predicts one smoothing-weight row per frame:
///
///   Conv1D(3, C_in->32)-BN-ReLU, Conv1D(3, 32->32)-BN-ReLU,
///   Conv1D(3, 32->16)-BN-ReLU,  Conv1D(3, 16->16)-BN-ReLU,
///   Conv1D(3, 16->K)-Sigmoid, then each row divided by its sum.
///
/// Convolutions are zero-padded so every layer keeps length T; BN statistics
/// are taken over (batch x time). All learnable values live in one flat
/// vector so the optimizer and the model file treat them uniformly.
class AdaptiveSmoother {
public:
  static constexpr std::size_t kLayers = 5;
  static constexpr std::size_t kKernel = 3;
  static constexpr double kBnEpsilon = 1e-5;
  static constexpr double kBnMomentum = 0.1;

  enum class Mode { train, eval };

  using Config = AdaptiveConfig;

  /// Offsets of one layer's blocks inside the flat parameter vector.
  struct LayerLayout {
    std::size_t in = 0, out = 0;
    std::size_t weight = 0, bias = 0;
    std::size_t gamma = 0, beta = 0;  // BN layers only
    bool has_bn = false;
  };

  explicit AdaptiveSmoother(Config cfg = {}) : cfg_(cfg) {
    require_odd_width(cfg_.width);
    if (cfg_.in_channels < 1) fail("adaptive smoother needs at least one input channel");
    const std::array<std::size_t, kLayers + 1> channels{cfg_.in_channels, 32, 32, 16, 16,
                                                        cfg_.width};
    std::size_t offset = 0, stats = 0;
    for (std::size_t l = 0; l < kLayers; ++l) {
      LayerLayout& L = layout_[l];
      L.in = channels[l];
      L.out = channels[l + 1];
      L.has_bn = l + 1 < kLayers;
      L.weight = offset;
      offset += L.out * L.in * kKernel;
      L.bias = offset;
      offset += L.out;
      if (L.has_bn) {
        L.gamma = offset;
        offset += L.out;
        L.beta = offset;
        offset += L.out;
        stats_offset_[l] = stats;
        stats += L.out;
      }
    }
    params_.assign(offset, 0.0);
    running_mean_.assign(stats, 0.0);
    running_var_.assign(stats, 1.0);
    for (std::size_t l = 0; l + 1 < kLayers; ++l)
      for (std::size_t c = 0; c < layout_[l].out; ++c) params_[layout_[l].gamma + c] = 1.0;
  }

  /// Kaiming-uniform conv weights; zero biases, BN gamma = 1, beta = 0.
  static AdaptiveSmoother initialized(Config cfg, std::uint64_t seed) {
    AdaptiveSmoother net(cfg);
    std::mt19937_64 rng(seed);
    for (const auto& L : net.layout_) {
      const double bound = std::sqrt(6.0 / static_cast<double>(L.in * kKernel));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (std::size_t k = 0; k < L.out * L.in * kKernel; ++k) net.params_[L.weight + k] = dist(rng);
    }
    return net;
  }

  const Config& config() const noexcept { return cfg_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params_mut() noexcept { return params_; }
  std::span<const double> running_mean() const noexcept { return running_mean_; }
  std::span<const double> running_var() const noexcept { return running_var_; }
  std::span<double> running_mean_mut() noexcept { return running_mean_; }
  std::span<double> running_var_mut() noexcept { return running_var_; }
  const LayerLayout& layer(std::size_t l) const { return layout_.at(l); }

  /// Everything the backward pass needs. Activations are channel-major
  /// (C x T) per sequence.
  struct Forward {
    bool valid = false;
    Mode mode = Mode::train;
    std::vector<std::size_t> frames;
    std::array<std::vector<std::vector<double>>, kLayers> input;  // [layer][seq]
    std::array<std::vector<std::vector<double>>, kLayers - 1> xhat;
    std::array<std::vector<double>, kLayers - 1> inv_std;
    std::array<std::vector<double>, kLayers - 1> batch_mean;  // train mode only
    std::array<std::vector<double>, kLayers - 1> batch_var;   // unbiased
    std::vector<std::vector<double>> sigmoid;  // [seq] T x K
    std::vector<std::vector<double>> weights;  // [seq] T x K, rows sum to 1

    SmoothingWeights smoothing_weights(std::size_t seq) const {
      const std::size_t K = weights.at(seq).size() / frames.at(seq);
      return SmoothingWeights(frames[seq], K, weights[seq], true);
    }
  };

  /// `features[b]` is a frame-major T_b x C_in matrix. In train mode BN uses
  /// batch statistics, in eval mode the running statistics.
  Forward forward(const std::vector<std::vector<double>>& features, Mode mode,
                  std::size_t threads = 1) const;

  /// Folds a train-mode pass's batch statistics into the running statistics.
  void update_running_stats(const Forward& fw) {
    if (!fw.valid || fw.mode != Mode::train) return;
    for (std::size_t l = 0; l + 1 < kLayers; ++l) {
      const std::size_t off = stats_offset_[l];
      for (std::size_t c = 0; c < layout_[l].out; ++c) {
        running_mean_[off + c] =
            (1.0 - kBnMomentum) * running_mean_[off + c] + kBnMomentum * fw.batch_mean[l][c];
        running_var_[off + c] =
            (1.0 - kBnMomentum) * running_var_[off + c] + kBnMomentum * fw.batch_var[l][c];
      }
    }
  }

  /// Parameter gradient given dLoss/dW for every sequence (T_b x K each),
  /// flat in the same layout as `params()`.
  std::vector<double> backward(const Forward& fw,
                               const std::vector<std::vector<double>>& weight_grad,
                               std::size_t threads = 1) const {
    if (!fw.valid) fail("adaptive backward called without a cached forward pass");
    const std::size_t B = fw.frames.size();
    if (weight_grad.size() != B) fail("weight gradient batch size mismatch");
    const std::size_t K = cfg_.width;

    // Gradient wrt the last conv output, channel-major per sequence.
    std::vector<std::vector<double>> dz(B);
    parallel_for(B, threads, [&](std::size_t b) {
      const std::size_t T = fw.frames[b];
      if (weight_grad[b].size() != T * K) fail("weight gradient shape mismatch");
      dz[b].assign(K * T, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        const double* s = fw.sigmoid[b].data() + t * K;
        const double* w = fw.weights[b].data() + t * K;
        const double* g = weight_grad[b].data() + t * K;
        double sum = 0.0, dot = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          sum += s[k];
          dot += g[k] * w[k];
        }
        for (std::size_t k = 0; k < K; ++k) {
          const double ds = (g[k] - dot) / sum;
          dz[b][k * T + t] = ds * s[k] * (1.0 - s[k]);
        }
      }
    });

    std::vector<std::vector<double>> partial(B, std::vector<double>(params_.size(), 0.0));
    for (std::size_t l = kLayers; l-- > 0;) {
      const LayerLayout& L = layout_[l];
      if (L.has_bn) {
        // dz currently holds dLoss/d(post-ReLU output); apply the ReLU mask
        // and push through BN.
        const auto& next_in = fw.input[l + 1];
        std::vector<std::vector<double>> sums(B, std::vector<double>(2 * L.out, 0.0));
        parallel_for(B, threads, [&](std::size_t b) {
          const std::size_t T = fw.frames[b];
          double* pg = partial[b].data();
          for (std::size_t c = 0; c < L.out; ++c) {
            const double gamma = params_[L.gamma + c];
            double s1 = 0.0, s2 = 0.0, dgamma = 0.0, dbeta = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
              const std::size_t i = c * T + t;
              const double dy = next_in[b][i] > 0.0 ? dz[b][i] : 0.0;
              const double xh = fw.xhat[l][b][i];
              dgamma += dy * xh;
              dbeta += dy;
              const double dxh = dy * gamma;
              dz[b][i] = dxh;
              s1 += dxh;
              s2 += dxh * xh;
            }
            pg[L.gamma + c] += dgamma;
            pg[L.beta + c] += dbeta;
            sums[b][c] = s1;
            sums[b][L.out + c] = s2;
          }
        });
        if (fw.mode == Mode::train) {
          std::vector<double> total(2 * L.out, 0.0);
          std::size_t n = 0;
          for (std::size_t b = 0; b < B; ++b) {
            n += fw.frames[b];
            for (std::size_t c = 0; c < 2 * L.out; ++c) total[c] += sums[b][c];
          }
          const double inv_n = 1.0 / static_cast<double>(n);
          parallel_for(B, threads, [&](std::size_t b) {
            const std::size_t T = fw.frames[b];
            for (std::size_t c = 0; c < L.out; ++c) {
              const double is = fw.inv_std[l][c];
              const double m1 = total[c] * inv_n, m2 = total[L.out + c] * inv_n;
              for (std::size_t t = 0; t < T; ++t) {
                const std::size_t i = c * T + t;
                dz[b][i] = is * (dz[b][i] - m1 - fw.xhat[l][b][i] * m2);
              }
            }
          });
        } else {
          parallel_for(B, threads, [&](std::size_t b) {
            const std::size_t T = fw.frames[b];
            for (std::size_t c = 0; c < L.out; ++c)
              for (std::size_t t = 0; t < T; ++t) dz[b][c * T + t] *= fw.inv_std[l][c];
          });
        }
      }
      // Conv backward.
      std::vector<std::vector<double>> din(B);
      parallel_for(B, threads, [&](std::size_t b) {
        const std::size_t T = fw.frames[b];
        const auto& x = fw.input[l][b];
        double* pg = partial[b].data();
        if (l > 0) din[b].assign(L.in * T, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
          const double* g = dz[b].data() + o * T;
          double db = 0.0;
          for (std::size_t t = 0; t < T; ++t) db += g[t];
          pg[L.bias + o] += db;
          for (std::size_t i = 0; i < L.in; ++i) {
            const double* xi = x.data() + i * T;
            for (std::size_t j = 0; j < kKernel; ++j) {
              const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - 1;
              const std::size_t t0 = shift < 0 ? 1 : 0;
              const std::size_t t1 = shift > 0 ? T - 1 : T;
              double acc = 0.0;
              for (std::size_t t = t0; t < t1; ++t) acc += g[t] * xi[t + shift];
              const std::size_t widx = L.weight + (o * L.in + i) * kKernel + j;
              pg[widx] += acc;
              if (l > 0) {
                const double w = params_[widx];
                double* di = din[b].data() + i * T;
                for (std::size_t t = t0; t < t1; ++t) di[t + shift] += w * g[t];
              }
            }
          }
        }
      });
      dz = std::move(din);
    }

    std::vector<double> grad(params_.size(), 0.0);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += partial[b][p];
    return grad;
  }

private:
  void conv_forward(std::size_t l, std::span<const double> x, std::size_t T,
                    std::vector<double>& out) const {
    const LayerLayout& L = layout_[l];
    out.assign(L.out * T, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      double* y = out.data() + o * T;
      const double bias = params_[L.bias + o];
      for (std::size_t t = 0; t < T; ++t) y[t] = bias;
      for (std::size_t i = 0; i < L.in; ++i) {
        const double* xi = x.data() + i * T;
        for (std::size_t j = 0; j < kKernel; ++j) {
          const double w = params_[L.weight + (o * L.in + i) * kKernel + j];
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - 1;
          const std::size_t t0 = shift < 0 ? 1 : 0;
          const std::size_t t1 = shift > 0 ? T - 1 : T;
          for (std::size_t t = t0; t < t1; ++t) y[t] += w * xi[t + shift];
        }
      }
    }
  }

  Forward forward_pass(const std::vector<std::vector<double>>& features, Mode mode,
                       std::size_t threads) const {
    const std::size_t B = features.size();
    if (B == 0) fail("adaptive forward needs at least one sequence");
    Forward fw;
    fw.mode = mode;
    fw.frames.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      if (features[b].empty() || features[b].size() % cfg_.in_channels != 0)
        fail("feature matrix shape mismatch: expected T x " + std::to_string(cfg_.in_channels));
      fw.frames[b] = features[b].size() / cfg_.in_channels;
    }
    for (auto& v : fw.input) v.resize(B);
    for (auto& v : fw.xhat) v.resize(B);

    // Frame-major features -> channel-major input.
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t T = fw.frames[b], C = cfg_.in_channels;
      auto& in = fw.input[0][b];
      in.resize(C * T);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c) in[c * T + t] = features[b][t * C + c];
    }

    std::vector<std::vector<double>> z(B);
    for (std::size_t l = 0; l < kLayers; ++l) {
      const LayerLayout& L = layout_[l];
      parallel_for(B, threads, [&](std::size_t b) {
        conv_forward(l, fw.input[l][b], fw.frames[b], z[b]);
      });
      if (!L.has_bn) break;

      std::vector<double> mean(L.out), var(L.out);
      if (mode == Mode::train) {
        std::vector<std::vector<double>> part(B, std::vector<double>(L.out, 0.0));
        std::size_t n = 0;
        for (std::size_t b = 0; b < B; ++b) n += fw.frames[b];
        parallel_for(B, threads, [&](std::size_t b) {
          const std::size_t T = fw.frames[b];
          for (std::size_t c = 0; c < L.out; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < T; ++t) s += z[b][c * T + t];
            part[b][c] = s;
          }
        });
        for (std::size_t c = 0; c < L.out; ++c) {
          double s = 0.0;
          for (std::size_t b = 0; b < B; ++b) s += part[b][c];
          mean[c] = s / static_cast<double>(n);
        }
        parallel_for(B, threads, [&](std::size_t b) {
          const std::size_t T = fw.frames[b];
          for (std::size_t c = 0; c < L.out; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
              const double d = z[b][c * T + t] - mean[c];
              s += d * d;
            }
            part[b][c] = s;
          }
        });
        for (std::size_t c = 0; c < L.out; ++c) {
          double s = 0.0;
          for (std::size_t b = 0; b < B; ++b) s += part[b][c];
          var[c] = s / static_cast<double>(n);
        }
        std::vector<double> unbiased(var);
        if (n > 1)
          for (double& v : unbiased) v *= static_cast<double>(n) / static_cast<double>(n - 1);
        fw.batch_mean[l] = mean;
        fw.batch_var[l] = std::move(unbiased);
      } else {
        for (std::size_t c = 0; c < L.out; ++c) {
          mean[c] = running_mean_[stats_offset_[l] + c];
          var[c] = running_var_[stats_offset_[l] + c];
        }
      }
      auto& inv_std = fw.inv_std[l];
      inv_std.resize(L.out);
      for (std::size_t c = 0; c < L.out; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + kBnEpsilon);

      parallel_for(B, threads, [&](std::size_t b) {
        const std::size_t T = fw.frames[b];
        auto& xh = fw.xhat[l][b];
        auto& next = fw.input[l + 1][b];
        xh.resize(L.out * T);
        next.resize(L.out * T);
        for (std::size_t c = 0; c < L.out; ++c) {
          const double gamma = params_[L.gamma + c], beta = params_[L.beta + c];
          for (std::size_t t = 0; t < T; ++t) {
            const std::size_t i = c * T + t;
            const double h = (z[b][i] - mean[c]) * inv_std[c];
            xh[i] = h;
            const double y = gamma * h + beta;
            next[i] = y > 0.0 ? y : 0.0;
          }
        }
      });
    }

    const std::size_t K = cfg_.width;
    fw.sigmoid.resize(B);
    fw.weights.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t T = fw.frames[b];
      auto& s = fw.sigmoid[b];
      auto& w = fw.weights[b];
      s.resize(T * K);
      w.resize(T * K);
      for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double v = 1.0 / (1.0 + std::exp(-z[b][k * T + t]));
          s[t * K + k] = v;
          sum += v;
        }
        for (std::size_t k = 0; k < K; ++k) w[t * K + k] = s[t * K + k] / sum;
      }
    }
    fw.valid = true;
    return fw;
  }

  Config cfg_;
  std::array<LayerLayout, kLayers> layout_{};
  std::array<std::size_t, kLayers> stats_offset_{};
  std::vector<double> params_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
};

inline AdaptiveSmoother::Forward AdaptiveSmoother::forward(
    const std::vector<std::vector<double>>& features, Mode mode, std::size_t threads) const {
  return forward_pass(features, mode, threads);
}

}  // namespace mskit
