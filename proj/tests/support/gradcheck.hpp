#pragma once

// Central finite-difference check of the adaptive smoother's analytic
// parameter gradient on a small random instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mskit/adaptive_net.hpp"
#include "mskit/smoothing.hpp"

namespace mskit_test {

struct GradInstance {
  mskit::AdaptiveSmoother net;
  std::vector<std::vector<double>> features;  // [seq] T x C_in
  std::vector<std::vector<double>> signal;    // [seq] T x (2N)
  std::vector<std::vector<double>> target;    // [seq] T x (2N)
  std::size_t channels = 0;
};

inline GradInstance make_grad_instance(std::uint64_t seed, std::size_t T = 20, std::size_t N = 2,
                                       std::size_t K = 3, std::size_t C_in = 4,
                                       std::size_t batch = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  GradInstance inst{mskit::AdaptiveSmoother::initialized({C_in, K}, seed), {}, {}, {}, 2 * N};
  // Move BN affine parameters and conv biases off their initial values so
  // every parameter has a generic gradient.
  auto p = inst.net.params_mut();
  for (std::size_t l = 0; l < mskit::AdaptiveSmoother::kLayers; ++l) {
    const auto& L = inst.net.layer(l);
    for (std::size_t c = 0; c < L.out; ++c) {
      p[L.bias + c] = 0.1 * g(rng);
      if (L.has_bn) {
        p[L.gamma + c] = 1.0 + 0.2 * g(rng);
        p[L.beta + c] = 0.1 * g(rng);
      }
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> f(T * C_in), s(T * 2 * N), y(T * 2 * N);
    for (double& v : f) v = g(rng);
    for (double& v : s) v = g(rng);
    for (double& v : y) v = g(rng);
    inst.features.push_back(std::move(f));
    inst.signal.push_back(std::move(s));
    inst.target.push_back(std::move(y));
  }
  return inst;
}

/// Mean squared error of smooth(signal, W(features)) against target over
/// all sequences; optionally returns dLoss/dW per sequence.
inline double grad_loss(const GradInstance& inst, const mskit::AdaptiveSmoother& net,
                        std::vector<std::vector<double>>* dW,
                        mskit::AdaptiveSmoother::Forward* keep = nullptr) {
  auto fw = net.forward(inst.features, mskit::AdaptiveSmoother::Mode::train);
  double loss = 0.0;
  std::size_t count = 0;
  for (const auto& y : inst.target) count += y.size();
  const double scale = 1.0 / static_cast<double>(count);
  if (dW) dW->clear();
  for (std::size_t b = 0; b < inst.features.size(); ++b) {
    const auto W = fw.smoothing_weights(b);
    const auto out = mskit::smooth_signal(inst.signal[b], inst.channels, W);
    std::vector<double> up(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = out[k] - inst.target[b][k];
      loss += d * d * scale;
      up[k] = 2.0 * d * scale;
    }
    if (dW)
      dW->push_back(mskit::smooth_signal_weight_grad(inst.signal[b], inst.channels, up,
                                                     W.frames(), W.width()));
  }
  if (keep) *keep = std::move(fw);
  return loss;
}

/// Sign pattern of every ReLU input, flattened.
inline std::vector<bool> relu_pattern(const mskit::AdaptiveSmoother::Forward& fw) {
  std::vector<bool> out;
  for (std::size_t l = 1; l < mskit::AdaptiveSmoother::kLayers; ++l)
    for (const auto& seq : fw.input[l])
      for (double v : seq) out.push_back(v > 0.0);
  return out;
}

struct GradReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::size_t refined = 0;  // entries whose first step straddled a ReLU kink
  double max_rel = 0.0;
  double max_abs_when_tiny = 0.0;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor only matters for
/// gradients that are zero analytically (conv biases feeding a batch-norm).
///
/// Central differences only approximate the derivative where the loss is
/// smooth on [p - h, p + h]. When a ReLU input changes sign inside that
/// interval the step is divided by 10 (down to `h_min`) until it does not;
/// the entry is still checked, never skipped.
inline GradReport check_gradients(const GradInstance& inst, double h = 1e-4, double tol = 1e-4,
                                  double floor = 1e-6, double h_min = 1e-7) {
  mskit::AdaptiveSmoother::Forward fw;
  std::vector<std::vector<double>> dW;
  grad_loss(inst, inst.net, &dW, &fw);
  const auto analytic = inst.net.backward(fw, dW);
  const auto base_pattern = relu_pattern(fw);

  GradReport rep;
  mskit::AdaptiveSmoother probe = inst.net;
  auto p = probe.params_mut();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double orig = p[k];
    double numeric = 0.0;
    for (double step = h;; step /= 10.0) {
      mskit::AdaptiveSmoother::Forward fp, fm;
      p[k] = orig + step;
      const double lp = grad_loss(inst, probe, nullptr, &fp);
      p[k] = orig - step;
      const double lm = grad_loss(inst, probe, nullptr, &fm);
      p[k] = orig;
      numeric = (lp - lm) / (2.0 * step);
      const bool smooth = relu_pattern(fp) == base_pattern && relu_pattern(fm) == base_pattern;
      if (smooth || step / 10.0 < h_min) break;
      if (step == h) ++rep.refined;
    }
    const double a = analytic[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    rep.max_rel = std::max(rep.max_rel, rel);
    if (std::max(std::abs(a), std::abs(numeric)) < floor)
      rep.max_abs_when_tiny = std::max(rep.max_abs_when_tiny, std::abs(a - numeric));
    ++rep.checked;
    if (!(rel < tol)) ++rep.failures;
  }
  return rep;
}

}  // namespace mskit_test
