#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mskit/adaptive_net.hpp"
#include "mskit/atomic_file.hpp"
#include "mskit/error.hpp"
#include "mskit/parallel.hpp"
#include "mskit/smoothing.hpp"
#include "mskit/synthetic.hpp"
#include "mskit/trajectory.hpp"

namespace mskit {

inline constexpr std::size_t kMotionFeatureCount = 4;

/// Per-frame motion descriptors fed to the adaptive smoother, frame-major
/// T x 4: log1p of the mean and max (over points) of the central-difference
/// speed |v| and of the second-difference magnitude |a|. Neighbours beyond
/// the ends replicate the edge frame.
inline std::vector<double> motion_features(const LandmarkTrajectory& traj) {
  const std::size_t T = traj.frames(), N = traj.points();
  std::vector<double> f(T * kMotionFeatureCount, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t prev = t == 0 ? 0 : t - 1;
    const std::size_t next = t + 1 < T ? t + 1 : T - 1;
    double v_mean = 0.0, a_mean = 0.0, v_max = 0.0, a_max = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double vx = 0.5 * (traj.x(next, i) - traj.x(prev, i));
      const double vy = 0.5 * (traj.y(next, i) - traj.y(prev, i));
      const double ax = traj.x(next, i) - 2.0 * traj.x(t, i) + traj.x(prev, i);
      const double ay = traj.y(next, i) - 2.0 * traj.y(t, i) + traj.y(prev, i);
      const double v = std::hypot(vx, vy), a = std::hypot(ax, ay);
      v_mean += v;
      a_mean += a;
      v_max = std::max(v_max, v);
      a_max = std::max(a_max, a);
    }
    double* row = f.data() + t * kMotionFeatureCount;
    row[0] = std::log1p(v_mean / static_cast<double>(N));
    row[1] = std::log1p(a_mean / static_cast<double>(N));
    row[2] = std::log1p(v_max);
    row[3] = std::log1p(a_max);
  }
  return f;
}

enum class Regime { global, adaptive };

inline const char* to_string(Regime r) { return r == Regime::global ? "global" : "adaptive"; }

inline Regime regime_from_string(const std::string& s) {
  if (s == "global") return Regime::global;
  if (s == "adaptive") return Regime::adaptive;
  fail_usage("unknown regime '" + s + "' (expected global|adaptive)");
}

/// A trained (or freshly initialized) smoother of either learnable regime.
struct SmootherModel {
  std::variant<GlobalSmoother, AdaptiveSmoother> net;
  std::uint64_t seed = 0;

  Regime regime() const {
    return std::holds_alternative<GlobalSmoother>(net) ? Regime::global : Regime::adaptive;
  }
  std::size_t width() const {
    return std::visit([](const auto& n) -> std::size_t {
      if constexpr (std::is_same_v<std::decay_t<decltype(n)>, GlobalSmoother>) return n.width();
      else return n.config().width;
    }, net);
  }
  std::size_t in_channels() const {
    if (const auto* a = std::get_if<AdaptiveSmoother>(&net)) return a->config().in_channels;
    return 0;
  }

  /// Inference-time weights for one trajectory (BN in eval mode).
  SmoothingWeights predict(const LandmarkTrajectory& traj) const {
    if (const auto* g = std::get_if<GlobalSmoother>(&net)) return g->weights(traj.frames());
    const auto& a = std::get<AdaptiveSmoother>(net);
    if (a.config().in_channels != kMotionFeatureCount)
      fail("adaptive model expects C_in = " + std::to_string(a.config().in_channels) +
           " but trajectory features provide " + std::to_string(kMotionFeatureCount));
    const auto fw = a.forward({motion_features(traj)}, AdaptiveSmoother::Mode::eval);
    return fw.smoothing_weights(0);
  }
};

inline SmootherModel make_model(Regime regime, std::size_t width, std::uint64_t seed) {
  if (regime == Regime::global) return {GlobalSmoother(width), seed};
  return {AdaptiveSmoother::initialized({kMotionFeatureCount, width}, seed), seed};
}

struct TrainOptions {
  double lr = 0.05;
  std::size_t epochs = 500;
  std::size_t threads = 1;
};

struct TrainResult {
  SmootherModel model;
  /// Full-batch loss before each step, followed by the loss after the last
  /// step (epochs + 1 entries).
  std::vector<double> loss_curve;
};

/// Mean squared error between smoothed jittered inputs and clean targets,
/// with the gradient wrt every sequence's weight matrix.
inline double smoothing_loss(const std::vector<SyntheticPair>& data,
                             const std::vector<SmoothingWeights>& weights,
                             std::vector<std::vector<double>>* weight_grad,
                             std::size_t threads = 1) {
  const std::size_t B = data.size();
  std::size_t total = 0;
  for (const auto& p : data) total += p.clean.coords().size();
  const double scale = 1.0 / static_cast<double>(total);
  std::vector<double> partial(B, 0.0);
  if (weight_grad) weight_grad->assign(B, {});
  parallel_for(B, threads, [&](std::size_t b) {
    const auto& jit = data[b].jittered;
    const std::size_t C = jit.points() * 2;
    const auto out = smooth_signal(jit.coords(), C, weights[b]);
    const auto clean = data[b].clean.coords();
    std::vector<double> g(out.size());
    double sse = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = out[k] - clean[k];
      sse += d * d;
      g[k] = 2.0 * d * scale;
    }
    partial[b] = sse;
    if (weight_grad)
      (*weight_grad)[b] = smooth_signal_weight_grad(jit.coords(), C, g, jit.frames(),
                                                    weights[b].width());
  });
  double loss = 0.0;
  for (double p : partial) loss += p;
  return loss * scale;
}

/// Clean-signal MSE of a fixed weight row applied to every pair.
inline double evaluate_mse(const std::vector<SyntheticPair>& data,
                           const std::vector<SmoothingWeights>& weights) {
  return smoothing_loss(data, weights, nullptr);
}

inline std::vector<SmoothingWeights> predict_all(const SmootherModel& model,
                                                 const std::vector<SyntheticPair>& data) {
  std::vector<SmoothingWeights> w;
  w.reserve(data.size());
  if (const auto* a = std::get_if<AdaptiveSmoother>(&model.net)) {
    std::vector<std::vector<double>> feats;
    for (const auto& p : data) feats.push_back(motion_features(p.jittered));
    const auto fw = a->forward(feats, AdaptiveSmoother::Mode::eval);
    for (std::size_t b = 0; b < data.size(); ++b) w.push_back(fw.smoothing_weights(b));
  } else {
    for (const auto& p : data) w.push_back(model.predict(p.jittered));
  }
  return w;
}

/// Full-batch gradient descent on the smoothing MSE.
inline TrainResult train_smoother(SmootherModel model, const std::vector<SyntheticPair>& data,
                                  const TrainOptions& opts) {
  if (data.empty()) fail("training needs at least one sequence");
  if (!(opts.lr >= 0.0) || !std::isfinite(opts.lr)) fail("learning rate must be finite and >= 0");
  std::vector<double> curve;
  const std::size_t B = data.size();

  std::vector<std::vector<double>> feats;
  if (model.regime() == Regime::adaptive)
    for (const auto& p : data) feats.push_back(motion_features(p.jittered));

  auto step = [&](bool apply) -> double {
    std::vector<std::vector<double>> dW;
    if (auto* g = std::get_if<GlobalSmoother>(&model.net)) {
      std::vector<SmoothingWeights> w;
      for (const auto& p : data) w.push_back(g->weights(p.jittered.frames()));
      const double loss = smoothing_loss(data, w, apply ? &dW : nullptr, opts.threads);
      if (apply && std::isfinite(loss)) {
        std::vector<double> flat;
        for (const auto& d : dW) flat.insert(flat.end(), d.begin(), d.end());
        const auto grad = g->backward(flat);
        auto logits = g->logits_mut();
        for (std::size_t k = 0; k < logits.size(); ++k) logits[k] -= opts.lr * grad[k];
      }
      return loss;
    }
    auto& net = std::get<AdaptiveSmoother>(model.net);
    const auto fw = net.forward(feats, AdaptiveSmoother::Mode::train, opts.threads);
    std::vector<SmoothingWeights> w;
    for (std::size_t b = 0; b < B; ++b) w.push_back(fw.smoothing_weights(b));
    const double loss = smoothing_loss(data, w, apply ? &dW : nullptr, opts.threads);
    if (apply && std::isfinite(loss)) {
      const auto grad = net.backward(fw, dW, opts.threads);
      auto p = net.params_mut();
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= opts.lr * grad[k];
      net.update_running_stats(fw);
    }
    return loss;
  };

  // The weights are convex combinations whatever the parameters are, so the
  // loss stays bounded; a blow-up shows in the parameters first.
  auto params_finite = [&] {
    if (const auto* g = std::get_if<GlobalSmoother>(&model.net))
      return std::all_of(g->logits().begin(), g->logits().end(), [](double v) { return std::isfinite(v); });
    const auto p = std::get<AdaptiveSmoother>(model.net).params();
    return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
  };

  for (std::size_t epoch = 0; epoch <= opts.epochs; ++epoch) {
    if (!params_finite())
      fail("training diverged at epoch " + std::to_string(epoch) +
           " (non-finite parameters, lr " + std::to_string(opts.lr) + ")");
    const double loss = step(epoch < opts.epochs);
    if (!std::isfinite(loss)) {
      const double last = curve.empty() ? NAN : curve.back();
      fail("training diverged at epoch " + std::to_string(epoch) + " (loss " +
           std::to_string(loss) + ", previous " + std::to_string(last) + ", lr " +
           std::to_string(opts.lr) + ")");
    }
    curve.push_back(loss);
  }
  return TrainResult{std::move(model), std::move(curve)};
}

// Model file: "MSKIT-SMOOTHER-v1\n", one line of JSON header, then the flat
// little-endian binary64 block (parameters, then BN running means, then BN
// running variances).
inline constexpr std::string_view kModelMagic = "MSKIT-SMOOTHER-v1";

namespace detail {

inline void append_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

inline double read_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

inline std::string serialize_model(const SmootherModel& model) {
  nlohmann::json header;
  header["regime"] = to_string(model.regime());
  header["K"] = model.width();
  header["C_in"] = model.in_channels();
  header["normalized"] = true;
  header["seed"] = model.seed;
  std::vector<double> block;
  if (const auto* g = std::get_if<GlobalSmoother>(&model.net)) {
    header["architecture"] = "softmax-row";
    header["param_count"] = g->width();
    header["bn_stats"] = 0;
    block.assign(g->logits().begin(), g->logits().end());
  } else {
    const auto& a = std::get<AdaptiveSmoother>(model.net);
    header["architecture"] = {"conv1d-bn-relu:32", "conv1d-bn-relu:32", "conv1d-bn-relu:16",
                              "conv1d-bn-relu:16", "conv1d-sigmoid:K"};
    header["kernel"] = AdaptiveSmoother::kKernel;
    header["features"] = "log1p mean|v|, log1p mean|a|, log1p max|v|, log1p max|a|";
    header["param_count"] = a.parameter_count();
    header["bn_stats"] = a.running_mean().size();
    block.assign(a.params().begin(), a.params().end());
    block.insert(block.end(), a.running_mean().begin(), a.running_mean().end());
    block.insert(block.end(), a.running_var().begin(), a.running_var().end());
  }
  std::string out(kModelMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  for (double v : block) detail::append_le(out, v);
  return out;
}

inline SmootherModel deserialize_model(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos || bytes.substr(0, nl) != kModelMagic)
    fail_io("not a smoother model file (bad magic)");
  const auto nl2 = bytes.find('\n', nl + 1);
  if (nl2 == std::string_view::npos) fail_io("model file: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(nl + 1, nl2 - nl - 1));
  } catch (const nlohmann::json::exception& e) {
    fail_io(std::string("model file header: ") + e.what());
  }
  const auto block = bytes.substr(nl2 + 1);
  const auto* raw = reinterpret_cast<const unsigned char*>(block.data());
  auto read_block = [&](std::size_t count) {
    if (block.size() != count * 8)
      fail_io("model file: parameter block has " + std::to_string(block.size()) +
              " bytes, expected " + std::to_string(count * 8));
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = detail::read_le(raw + 8 * i);
    return v;
  };
  try {
    const auto regime = regime_from_string(header.at("regime").get<std::string>());
    const std::size_t K = header.at("K").get<std::size_t>();
    const std::uint64_t seed = header.value("seed", std::uint64_t{0});
    if (regime == Regime::global) {
      return {GlobalSmoother(read_block(K)), seed};
    }
    const std::size_t cin = header.at("C_in").get<std::size_t>();
    AdaptiveSmoother net({cin, K});
    const std::size_t stats = net.running_mean().size();
    if (header.at("param_count").get<std::size_t>() != net.parameter_count() ||
        header.at("bn_stats").get<std::size_t>() != stats)
      fail_io("model file: header does not match the adaptive architecture for K = " +
              std::to_string(K) + ", C_in = " + std::to_string(cin));
    const auto v = read_block(net.parameter_count() + 2 * stats);
    std::copy_n(v.begin(), net.parameter_count(), net.params_mut().begin());
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(net.parameter_count()), stats,
                net.running_mean_mut().begin());
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(net.parameter_count() + stats), stats,
                net.running_var_mut().begin());
    return {std::move(net), seed};
  } catch (const nlohmann::json::exception& e) {
    fail_io(std::string("model file header: ") + e.what());
  }
}

inline void save_model(const SmootherModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

inline SmootherModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace mskit
