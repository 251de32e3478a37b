#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mskit/error.hpp"
#include "mskit/parallel.hpp"
#include "mskit/trajectory.hpp"

namespace mskit {

struct WhiteJitter {
  double sigma = 1.0;
};

/// Isolated single-frame pops: each frame is hit with probability `rate`
/// (never two frames in a row) and all points move by `amplitude` in a
/// random direction for that frame only.
struct ImpulseJitter {
  double rate = 0.05;
  double amplitude = 3.0;
};

/// Constant offset applied to every frame >= `frame`.
struct StepJitter {
  std::size_t frame = 0;
  double dx = 0.0;
  double dy = 0.0;
};

using JitterKind = std::variant<WhiteJitter, ImpulseJitter, StepJitter>;

inline LandmarkTrajectory inject_jitter(const LandmarkTrajectory& traj, const JitterKind& kind,
                                        std::uint64_t seed) {
  std::vector<double> c(traj.coords().begin(), traj.coords().end());
  const std::size_t T = traj.frames(), stride = traj.points() * 2;
  std::mt19937_64 rng(seed);

  if (const auto* w = std::get_if<WhiteJitter>(&kind)) {
    if (!(w->sigma >= 0.0)) fail("jitter sigma must be >= 0");
    if (w->sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, w->sigma);
      for (double& v : c) v += noise(rng);
    }
  } else if (const auto* im = std::get_if<ImpulseJitter>(&kind)) {
    if (!(im->rate >= 0.0 && im->rate <= 1.0)) fail("impulse rate must lie in [0, 1]");
    if (!(im->amplitude >= 0.0)) fail("impulse amplitude must be >= 0");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool previous = false;
    for (std::size_t t = 0; t < T; ++t) {
      const double u = unit(rng);
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      if (previous || u >= im->rate) {
        previous = false;
        continue;
      }
      previous = true;
      const double dx = im->amplitude * std::cos(angle), dy = im->amplitude * std::sin(angle);
      for (std::size_t k = 0; k < stride; k += 2) {
        c[t * stride + k] += dx;
        c[t * stride + k + 1] += dy;
      }
    }
  } else {
    const auto& st = std::get<StepJitter>(kind);
    if (st.frame >= T) fail("step frame out of range");
    for (std::size_t t = st.frame; t < T; ++t)
      for (std::size_t k = 0; k < stride; k += 2) {
        c[t * stride + k] += st.dx;
        c[t * stride + k + 1] += st.dy;
      }
  }
  return LandmarkTrajectory(T, traj.points(), std::move(c), traj.fps(), traj.space());
}

/// Mixture weights over the three clean-signal families.
struct FamilyMix {
  double slow = 0.4;   // piecewise-constant holds joined by cosine ramps
  double fast = 0.4;   // high-frequency sinusoid
  double chirp = 0.2;  // sinusoid sweeping from slow to fast
};

struct JitterMix {
  double white = 0.8;
  double impulse = 0.2;
  double step = 0.0;
};

struct SyntheticDatasetSpec {
  std::size_t num_sequences = 200;
  std::size_t frames = 64;
  std::size_t points = 4;
  std::uint64_t seed = 0;
  FamilyMix families;
  double jitter_min = 0.5;
  double jitter_max = 2.0;
  JitterMix jitter;

  void validate() const {
    if (num_sequences < 1 || frames < 1 || points < 1)
      fail("dataset counts must be >= 1");
    if (!(jitter_min >= 0.0) || !(jitter_max >= jitter_min))
      fail("jitter std range must be non-negative and ordered");
    const std::array<double, 3> fm{families.slow, families.fast, families.chirp};
    const std::array<double, 3> jm{jitter.white, jitter.impulse, jitter.step};
    for (const auto* mix : {&fm, &jm}) {
      double sum = 0.0;
      for (double v : *mix) {
        if (!(v >= 0.0)) fail("mix fractions must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) fail("mix fractions must sum to 1");
    }
  }
};

inline nlohmann::json to_json(const SyntheticDatasetSpec& s) {
  return {{"num_sequences", s.num_sequences},
          {"T", s.frames},
          {"N", s.points},
          {"seed", s.seed},
          {"families", {{"slow", s.families.slow}, {"fast", s.families.fast},
                        {"chirp", s.families.chirp}}},
          {"jitter_std_range", {s.jitter_min, s.jitter_max}},
          {"jitter_types", {{"white", s.jitter.white}, {"impulse", s.jitter.impulse},
                            {"step", s.jitter.step}}}};
}

/// Missing fields keep their defaults.
inline SyntheticDatasetSpec dataset_spec_from_json(const nlohmann::json& doc) try {
  SyntheticDatasetSpec s;
  s.num_sequences = doc.value("num_sequences", s.num_sequences);
  s.frames = doc.value("T", s.frames);
  s.points = doc.value("N", s.points);
  s.seed = doc.value("seed", s.seed);
  if (doc.contains("families")) {
    const auto& f = doc["families"];
    s.families = {f.value("slow", 0.0), f.value("fast", 0.0), f.value("chirp", 0.0)};
  }
  if (doc.contains("jitter_std_range")) {
    const auto r = doc["jitter_std_range"].get<std::vector<double>>();
    if (r.size() != 2) fail_io("jitter_std_range must have two entries");
    s.jitter_min = r[0];
    s.jitter_max = r[1];
  }
  if (doc.contains("jitter_types")) {
    const auto& j = doc["jitter_types"];
    s.jitter = {j.value("white", 0.0), j.value("impulse", 0.0), j.value("step", 0.0)};
  }
  s.validate();
  return s;
} catch (const nlohmann::json::exception& e) {
  fail_io(std::string("dataset spec JSON: ") + e.what());
}

enum class SignalFamily { slow, fast, chirp };

inline const char* to_string(SignalFamily f) {
  switch (f) {
    case SignalFamily::slow: return "slow";
    case SignalFamily::fast: return "fast";
    default: return "chirp";
  }
}

struct SyntheticPair {
  LandmarkTrajectory clean;
  LandmarkTrajectory jittered;
  SignalFamily family;
  double jitter_std;
};

namespace detail {

inline std::size_t pick(double u, std::initializer_list<double> weights) {
  std::size_t idx = 0;
  double acc = 0.0;
  for (double w : weights) {
    acc += w;
    if (u < acc && w > 0.0) return idx;
    ++idx;
  }
  // Rounding: fall back to the last family with nonzero weight.
  idx = 0;
  std::size_t last = 0;
  for (double w : weights) {
    if (w > 0.0) last = idx;
    ++idx;
  }
  return last;
}

/// One-dimensional clean motion profile for a family.
inline std::vector<double> clean_profile(SignalFamily family, std::size_t T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(T, 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  if (family == SignalFamily::slow) {
    double level = 0.0;
    std::size_t t = 0;
    while (t < T) {
      const std::size_t hold = 8 + static_cast<std::size_t>(unit(rng) * 13.0);
      for (std::size_t k = 0; k < hold && t < T; ++k) p[t++] = level;
      const double next = (unit(rng) * 2.0 - 1.0) * 6.0;
      const std::size_t ramp = 6 + static_cast<std::size_t>(unit(rng) * 5.0);
      for (std::size_t k = 1; k <= ramp && t < T; ++k) {
        const double f = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(ramp));
        p[t++] = level + (next - level) * f;
      }
      level = next;
    }
  } else if (family == SignalFamily::fast) {
    const double period = 4.0 + 4.0 * unit(rng);
    const double amp = 3.0 + 3.0 * unit(rng);
    const double phase = two_pi * unit(rng);
    for (std::size_t t = 0; t < T; ++t)
      p[t] = amp * std::sin(two_pi * static_cast<double>(t) / period + phase);
  } else {
    const double amp = 3.0 + 3.0 * unit(rng);
    const double phase = two_pi * unit(rng);
    const double f0 = 1.0 / 32.0, f1 = 1.0 / 4.0;
    const double span = static_cast<double>(std::max<std::size_t>(T, 2) - 1);
    for (std::size_t t = 0; t < T; ++t) {
      const double x = static_cast<double>(t);
      // Instantaneous frequency rises linearly from f0 to f1.
      const double cycles = f0 * x + 0.5 * (f1 - f0) * x * x / span;
      p[t] = amp * std::sin(two_pi * cycles + phase);
    }
  }
  return p;
}

}  // namespace detail

/// Builds one (clean, jittered) pair per sequence, in normalized space.
/// Sequence b draws from its own generator seeded by (spec.seed, b), so the
/// dataset is identical for any thread count.
inline std::vector<SyntheticPair> gen_synthetic(const SyntheticDatasetSpec& spec,
                                                std::size_t threads = 1) {
  spec.validate();
  std::vector<std::optional<SyntheticPair>> slots(spec.num_sequences);
  parallel_for(spec.num_sequences, threads, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(b), 0x6d736b74u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t T = spec.frames, N = spec.points;

    const auto family = static_cast<SignalFamily>(
        detail::pick(unit(rng), {spec.families.slow, spec.families.fast, spec.families.chirp}));
    const auto profile = detail::clean_profile(family, T, rng);

    std::vector<double> coords(T * N * 2);
    for (std::size_t i = 0; i < N; ++i) {
      const double x0 = 96.0 + 64.0 * unit(rng), y0 = 96.0 + 64.0 * unit(rng);
      const double gain = 0.5 + 0.5 * unit(rng);
      for (std::size_t t = 0; t < T; ++t) {
        coords[(t * N + i) * 2] = x0 + 0.3 * gain * profile[t];
        coords[(t * N + i) * 2 + 1] = y0 + gain * profile[t];
      }
    }
    LandmarkTrajectory clean(T, N, std::move(coords), 25.0, SpaceTag::normalized256);

    const double sigma = spec.jitter_min + (spec.jitter_max - spec.jitter_min) * unit(rng);
    const std::size_t kind =
        detail::pick(unit(rng), {spec.jitter.white, spec.jitter.impulse, spec.jitter.step});
    std::uint64_t jitter_seed = rng();
    JitterKind jk;
    if (kind == 0) {
      jk = WhiteJitter{sigma};
    } else if (kind == 1) {
      jk = ImpulseJitter{0.1, 3.0 * sigma};
    } else {
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const std::size_t frame = T / 4 + static_cast<std::size_t>(unit(rng) * static_cast<double>(T / 2));
      jk = StepJitter{std::min(frame, T - 1), 2.0 * sigma * std::cos(angle),
                      2.0 * sigma * std::sin(angle)};
    }
    auto jittered = inject_jitter(clean, jk, jitter_seed);
    // Impulse draws can miss every frame; redraw so a jittered sequence with
    // sigma > 0 is never identical to its clean source.
    for (int tries = 0; kind == 1 && sigma > 0.0 && jittered == clean && tries < 64; ++tries)
      jittered = inject_jitter(clean, jk, jitter_seed = rng());
    slots[b].emplace(SyntheticPair{std::move(clean), std::move(jittered), family, sigma});
  });
  std::vector<SyntheticPair> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace mskit
