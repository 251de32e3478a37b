// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "gradcheck.hpp"
#include "mskit/mskit.hpp"
#include "mskit/png_io.hpp"
#include "oracle.hpp"

using namespace mskit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failing checks with a short reason each.
struct Checks {
  Outcome out;
  std::ostringstream notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      notes << (notes.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& what) { notes << (notes.tellp() > 0 ? "; " : "") << what; }
  Outcome done() {
    out.detail = notes.str();
    return out;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

LandmarkTrajectory static_points(std::size_t T, std::size_t N, double x = 128.0, double y = 128.0) {
  std::vector<double> c;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) c.insert(c.end(), {x + i, y - i});
  return LandmarkTrajectory(T, N, c, 25.0, SpaceTag::normalized256);
}

// -------------------------------------------------------------------- 1
Outcome msi_exactness() {
  Checks c;
  const double s = msi_score(static_points(50, 20)).msi;
  c.require(s == 100000.0, "static MSI " + fmt("%.17g", s));

  const LandmarkTrajectory cv(4, 1, {0, 0, 1, 0, 2, 0, 3, 0}, 25.0, SpaceTag::normalized256);
  // a = [1, 0, 0, -1]: var_x = 2/3, var_y = 0, axis mean 1/3.
  const double want = 1.0 / (1.0 / 3.0 + 1e-5);
  const double got = msi_score(cv).msi;
  const double rel = std::abs(got - want) / want;
  c.require(rel <= 1e-12, "T=4 relative error " + fmt("%.3g", rel));
  c.note("static " + fmt("%.1f", s) + ", T=4 rel err " + fmt("%.2g", rel));
  return c.done();
}

// -------------------------------------------------------------------- 2
Outcome noise_law() {
  Checks c;
  for (double s : {0.5, 1.0, 2.0}) {
    const auto noisy = inject_jitter(static_points(10000, 1, 100.0, 100.0), WhiteJitter{s}, 17);
    const auto v = acceleration_variance(kinematics(noisy, PaddingMode::paper), 0);
    const double law = 6.0 * s * s;
    for (double axis : {v.x, v.y}) {
      const double ratio = axis / law;
      c.require(std::abs(ratio - 1.0) <= 0.10, "s=" + fmt("%g", s) + " ratio " + fmt("%.4f", ratio));
    }
    c.note("s=" + fmt("%g", s) + ": " + fmt("%.3f", v.x / law) + "/" + fmt("%.3f", v.y / law));
  }
  return c.done();
}

// -------------------------------------------------------------------- 3
Outcome jitter_monotonicity() {
  Checks c;
  SyntheticDatasetSpec spec;
  spec.num_sequences = 20;
  spec.jitter_min = spec.jitter_max = 0.0;
  const auto data = gen_synthetic(spec);
  std::size_t held = 0, total = 0;
  for (std::size_t b = 0; b < data.size(); ++b) {
    double prev = msi_score(data[b].clean).msi;
    for (double s : {0.5, 1.0, 2.0}) {
      const double m = msi_score(inject_jitter(data[b].clean, WhiteJitter{s}, 1000 + b)).msi;
      ++total;
      held += m < prev;
      prev = m;
    }
  }
  c.require(held == 60 && total == 60, std::to_string(held) + "/" + std::to_string(total) + " orderings");
  c.note(std::to_string(held) + "/" + std::to_string(total) + " orderings hold");
  return c.done();
}

// -------------------------------------------------------------------- 4
Outcome smoothing_efficacy() {
  Checks c;
  double worst = INFINITY;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto jit = inject_jitter(static_points(500, 4), WhiteJitter{1.0}, seed);
    const auto sm = smooth_apply(jit, fixed_weights(KernelKind::uniform, 5, 500));
    const double gain = msi_score(sm).msi / msi_score(jit).msi;
    worst = std::min(worst, gain);
    c.require(gain >= 5.0, "seed " + std::to_string(seed) + " gain " + fmt("%.3f", gain));
  }
  c.note("worst gain " + fmt("%.2f", worst) + "x over 10 seeds");
  return c.done();
}

// -------------------------------------------------------------------- 5
Outcome gradient_correctness() {
  Checks c;
  double worst = 0.0;
  std::size_t checked = 0, refined = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = mskit_test::make_grad_instance(seed, 20, 2, 3, 4, 2);
    const auto rep = mskit_test::check_gradients(inst, 1e-4, 1e-4);
    worst = std::max(worst, rep.max_rel);
    checked += rep.checked;
    refined += rep.refined;
    c.require(rep.failures == 0, "seed " + std::to_string(seed) + ": " + std::to_string(rep.failures) +
                                     " entries at or above 1e-4");
  }
  c.note(std::to_string(checked) + " entries, max rel err " + fmt("%.2g", worst) + ", " +
         std::to_string(refined) + " kink-refined");
  return c.done();
}

// -------------------------------------------------------------------- 6
Outcome adaptive_beats_fixed() {
  Checks c;
  SyntheticDatasetSpec spec;
  spec.num_sequences = 64;
  spec.families = {0.5, 0.5, 0.0};
  spec.jitter = {1.0, 0.0, 0.0};
  spec.seed = 0;
  const auto train = gen_synthetic(spec);
  spec.seed = 1;
  const auto held_out = gen_synthetic(spec);

  const std::size_t steps = 1000;
  const auto res = train_smoother(make_model(Regime::adaptive, 5, 0), train, {0.05, steps, 1});
  const double adaptive = evaluate_mse(held_out, predict_all(res.model, held_out));

  double best = INFINITY, best_sigma = 0.0;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    std::vector<SmoothingWeights> w;
    for (const auto& p : held_out) w.push_back(fixed_weights(KernelKind::gaussian, 5, p.clean.frames(), sigma));
    const double mse = evaluate_mse(held_out, w);
    if (mse < best) best = mse, best_sigma = sigma;
  }
  c.require(adaptive < best, "adaptive " + fmt("%.4f", adaptive) + " vs gaussian " + fmt("%.4f", best));
  c.note(std::to_string(steps) + " steps; held-out MSE adaptive " + fmt("%.4f", adaptive) +
         ", best gaussian (sigma " + fmt("%g", best_sigma) + ") " + fmt("%.4f", best));
  return c.done();
}

// -------------------------------------------------------------------- 7
Outcome global_sanity() {
  Checks c;
  std::vector<SyntheticPair> data;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(64.0, 192.0);
  for (int b = 0; b < 64; ++b) {
    const auto clean = static_points(64, 1, u(rng), u(rng));
    data.push_back({clean, inject_jitter(clean, WhiteJitter{1.0}, rng()), SignalFamily::slow, 1.0});
  }
  // Start well away from uniform so the check measures what training learns.
  auto model = make_model(Regime::global, 3, 0);
  auto& g = std::get<GlobalSmoother>(model.net);
  g.logits_mut()[0] = 1.5;
  g.logits_mut()[1] = -1.0;
  g.logits_mut()[2] = 0.3;
  const auto res = train_smoother(model, data, {2.0, 200, 1});
  double dev = 0.0;
  for (double w : std::get<GlobalSmoother>(res.model.net).row()) dev = std::max(dev, std::abs(w - 1.0 / 3.0));
  c.require(dev < 0.05, "max deviation " + fmt("%.4f", dev));
  c.note("max deviation from uniform " + fmt("%.4f", dev));
  return c.done();
}

// -------------------------------------------------------------------- 8
Outcome morphology_laws() {
  Checks c;
  std::mt19937_64 rng(8);
  std::bernoulli_distribution bit(0.6), drop(0.2);
  std::size_t violations = 0, checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMask m(16, 16), sub(16, 16);
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        m.set(x, y, bit(rng));
        sub.set(x, y, m(x, y) && !drop(rng));
      }
    for (int r : {0, 1, 2, 3}) {
      const bool laws[] = {
          erode(m, r).subset_of(m),
          m.subset_of(dilate(m, r)),
          erode(m, r) == dilate(m.complement(), r, Border::outside_true).complement(),
          dilate(m, r) == erode(m.complement(), r, Border::outside_true).complement(),
          erode(sub, r).subset_of(erode(m, r)),
          dilate(sub, r).subset_of(dilate(m, r)),
      };
      for (bool ok : laws) {
        ++checks;
        violations += !ok;
      }
    }
  }
  c.require(violations == 0, std::to_string(violations) + " violations");
  c.note(std::to_string(checks) + " exact set comparisons, " + std::to_string(violations) + " violations");
  return c.done();
}

// -------------------------------------------------------------------- 9
Outcome correlation_harness() {
  Checks c;
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  const double r = pearson(x, y);
  c.require(std::abs(r - 0.8) <= 1e-12 * 0.8, "hand case r " + fmt("%.17g", r));

  std::map<std::string, RegionScore> metrics;
  std::map<std::string, double> scores;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int v = 0; v < 12; ++v) {
    const double sa = u(rng), sv = u(rng);
    const RegionScore s{1.0 / (sa + 1e-5), sa, sv, 1.0 / (sv + 1e-5), 20};
    metrics["video" + std::to_string(v)] = s;
    scores["video" + std::to_string(v)] = s.msi;
  }
  const auto row = correlation_table(metrics, scores);
  c.require(std::abs(row.msi - 1.0) <= 1e-12, "MSI column " + fmt("%.17g", row.msi));
  c.require(row.sigma_a < 0.0, "sigma(a) column " + fmt("%.4f", row.sigma_a));
  c.note("r=" + fmt("%.15g", r) + ", MSI column " + fmt("%.3f", row.msi) + ", sigma(a) column " +
         fmt("%.3f", row.sigma_a));
  return c.done();
}

// -------------------------------------------------------------------- 10
Outcome slice_visualization() {
  Checks c;
  const std::size_t T = 16, W = 16, H = 8;
  std::vector<GrayImage> bars;
  for (std::size_t t = 0; t < T; ++t) {
    GrayImage f(W, H);
    for (std::size_t y = 0; y < H; ++y) f.at(t, y) = 1.0;
    bars.push_back(f);
  }
  const std::size_t col = 7;
  const auto img = slice_image(FrameSequence<1>(bars), col);
  bool hit_ok = true, gather_ok = true;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < H; ++y) {
      hit_ok = hit_ok && img.at(t, y) == (t == col ? 1.0 : 0.0);
      gather_ok = gather_ok && img.at(t, y) == bars[t].at(col, y);
    }
  c.require(hit_ok, "moving bar did not hit exactly column t = 7");
  c.require(gather_ok, "gather not bit-exact");

  // Edge at y(t): white below. Jittered vs smoothed edge trajectories.
  const std::size_t F = 64, FH = 48;
  std::vector<double> coords;
  for (std::size_t t = 0; t < F; ++t) coords.insert(coords.end(), {0.0, 24.0 + 6.0 * std::sin(t / 10.0)});
  const LandmarkTrajectory clean(F, 1, coords);
  const auto jit = inject_jitter(clean, WhiteJitter{1.5}, 3);
  const auto smooth = smooth_apply(jit, fixed_weights(KernelKind::uniform, 5, F));
  auto frames = [&](const LandmarkTrajectory& tr) {
    std::vector<GrayImage> out;
    for (std::size_t t = 0; t < F; ++t) {
      GrayImage f(8, FH);
      const double edge = std::round(tr.y(t, 0));
      for (std::size_t y = 0; y < FH; ++y)
        for (std::size_t x = 0; x < 8; ++x) f.at(x, y) = static_cast<double>(y) >= edge ? 1.0 : 0.0;
      out.push_back(f);
    }
    return FrameSequence<1>(out);
  };
  const auto tri = slice_triptych<1>({frames(jit), frames(smooth)}, {"jittered", "smoothed"}, 4);
  const auto& p = tri.panels;
  const auto tj = total_transitions(tri.image, p[0].x_offset, p[0].width, 1);
  const auto ts = total_transitions(tri.image, p[1].x_offset, p[1].width, 1);
  c.require(tj > ts, "transitions jittered " + std::to_string(tj) + " vs smoothed " + std::to_string(ts));
  c.note("bar hit and gather exact; transitions jittered " + std::to_string(tj) + " > smoothed " +
         std::to_string(ts));
  return c.done();
}

// -------------------------------------------------------------------- 11
struct CliCase {
  std::string name;
  std::vector<std::string> args;   // "@" in an argument is replaced by the run directory
  std::vector<std::string> outputs;  // relative to the run directory
};

Outcome cli_determinism() {
  Checks c;
  const auto inputs = cli::scratch("accept_inputs");
  const std::string data = MSKIT_TEST_DATA;
  const std::string white = data + "/white_sigma1.csv";

  // Inputs shared by all runs.
  GrayImage img(24, 20);
  BinaryMask mask(24, 20);
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 24; ++x) {
      img.at(x, y) = static_cast<double>((x * 13 + y * 29) % 256) / 255.0;
      mask.set(x, y, (x - 12.0) * (x - 12.0) + (y - 10.0) * (y - 10.0) <= 25.0);
    }
  write_png(inputs / "img.png", img);
  write_mask_png(inputs / "mask.png", mask);
  for (const char* d : {"a", "b"}) {
    fs::create_directories(inputs / d);
    for (int t = 0; t < 10; ++t) {
      GrayImage f(12, 9);
      for (std::size_t y = 0; y < 9; ++y)
        for (std::size_t x = 0; x < 12; ++x)
          f.at(x, y) = static_cast<double>((x + 3 * y + t * (d[0] == 'a' ? 1 : 2)) % 7) / 6.0;
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06d.png", t);
      write_png(inputs / d / name, f);
    }
  }
  std::string scores = "video,score\n";
  std::vector<std::string> reports;
  for (int i = 0; i < 3; ++i) {
    const auto jit = (inputs / ("v" + std::to_string(i) + ".csv")).string();
    const auto rep = (inputs / ("v" + std::to_string(i) + ".json")).string();
    cli::run({"--seed", std::to_string(i), "jitter", white, "--sigma", std::to_string(i + 1), "--out", jit});
    cli::run({"msi", jit, "--json", rep});
    reports.push_back(rep);
    scores += "v" + std::to_string(i) + "," + std::to_string(10 - 3 * i + i * i) + "\n";
  }
  std::ofstream(inputs / "scores.csv") << scores;
  const std::string model = (inputs / "adaptive.bin").string();
  cli::run({"train", "--epochs", "5", "--out", model});

  const std::string in = inputs.string();
  std::vector<CliCase> cases = {
      {"msi", {"msi", white, "--json", "@/r.json"}, {"r.json"}},
      {"smooth-fixed", {"smooth", white, "--kernel", "gaussian", "--k", "5", "--sigma", "1.5", "--out", "@/s.csv"}, {"s.csv"}},
      {"smooth-adaptive", {"smooth", white, "--mode", "adaptive", "--model", model, "--out", "@/s.csv"}, {"s.csv"}},
      {"train", {"--seed", "4", "train", "--epochs", "15", "--out", "@/m.bin"}, {"m.bin", "m.bin.loss.csv"}},
      {"train-global", {"train", "--regime", "global", "--epochs", "15", "--out", "@/g.bin"}, {"g.bin", "g.bin.loss.csv"}},
      {"jitter", {"--seed", "7", "jitter", white, "--kind", "impulse", "--rate", "0.1", "--out", "@/j.csv"}, {"j.csv"}},
      {"gen", {"--seed", "2", "gen", "--out-dir", "@/gen", "--format", "csv"},
       {"gen/index.json", "gen/clean_000000.csv", "gen/jittered_000199.csv"}},
      {"correlate", {"correlate", "--scores", in + "/scores.csv", "--json", "@/c.json", "--reports",
                     reports[0], reports[1], reports[2]}, {"c.json"}},
      {"erode", {"--seed", "11", "erode", "--image", in + "/img.png", "--mask", in + "/mask.png", "--out",
                 "@/e.png", "--out-mask", "@/em.png"}, {"e.png", "em.png"}},
      {"slice", {"slice", "--frames", in + "/a", "--compare", in + "/b", "--column", "5", "--out", "@/t.png",
                 "--panels-json", "@/t.json"}, {"t.png", "t.json"}},
  };

  // Each case runs three times: single-threaded, --threads 3, MSKIT_THREADS=2.
  std::size_t compared = 0;
  for (const auto& cs : cases) {
    std::vector<std::vector<std::uint64_t>> hashes;
    for (int variant = 0; variant < 3; ++variant) {
      const auto dir = cli::scratch("accept_" + cs.name);
      std::vector<std::string> args;
      if (variant == 1) args = {"--threads", "3"};
      for (auto a : cs.args) {
        if (const auto at = a.find('@'); at != std::string::npos) a.replace(at, 1, dir.string());
        args.push_back(a);
      }
      const auto r = cli::run(args, variant == 2 ? "MSKIT_THREADS=2" : "");
      c.require(r.code == 0, cs.name + " exited " + std::to_string(r.code) + ": " + r.err);
      std::vector<std::uint64_t> h;
      for (const auto& o : cs.outputs) {
        const bool present = fs::exists(dir / o);
        c.require(present, cs.name + " missing " + o);
        h.push_back(present ? oracle::file_hash((dir / o).string()) : 0);
      }
      // stdout may echo the output path, which differs per run.
      std::string out = r.out;
      for (auto at = out.find(dir.string()); at != std::string::npos; at = out.find(dir.string()))
        out.replace(at, dir.string().size(), "@");
      h.push_back(oracle::fnv1a(out));
      hashes.push_back(h);
      fs::remove_all(dir);
    }
    c.require(hashes[0] == hashes[1] && hashes[0] == hashes[2], cs.name + " outputs differ between runs");
    compared += cs.outputs.size();
  }
  fs::remove_all(inputs);
  c.note(std::to_string(cases.size()) + " invocations x 3 runs, " + std::to_string(compared) +
         " output files hashed");
  return c.done();
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "MSI exactness", 1.0, msi_exactness},
      {2, "noise-variance law", 5.0, noise_law},
      {3, "jitter monotonicity", 5.0, jitter_monotonicity},
      {4, "smoothing efficacy", 5.0, smoothing_efficacy},
      {5, "gradient correctness", 30.0, gradient_correctness},
      {6, "adaptive beats fixed", 300.0, adaptive_beats_fixed},
      {7, "global-learnable sanity", 60.0, global_sanity},
      {8, "morphology laws", 5.0, morphology_laws},
      {9, "correlation harness", 1.0, correlation_harness},
      {10, "slice visualization", 5.0, slice_visualization},
      {11, "end-to-end determinism", 120.0, cli_determinism},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < cr.budget_s;
    if (!in_time) o.detail += "; over the " + fmt("%g", cr.budget_s) + " s budget";
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-24s %8.2fs  %s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
