// mskit command-line front end. Exit codes: 0 ok, 1 computation error,
// 2 usage or I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mskit/mskit.hpp"
#include "mskit/png_io.hpp"

namespace fs = std::filesystem;
using namespace mskit;

namespace {

enum class LogLevel { error, warn, info, debug };

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t threads = 1;
  std::string log_level = "warn";
  LogLevel level = LogLevel::warn;
};

Globals g_opts;

void log(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (lvl <= g_opts.level) std::cerr << "mskit: " << names[static_cast<int>(lvl)] << ": " << msg << "\n";
}

std::size_t resolve_threads(std::size_t flag) {
  if (const char* env = std::getenv("MSKIT_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) fail_usage(std::string("MSKIT_THREADS must be an integer >= 1, got '") + env + "'");
    return static_cast<std::size_t>(v);
  }
  if (flag < 1) fail_usage("--threads must be >= 1");
  return flag;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- msi

struct MsiArgs {
  std::string landmarks;
  std::string region_map;
  std::string regions;
  long double epsilon = kDefaultEpsilon;
  std::string padding = "paper";
  double crop_ratio = 0.25;
  std::size_t crop_warmup = 5;
  std::size_t crop_out = 256;
  std::vector<std::size_t> corners;
  bool assume_normalized = false;
  std::string json_out;
  std::string video;
};

MsiReport compute_msi_report(const MsiArgs& a) {
  const auto traj = load_trajectory(a.landmarks);
  RegionMap map;
  std::optional<MouthCorners> corners;
  if (!a.region_map.empty()) {
    auto parsed = parse_region_map(read_file(a.region_map));
    map = std::move(parsed.first);
    corners = parsed.second;
  } else if (traj.points() >= 68) {
    map = RegionMap::ibug68();
  }
  if (!a.corners.empty()) {
    if (a.corners.size() != 2) fail_usage("--mouth-corners takes exactly two indices");
    corners = MouthCorners{a.corners[0], a.corners[1]};
  }

  std::vector<std::string> names = split_csv_list(a.regions);
  if (names.empty()) {
    for (const auto& [name, _] : map.regions()) names.push_back(name);
    if (names.empty()) names.push_back("all");
  }

  MsiReport report;
  report.video = a.video.empty() ? fs::path(a.landmarks).stem().string() : a.video;
  report.epsilon = static_cast<double>(a.epsilon);
  report.padding = padding_from_string(a.padding);
  report.frames = traj.frames();

  LandmarkTrajectory norm = traj;
  if (a.assume_normalized) {
    norm = traj.retagged(SpaceTag::normalized256);
  } else {
    CropSpec spec{a.crop_ratio, a.crop_warmup, a.crop_out};
    const auto crop = compute_crop(traj, spec, corners.value_or(MouthCorners{}));
    norm = apply_crop(traj, crop);
    report.crop_spec = spec;
    report.crop = crop;
    if (const auto bad = normalized_range_violations(norm, spec.out_size); bad > 0)
      log(LogLevel::warn, std::to_string(bad) + " normalized coordinates fall outside [-64, 320]");
  }

  const MsiOptions opts{a.epsilon, report.padding, false};
  for (const auto& name : names) report.regions[name] = msi(norm, map, name, opts);
  return report;
}

int run_msi(const MsiArgs& a) {
  const auto report = compute_msi_report(a);
  std::printf("video %s  frames %zu  padding %s  epsilon %s\n", report.video.c_str(),
              report.frames, to_string(report.padding), fmt_num(report.epsilon).c_str());
  std::printf("%-10s %7s %14s %14s %14s %14s\n", "region", "points", "MSI", "sigma(a)",
              "sigma(v)", "1/sigma(v)");
  for (const auto& [name, s] : report.regions)
    std::printf("%-10s %7zu %14.6f %14.6g %14.6g %14.6f\n", name.c_str(), s.points, s.msi,
                s.sigma_a, s.sigma_v, s.inv_sigma_v);
  if (!a.json_out.empty()) {
    write_file_atomic(a.json_out, to_json(report).dump(2) + "\n");
    log(LogLevel::info, "wrote " + a.json_out);
  }
  return 0;
}

// ---------------------------------------------------------------- smooth

struct SmoothArgs {
  std::string landmarks;
  std::string out;
  std::string mode = "fixed";
  std::string model;
  std::string kernel = "uniform";
  std::size_t k = 5;
  bool k_given = false;
  double sigma = 1.0;
};

int run_smooth(const SmoothArgs& a) {
  if (a.mode != "fixed" && a.mode != "global" && a.mode != "adaptive")
    fail_usage("unknown --mode '" + a.mode + "' (expected fixed|global|adaptive)");
  if (a.k % 2 == 0) fail_usage("K must be odd (got " + std::to_string(a.k) + ")");
  const auto traj = load_trajectory(a.landmarks);
  std::optional<SmoothingWeights> w;
  if (a.mode == "fixed") {
    if (a.kernel != "uniform" && a.kernel != "gaussian")
      fail_usage("unknown --kernel '" + a.kernel + "' (expected uniform|gaussian)");
    w = fixed_weights(a.kernel == "uniform" ? KernelKind::uniform : KernelKind::gaussian, a.k,
                      traj.frames(), a.sigma);
  } else {
    if (a.model.empty()) fail_usage("--mode " + a.mode + " requires --model");
    const auto model = load_model(a.model);
    const Regime want = regime_from_string(a.mode);
    const std::string arch = "K = " + std::to_string(model.width()) +
                             ", C_in = " + std::to_string(model.in_channels());
    if (model.regime() != want)
      fail_usage("model file holds a " + std::string(to_string(model.regime())) +
                 " smoother (" + arch + "), not " + a.mode);
    if (a.k_given && a.k != model.width())
      fail_usage("model architecture mismatch: expected K = " + std::to_string(a.k) +
                 ", model has " + arch);
    if (want == Regime::adaptive && model.in_channels() != kMotionFeatureCount)
      fail_usage("model architecture mismatch: expected C_in = " +
                 std::to_string(kMotionFeatureCount) + ", model has " + arch);
    w = model.predict(traj);
  }
  save_trajectory(smooth_apply(traj, *w), a.out, format_from_path(a.landmarks));
  log(LogLevel::info, "wrote " + a.out);
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string spec;
  std::string regime = "adaptive";
  double lr = 0.05;
  std::size_t epochs = 500;
  std::size_t k = 5;
  std::string out;
  std::string loss_curve;
};

SyntheticDatasetSpec load_spec(const std::string& path) {
  if (path.empty()) return {};
  try {
    return dataset_spec_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    fail_io("dataset spec " + path + ": " + e.what());
  }
}

int run_train(const TrainArgs& a) {
  const auto spec = load_spec(a.spec);
  if (!(a.lr >= 0.0)) fail_usage("--lr must be >= 0");
  const auto data = gen_synthetic(spec, g_opts.threads);
  auto model = make_model(regime_from_string(a.regime), a.k, g_opts.seed);
  if (const auto* net = std::get_if<AdaptiveSmoother>(&model.net))
    log(LogLevel::info, "adaptive smoother with " + std::to_string(net->parameter_count()) +
                            " parameters");
  const auto result = train_smoother(std::move(model), data, {a.lr, a.epochs, g_opts.threads});

  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
    csv += std::to_string(e) + "," + detail::format_double(result.loss_curve[e]) + "\n";
  const std::string curve_path = a.loss_curve.empty() ? a.out + ".loss.csv" : a.loss_curve;
  save_model(result.model, a.out);
  write_file_atomic(curve_path, csv);
  std::printf("regime %s  K %zu  epochs %zu  loss %s -> %s\n", to_string(result.model.regime()),
              result.model.width(), a.epochs, fmt_num(result.loss_curve.front()).c_str(),
              fmt_num(result.loss_curve.back()).c_str());
  return 0;
}

// ---------------------------------------------------------------- jitter

struct JitterArgs {
  std::string landmarks;
  std::string out;
  std::string kind = "white";
  double sigma = 1.0;
  double rate = 0.05;
  double amplitude = 3.0;
  std::size_t frame = 0;
  double dx = 0.0;
  double dy = 0.0;
};

int run_jitter(const JitterArgs& a) {
  const auto traj = load_trajectory(a.landmarks);
  JitterKind kind;
  if (a.kind == "white") {
    kind = WhiteJitter{a.sigma};
  } else if (a.kind == "impulse") {
    kind = ImpulseJitter{a.rate, a.amplitude};
  } else if (a.kind == "step") {
    if (a.frame >= traj.frames())
      fail_usage("--frame " + std::to_string(a.frame) + " out of range for " +
                 std::to_string(traj.frames()) + " frames");
    kind = StepJitter{a.frame, a.dx, a.dy};
  } else {
    fail_usage("unknown --kind '" + a.kind + "' (expected white|impulse|step)");
  }
  save_trajectory(inject_jitter(traj, kind, g_opts.seed), a.out, format_from_path(a.landmarks));
  return 0;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string spec;
  std::string out_dir;
  std::string format = "json";
};

int run_gen(const GenArgs& a) {
  auto spec = load_spec(a.spec);
  if (g_opts.seed_given) spec.seed = g_opts.seed;
  if (a.format != "json" && a.format != "csv")
    fail_usage("unknown --format '" + a.format + "' (expected json|csv)");
  const auto data = gen_synthetic(spec, g_opts.threads);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) fail_io("cannot create " + a.out_dir + ": " + ec.message());

  nlohmann::json index;
  index["spec"] = to_json(spec);
  index["sequences"] = nlohmann::json::array();
  const auto fmt = a.format == "csv" ? TrajectoryFormat::csv : TrajectoryFormat::json;
  for (std::size_t b = 0; b < data.size(); ++b) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%06zu", b);
    const std::string clean = std::string("clean_") + stem + "." + a.format;
    const std::string jit = std::string("jittered_") + stem + "." + a.format;
    save_trajectory(data[b].clean, fs::path(a.out_dir) / clean, fmt);
    save_trajectory(data[b].jittered, fs::path(a.out_dir) / jit, fmt);
    index["sequences"].push_back({{"clean", clean},
                                  {"jittered", jit},
                                  {"family", to_string(data[b].family)},
                                  {"jitter_std", data[b].jitter_std}});
  }
  write_file_atomic(fs::path(a.out_dir) / "index.json", index.dump(2) + "\n");
  std::printf("wrote %zu pairs to %s\n", data.size(), a.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
  std::vector<std::string> reports;
  std::string scores;
  std::string json_out;
};

std::map<std::string, double> parse_scores(const std::string& path) {
  std::map<std::string, double> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail_io(path + " line " + std::to_string(lineno) + ": expected 'video,score'");
    const std::string id = line.substr(0, comma), value = line.substr(comma + 1);
    if (lineno == 1 && id == "video") continue;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
      fail_io(path + " line " + std::to_string(lineno) + ": bad score '" + value + "'");
    if (!out.emplace(id, v).second)
      fail_io(path + " line " + std::to_string(lineno) + ": duplicate video '" + id + "'");
  }
  return out;
}

int run_correlate(const CorrelateArgs& a) {
  std::map<std::string, std::map<std::string, RegionScore>> per_region;
  for (const auto& path : a.reports) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      fail_io(path + ": " + e.what());
    }
    const auto report = msi_report_from_json(doc);
    for (const auto& [region, s] : report.regions)
      if (!per_region[region].emplace(report.video, s).second)
        fail_usage("video '" + report.video + "' appears in more than one report");
  }
  const auto scores = parse_scores(a.scores);
  std::map<std::string, CorrelationRow> table;
  for (const auto& [region, metrics] : per_region)
    table[region] = correlation_table(metrics, scores);
  std::fputs(format_correlation_table(table).c_str(), stdout);
  if (!a.json_out.empty()) write_file_atomic(a.json_out, to_json(table).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- erode

struct ErodeArgs {
  std::string image;
  std::string mask;
  int radius_min = -2;
  int radius_max = 2;
  int shift = 4;
  double rotate = 10.0;
  double fill = 0.0;
  std::string out;
  std::string out_mask;
};

template <std::size_t C>
AugmentSample erode_image(const ErodeArgs& a, const BinaryMask& mask, const AugmentSpec& spec) {
  const auto img = read_png<C>(a.image);
  const auto res = random_augment(img, mask, spec);
  write_png(a.out, res.image);
  if (!a.out_mask.empty()) write_mask_png(a.out_mask, res.mask);
  return res.sample;
}

int run_erode(const ErodeArgs& a) {
  const AugmentSpec spec{a.radius_min, a.radius_max, a.shift, a.rotate, a.fill, g_opts.seed};
  spec.validate();
  const auto mask = read_mask_png(a.mask);
  const auto s = png_is_gray(a.image) ? erode_image<1>(a, mask, spec) : erode_image<3>(a, mask, spec);
  std::printf("radius %d  shift (%d, %d)  rotate %s deg\n", s.radius, s.dx, s.dy,
              fmt_num(s.theta).c_str());
  return 0;
}

// ---------------------------------------------------------------- slice

struct SliceArgs {
  std::string frames;
  std::vector<std::string> compare;
  std::vector<std::string> labels;
  std::size_t column = 0;
  std::size_t band = 1;
  std::string out;
  std::string panels_json;
};

/// frame_%06d.png files of `dir`, in index order; gaps are an error.
std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail_io("no such directory: " + dir.string());
  static const std::regex pattern(R"(frame_(\d{6})\.png)");
  std::map<long, fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) found[std::stol(m[1].str())] = entry.path();
  }
  if (found.empty()) fail_io("no frame_NNNNNN.png files in " + dir.string());
  std::vector<fs::path> out;
  long expect = found.begin()->first;
  for (const auto& [idx, path] : found) {
    if (idx != expect)
      fail_io("non-contiguous frame indices in " + dir.string() + ": missing frame_" +
              std::to_string(expect));
    out.push_back(path);
    ++expect;
  }
  return out;
}

template <std::size_t C>
FrameSequence<C> load_frames(const fs::path& dir) {
  const auto paths = list_frames(dir);
  std::vector<std::optional<Raster<C>>> slots(paths.size());
  parallel_for(paths.size(), g_opts.threads, [&](std::size_t i) { slots[i] = read_png<C>(paths[i]); });
  std::vector<Raster<C>> frames;
  for (auto& s : slots) frames.push_back(std::move(*s));
  return FrameSequence<C>(std::move(frames));
}

template <std::size_t C>
void slice_frames(const SliceArgs& a) {
  if (a.compare.empty()) {
    write_png(a.out, slice_image(load_frames<C>(a.frames), a.column, a.band));
    return;
  }
  std::vector<FrameSequence<C>> seqs;
  seqs.push_back(load_frames<C>(a.frames));
  for (const auto& d : a.compare) seqs.push_back(load_frames<C>(d));
  const auto tri = slice_triptych(seqs, a.labels, a.column, a.band);
  write_png(a.out, tri.image);
  if (!a.panels_json.empty()) {
    nlohmann::json panels = nlohmann::json::array();
    for (const auto& p : tri.panels)
      panels.push_back({{"label", p.label}, {"x_offset", p.x_offset}, {"width", p.width}});
    write_file_atomic(a.panels_json,
                      nlohmann::json{{"column", a.column}, {"band", a.band}, {"marker_row", 0},
                                     {"panels", panels}}
                              .dump(2) +
                          "\n");
  }
}

int run_slice(const SliceArgs& a) {
  if (a.compare.size() > 2) fail_usage("--compare takes at most two directories");
  const auto first = list_frames(a.frames);
  if (png_is_gray(first.front())) slice_frames<1>(a);
  else slice_frames<3>(a);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mskit: motion-jitter metrics, temporal smoothing and diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g_opts.seed, "Random seed for every stochastic step")->capture_default_str();
  app.add_option("--threads", g_opts.threads, "Worker threads (MSKIT_THREADS overrides)")
      ->capture_default_str();
  app.add_option("--log-level", g_opts.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();

  MsiArgs msi_args;
  auto* msi_cmd = app.add_subcommand("msi", "Motion Stability Index of a landmark file");
  msi_cmd->add_option("landmarks", msi_args.landmarks, "Landmark file (.csv or .json)")->required();
  msi_cmd->add_option("--region-map", msi_args.region_map,
                      "Region map JSON {name: [indices], mouth_corners: [l, r]} (default: 68-point iBUG)");
  msi_cmd->add_option("--regions", msi_args.regions, "Comma-separated regions to score (default: all in map)");
  msi_cmd->add_option("--epsilon", msi_args.epsilon, "Regularizer in 1/(sigma + epsilon)")->capture_default_str();
  msi_cmd->add_option("--padding", msi_args.padding, "paper|interior")->capture_default_str();
  msi_cmd->add_option("--crop-ratio", msi_args.crop_ratio, "Mouth width / crop side")->capture_default_str();
  msi_cmd->add_option("--crop-warmup", msi_args.crop_warmup, "Frames averaged to place the crop")
      ->capture_default_str();
  msi_cmd->add_option("--crop-out", msi_args.crop_out, "Normalized frame side in pixels")->capture_default_str();
  msi_cmd->add_option("--mouth-corners", msi_args.corners, "Left and right mouth-corner indices (default 48 54)")
      ->expected(2);
  msi_cmd->add_flag("--assume-normalized", msi_args.assume_normalized,
                    "Input is already in normalized space; skip the crop");
  msi_cmd->add_option("--json", msi_args.json_out, "Write the report as JSON");
  msi_cmd->add_option("--video", msi_args.video, "Video id for the report (default: file stem)");

  SmoothArgs smooth_args;
  auto* smooth_cmd = app.add_subcommand("smooth", "Weighted temporal smoothing of a landmark file");
  smooth_cmd->add_option("landmarks", smooth_args.landmarks, "Landmark file (.csv or .json)")->required();
  smooth_cmd->add_option("--out", smooth_args.out, "Output landmark file (same format as input)")->required();
  smooth_cmd->add_option("--mode", smooth_args.mode, "fixed|global|adaptive")->capture_default_str();
  smooth_cmd->add_option("--model", smooth_args.model, "Trained smoother file (global/adaptive modes)");
  smooth_cmd->add_option("--kernel", smooth_args.kernel, "uniform|gaussian (fixed mode)")->capture_default_str();
  auto* k_opt = smooth_cmd->add_option("--k", smooth_args.k, "Smoothing width K (odd)")->capture_default_str();
  smooth_cmd->add_option("--sigma", smooth_args.sigma, "Gaussian kernel width in frames")->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a global or adaptive smoother on synthetic data");
  train_cmd->add_option("--spec", train_args.spec, "Dataset spec JSON (default: built-in spec)");
  train_cmd->add_option("--regime", train_args.regime, "global|adaptive")->capture_default_str();
  train_cmd->add_option("--lr", train_args.lr, "Gradient-descent learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train_args.epochs, "Full-batch steps")->capture_default_str();
  train_cmd->add_option("--k", train_args.k, "Smoothing width K (odd)")->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "Model file to write")->required();
  train_cmd->add_option("--loss-curve", train_args.loss_curve, "Loss CSV (default: <out>.loss.csv)");

  JitterArgs jitter_args;
  auto* jitter_cmd = app.add_subcommand("jitter", "Inject synthetic jitter into a landmark file");
  jitter_cmd->add_option("landmarks", jitter_args.landmarks, "Landmark file (.csv or .json)")->required();
  jitter_cmd->add_option("--out", jitter_args.out, "Output landmark file")->required();
  jitter_cmd->add_option("--kind", jitter_args.kind, "white|impulse|step")->capture_default_str();
  jitter_cmd->add_option("--sigma", jitter_args.sigma, "White noise std")->capture_default_str();
  jitter_cmd->add_option("--rate", jitter_args.rate, "Impulse probability per frame")->capture_default_str();
  jitter_cmd->add_option("--amplitude", jitter_args.amplitude, "Impulse displacement")->capture_default_str();
  jitter_cmd->add_option("--frame", jitter_args.frame, "First frame of a step")->capture_default_str();
  jitter_cmd->add_option("--dx", jitter_args.dx, "Step offset in x")->capture_default_str();
  jitter_cmd->add_option("--dy", jitter_args.dy, "Step offset in y")->capture_default_str();

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic (clean, jittered) dataset");
  gen_cmd->add_option("--spec", gen_args.spec, "Dataset spec JSON (default: built-in spec)");
  gen_cmd->add_option("--out-dir", gen_args.out_dir, "Output directory")->required();
  gen_cmd->add_option("--format", gen_args.format, "json|csv")->capture_default_str();

  CorrelateArgs corr_args;
  auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlation of MSI statistics with scores");
  corr_cmd->add_option("--reports", corr_args.reports, "MSI report JSON files")->required();
  corr_cmd->add_option("--scores", corr_args.scores, "CSV of video,score")->required();
  corr_cmd->add_option("--json", corr_args.json_out, "Write the table as JSON");

  ErodeArgs erode_args;
  auto* erode_cmd = app.add_subcommand("erode", "Random mask erosion/dilation, shift, rotate and mask-out");
  erode_cmd->add_option("--image", erode_args.image, "Input PNG")->required();
  erode_cmd->add_option("--mask", erode_args.mask, "Mask PNG (0/255)")->required();
  erode_cmd->add_option("--radius-min", erode_args.radius_min, "Smallest radius (negative erodes)")
      ->capture_default_str();
  erode_cmd->add_option("--radius-max", erode_args.radius_max, "Largest radius (positive dilates)")
      ->capture_default_str();
  erode_cmd->add_option("--shift", erode_args.shift, "Shift range in +- pixels")->capture_default_str();
  erode_cmd->add_option("--rotate", erode_args.rotate, "Rotation range in +- degrees")->capture_default_str();
  erode_cmd->add_option("--fill", erode_args.fill, "Fill value in [0, 1]")->capture_default_str();
  erode_cmd->add_option("--out", erode_args.out, "Output PNG")->required();
  erode_cmd->add_option("--out-mask", erode_args.out_mask, "Write the mask actually used");

  SliceArgs slice_args;
  auto* slice_cmd = app.add_subcommand("slice", "Vertical slice through time of a frame directory");
  slice_cmd->add_option("--frames", slice_args.frames, "Directory of frame_NNNNNN.png")->required();
  slice_cmd->add_option("--compare", slice_args.compare,
                        "Up to two more frame directories; output becomes a triptych");
  slice_cmd->add_option("--labels", slice_args.labels, "Panel labels for the triptych");
  slice_cmd->add_option("--column", slice_args.column, "Pixel column to slice")->required();
  slice_cmd->add_option("--band", slice_args.band, "Columns averaged around --column")->capture_default_str();
  slice_cmd->add_option("--out", slice_args.out, "Output PNG")->required();
  slice_cmd->add_option("--panels-json", slice_args.panels_json, "Write triptych panel layout as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    g_opts.seed_given = app.count("--seed") > 0;
    g_opts.threads = resolve_threads(g_opts.threads);
    g_opts.level = g_opts.log_level == "error"  ? LogLevel::error
                   : g_opts.log_level == "warn" ? LogLevel::warn
                   : g_opts.log_level == "info" ? LogLevel::info
                                                : LogLevel::debug;
    smooth_args.k_given = k_opt->count() > 0;
    if (*msi_cmd) return run_msi(msi_args);
    if (*smooth_cmd) return run_smooth(smooth_args);
    if (*train_cmd) return run_train(train_args);
    if (*jitter_cmd) return run_jitter(jitter_args);
    if (*gen_cmd) return run_gen(gen_args);
    if (*corr_cmd) return run_correlate(corr_args);
    if (*erode_cmd) return run_erode(erode_args);
    if (*slice_cmd) return run_slice(slice_args);
  } catch (const Error& e) {
    log(LogLevel::error, e.what());
    return e.kind() == ErrorKind::compute ? 1 : 2;
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return 1;
  }
  return 2;
}
