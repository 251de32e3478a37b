#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mskit/png_io.hpp"

using namespace mskit;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("mskit_png_" + std::to_string(::getpid()) + "_" + name);
}

template <std::size_t C>
Raster<C> random_8bit(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<double> px(w * h * C);
  for (double& v : px) v = d(rng) / 255.0;
  return Raster<C>(w, h, px);
}

}  // namespace

TEST(PngIo, GrayRoundTripOn8BitValues) {
  const auto img = random_8bit<1>(13, 7, 1);
  const auto path = temp_path("g.png");
  write_png(path, img);
  EXPECT_TRUE(png_is_gray(path));
  EXPECT_EQ(read_png<1>(path), img);
  fs::remove(path);
}

TEST(PngIo, RgbRoundTripOn8BitValues) {
  const auto img = random_8bit<3>(5, 9, 2);
  const auto path = temp_path("c.png");
  write_png(path, img);
  EXPECT_FALSE(png_is_gray(path));
  EXPECT_EQ(read_png<3>(path), img);
  fs::remove(path);
}

TEST(PngIo, MaskRoundTrip) {
  BinaryMask m(6, 4);
  m.set(1, 2, true);
  m.set(5, 0, true);
  const auto path = temp_path("m.png");
  write_mask_png(path, m);
  EXPECT_EQ(read_mask_png(path), m);
  fs::remove(path);
}

TEST(PngIo, GarbageIsIoError) {
  const auto path = temp_path("bad.png");
  std::ofstream(path) << "not a png";
  try {
    read_png<1>(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  fs::remove(path);
  EXPECT_THROW(read_png<1>(temp_path("missing.png")), Error);
}
