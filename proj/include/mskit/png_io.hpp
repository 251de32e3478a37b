#pragma once

// 8-bit PNG read/write through libpng's simplified API. Link mskit_png.

#include <png.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "mskit/atomic_file.hpp"
#include "mskit/error.hpp"
#include "mskit/raster.hpp"

namespace mskit {

namespace detail {

template <std::size_t C>
constexpr png_uint_32 png_format() {
  static_assert(C == 1 || C == 3, "only gray and RGB rasters map to PNG");
  return C == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
}

struct PngImage {
  png_image img{};
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace detail

/// True when the file stores a grayscale (possibly gray+alpha) image.
inline bool png_is_gray(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  detail::PngImage p;
  if (!png_image_begin_read_from_memory(&p.img, bytes.data(), bytes.size()))
    fail_io("cannot decode PNG " + path.string() + ": " + p.img.message);
  return (p.img.format & PNG_FORMAT_FLAG_COLOR) == 0;
}

/// Decodes to `C` channels (color images are converted to gray and vice
/// versa by libpng) with values v / 255.
template <std::size_t C>
Raster<C> read_png(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  detail::PngImage p;
  if (!png_image_begin_read_from_memory(&p.img, bytes.data(), bytes.size()))
    fail_io("cannot decode PNG " + path.string() + ": " + p.img.message);
  p.img.format = detail::png_format<C>();
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr))
    fail_io("cannot decode PNG " + path.string() + ": " + p.img.message);
  std::vector<double> px(buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) px[k] = static_cast<double>(buf[k]) / 255.0;
  return Raster<C>(p.img.width, p.img.height, std::move(px));
}

template <std::size_t C>
std::string encode_png(const Raster<C>& image) {
  detail::PngImage p;
  p.img.width = static_cast<png_uint_32>(image.width());
  p.img.height = static_cast<png_uint_32>(image.height());
  p.img.format = detail::png_format<C>();
  std::vector<png_byte> buf(image.pixels().size());
  for (std::size_t k = 0; k < buf.size(); ++k)
    buf[k] = static_cast<png_byte>(std::lround(image.pixels()[k] * 255.0));
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&p.img, nullptr, &size, 0, buf.data(), 0, nullptr))
    fail_io(std::string("PNG encode failed: ") + p.img.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&p.img, out.data(), &size, 0, buf.data(), 0, nullptr))
    fail_io(std::string("PNG encode failed: ") + p.img.message);
  out.resize(size);
  return out;
}

template <std::size_t C>
void write_png(const std::filesystem::path& path, const Raster<C>& image) {
  write_file_atomic(path, encode_png(image));
}

/// Mask PNGs are 0/255 gray; any value above 127 counts as set.
inline BinaryMask read_mask_png(const std::filesystem::path& path) {
  const auto img = read_png<1>(path);
  BinaryMask m(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) m.set(x, y, img.at(x, y) > 127.0 / 255.0);
  return m;
}

inline GrayImage mask_to_image(const BinaryMask& m) {
  GrayImage img(m.width(), m.height());
  for (std::size_t y = 0; y < m.height(); ++y)
    for (std::size_t x = 0; x < m.width(); ++x) img.at(x, y) = m(x, y) ? 1.0 : 0.0;
  return img;
}

inline void write_mask_png(const std::filesystem::path& path, const BinaryMask& m) {
  write_png(path, mask_to_image(m));
}

}  // namespace mskit
