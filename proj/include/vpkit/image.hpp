#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vpkit {

/// 8-bit interleaved RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  bool operator==(const RgbImage&) const = default;
};

/// Grayscale [0,1] pixels to RGB, rounding to the nearest level.
RgbImage gray_to_rgb(int width, int height, std::span<const double> gray);

// PNG through libpng, JPEG through libjpeg. Gray and RGBA inputs are expanded
// or flattened to RGB. All throw InputError on unreadable files.
RgbImage read_png(const std::filesystem::path& p);
void write_png(const std::filesystem::path& p, const RgbImage& img);
void write_png_gray(const std::filesystem::path& p, int width, int height, std::span<const std::uint8_t> gray);
RgbImage read_jpeg(const std::filesystem::path& p);
/// Dispatch on extension (.png, .jpg, .jpeg; case-insensitive).
RgbImage read_image(const std::filesystem::path& p);
bool is_image_file(const std::filesystem::path& p);

/// Baseline JPEG in memory, 4:4:4 sampling and the floating-point DCT.
std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality);
RgbImage decode_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace vpkit
