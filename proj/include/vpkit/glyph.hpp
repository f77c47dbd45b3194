#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vpkit/manifest.hpp"

namespace vpkit {

struct GlyphOptions {
  bool noise = true;       // uniform pixel noise of amplitude 0.05
  bool symmetric = false;  // add the 180-degree copy, reintroducing front/back ambiguity
};

/// Grayscale image in [0,1], row-major, with its ground-truth azimuth.
struct GlyphImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  double theta_deg = 0.0;
  std::uint64_t seed = 0;

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

inline constexpr int kGlyphSupersample = 4;
inline constexpr double kGlyphNoiseAmplitude = 0.05;

/// Rasterizes an L-shaped polygon with a notched arm, rotated clockwise (in
/// image coordinates, y down) by theta about the image center. Quarter turns
/// are applied exactly, so image(theta + 90) is the grid rotation of image(theta)
/// when noise is off. Throws InputError for size < 16.
GlyphImage render_glyph(double theta_deg, int size, std::uint64_t seed, GlyphOptions opts = {});

struct GlyphDatasetOptions {
  bool stratified = false;  // deterministic per-bin counts by largest remainder
  SampleSource source = SampleSource::Glyph;
  std::string id_prefix = "g";
};

/// n glyph samples whose bins follow `bin_weights` (length K). Angles are
/// uniform within the chosen bin. Throws InputError for an empty or all-zero
/// weight vector.
DatasetManifest make_glyph_dataset(std::size_t n, std::span<const double> bin_weights, std::uint64_t seed,
                                   const GlyphDatasetOptions& opts = {});

/// Mixture of circular bumps at `peak_degrees` over K bins, plus a small floor;
/// produces canonical-view style histograms.
std::vector<double> peaked_bin_weights(int classes, std::span<const double> peak_degrees, double concentration,
                                       double floor = 0.02);

}  // namespace vpkit
