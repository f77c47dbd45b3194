#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpkit/image.hpp"

namespace vpkit {

enum class OcclusionSource { UniformColor, ImageCorpus };

struct AugmentConfig {
  int jpeg_quality = 90;
  double color_cast_prob_per_channel = 0.5;
  int color_cast_range = 20;
  double channel_swap_prob = 0.5;
  double degrade_fraction = 0.25;
  double degrade_target_area = 1024.0;  // pixels^2; see area_percentile()
  double occlusion_fraction = 0.35;
  double occlusion_size_min = 0.2;
  double occlusion_size_max = 0.6;
  OcclusionSource occlusion_source = OcclusionSource::UniformColor;
  std::filesystem::path occlusion_corpus;
  double crop_fraction = 0.6;
  double crop_probability = 0.5;

  void validate() const;
};

struct CropWindow {
  int x = 0, y = 0, width = 0, height = 0;
  bool operator==(const CropWindow&) const = default;
};

struct DegradeRecord {
  double target_area = 0.0;
  int small_width = 0, small_height = 0;
  bool operator==(const DegradeRecord&) const = default;
};

/// Per-channel additive offsets; nullopt where the cast did not fire.
using ColorCastRecord = std::array<std::optional<int>, 3>;

/// Output channel c takes input channel perm[c].
using ChannelPermutation = std::array<int, 3>;

struct OcclusionRecord {
  int x = 0, y = 0, width = 0, height = 0;
  OcclusionSource source = OcclusionSource::UniformColor;
  std::array<std::uint8_t, 3> color{};  // UniformColor fill
  std::string corpus_file;              // ImageCorpus: file name inside the corpus directory
  int patch_x = 0, patch_y = 0;         // ImageCorpus: patch origin in the (possibly upscaled) corpus image
  bool operator==(const OcclusionRecord&) const = default;
};

/// Everything the pipeline did to one image; enough to replay it exactly.
struct AugmentRecord {
  std::optional<CropWindow> crop;
  std::optional<DegradeRecord> degrade;
  std::optional<ColorCastRecord> color_cast;
  std::optional<ChannelPermutation> channel_swap;
  std::optional<OcclusionRecord> occlusion;
  int jpeg_quality = 90;
  bool operator==(const AugmentRecord&) const = default;
};

nlohmann::ordered_json to_json(const AugmentRecord& r);
AugmentRecord augment_record_from_json(const nlohmann::json& j);

/// Bilinear resize on pixel centers, edge-clamped.
RgbImage resize_bilinear(const RgbImage& img, int width, int height);

RgbImage jpeg_roundtrip(const RgbImage& img, int quality);

RgbImage apply_color_cast(const RgbImage& img, const ColorCastRecord& offsets);
RgbImage color_cast(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed,
                    ColorCastRecord* record = nullptr);

RgbImage apply_permutation(const RgbImage& img, const ChannelPermutation& perm);
/// The five non-identity permutations of three channels.
const std::array<ChannelPermutation, 5>& non_identity_permutations();
RgbImage channel_swap(const RgbImage& img, std::uint64_t seed, double probability = 0.5,
                      std::optional<ChannelPermutation>* record = nullptr);

/// Area-averaging downsample to ~target_area (aspect kept), then bilinear back up.
RgbImage degrade(const RgbImage& img, double target_area, DegradeRecord* record = nullptr);
RgbImage apply_degrade(const RgbImage& img, const DegradeRecord& rec);

/// q-th quantile (nearest rank) of bounding-box areas, e.g. q = 0.3.
double area_percentile(std::span<const double> areas, double q);
/// One area per line.
std::vector<double> read_box_areas(const std::filesystem::path& p);

struct OcclusionResult {
  RgbImage image;
  OcclusionRecord record;
};
/// Rectangle sides uniform in [size_min, size_max] of the image sides, placed
/// uniformly. Geometry and fill draw from separate streams, so the rectangle
/// does not depend on the source.
OcclusionResult occlude(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed);
RgbImage apply_occlusion(const RgbImage& img, const OcclusionRecord& rec, const std::filesystem::path& corpus_dir);

RgbImage crop(const RgbImage& img, double fraction, std::uint64_t seed, CropWindow* record = nullptr);
RgbImage apply_crop(const RgbImage& img, const CropWindow& w);

struct AugmentResult {
  RgbImage image;
  AugmentRecord record;
};

/// crop-or-not, degrade, color cast, channel swap, occlusion, JPEG. Each stage
/// draws from its own stream derived from `seed`.
AugmentResult augment_pipeline(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed);

/// Re-applies a record; byte-identical to the pipeline output that produced it.
RgbImage replay(const RgbImage& img, const AugmentRecord& rec, const std::filesystem::path& corpus_dir = {});

}  // namespace vpkit
