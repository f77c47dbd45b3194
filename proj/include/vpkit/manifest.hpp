#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpkit/circular.hpp"
#include "vpkit/matrix.hpp"

namespace vpkit {

enum class SampleSource { Real, Synthetic, Glyph };

std::string_view to_string(SampleSource s);
SampleSource parse_source(std::string_view s);

struct GlyphRef {
  double theta_deg = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const GlyphRef&) const = default;
};

/// One labeled sample: either an image file or glyph parameters.
struct ManifestRow {
  std::string sample_id;
  SampleSource source = SampleSource::Glyph;
  std::optional<GlyphRef> glyph;  // set for rendered glyphs
  std::string image_path;         // set otherwise
  double azimuth_deg = 0.0;
  int azimuth_bin = 0;

  bool operator==(const ManifestRow&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  bool operator==(const DatasetManifest&) const = default;
  std::vector<int> labels() const;
  std::vector<double> azimuths() const;

  /// Unique ids, bins in range and consistent with degrees under `space`.
  void validate(const CircularLabelSpace& space) const;
};

inline constexpr std::string_view kManifestHeader = "sample_id,source,path_or_theta,seed,azimuth_deg,azimuth_bin";

/// CSV with header kManifestHeader. A non-empty seed column marks a glyph row,
/// whose path_or_theta is the angle; otherwise path_or_theta is an image path.
void write_manifest(std::ostream& os, const DatasetManifest& m);
DatasetManifest read_manifest(std::istream& is);
void write_manifest_file(const std::filesystem::path& p, const DatasetManifest& m);
DatasetManifest read_manifest_file(const std::filesystem::path& p);

/// Pixel features, one row per sample, values in [0,1]. Glyph rows are rendered
/// at `image_size` (noise on); image rows are loaded as grayscale and must match.
/// Relative image paths resolve against `base_dir`.
Matrix load_features(const DatasetManifest& m, int image_size, const std::filesystem::path& base_dir = {},
                     Exec exec = Exec::Parallel);

}  // namespace vpkit
