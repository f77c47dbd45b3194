#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vpkit {

enum class QualityTier { SimpleMaterialAmbient, ComplexMaterialAmbient, ComplexMaterialDirectional };

std::string_view to_string(QualityTier t);
QualityTier parse_quality_tier(std::string_view s);

inline constexpr std::array<int, 5> kCameraElevations{-5, 0, 10, 20, 30};
inline constexpr int kViewsPerModel = 360 * static_cast<int>(kCameraElevations.size());

// Sampling ranges for directional-light jobs.
inline constexpr double kLightElevationMin = 10.0;
inline constexpr double kLightElevationMax = 80.0;
inline constexpr double kLuminousPowerMin = 1400.0;
inline constexpr double kLuminousPowerMax = 10000.0;
inline constexpr double kFStopMin = 2.7;
inline constexpr double kFStopMax = 8.3;
inline constexpr double kShutterMin = 1.0 / 200.0;
inline constexpr double kShutterMax = 1.0 / 25.0;
inline constexpr double kVignettingRate = 0.25;

struct View {
  int azimuth_deg = 0;
  int elevation_deg = 0;
  bool operator==(const View&) const = default;
};

struct TemperatureProfile {
  std::string name;
  double kelvin;
  std::array<double, 3> rgb_gain;  // normalized so the largest channel is 1
};

/// Fixed table of 9 light temperature profiles, ~1900 K to 10000 K. Gains are
/// Planck spectral radiance sampled at 610/550/465 nm, normalized by the max.
const std::vector<TemperatureProfile>& temperature_profile_table();

/// One complete render request. Ambient tiers carry no directional light:
/// the light fields are nullopt and serialize as null.
struct RenderJobSpec {
  std::string model_id;
  int azimuth_deg = 0;
  int elevation_deg = 0;
  std::optional<double> light_azimuth_deg;
  std::optional<double> light_elevation_deg;
  std::optional<double> luminous_power_lm;
  std::optional<std::string> temperature_profile;
  double f_stop = 0.0;
  double shutter_s = 0.0;
  bool vignetting = false;
  std::string background_patch_id;
  QualityTier quality_tier = QualityTier::ComplexMaterialDirectional;
  std::uint64_t seed = 0;
  std::optional<double> sphere_radius;  // opaque passthrough

  bool operator==(const RenderJobSpec&) const = default;
};

struct JobOptions {
  double power_multiplier = 1.0;        // per-model luminous power scale
  std::uint32_t background_pool = 10000;  // background patches to choose from
  std::optional<double> sphere_radius;
};

/// 360 azimuths x 5 elevations, azimuth-major: (0,-5), (0,0), ..., (359,30).
std::vector<View> enumerate_views(std::string_view model_id);

/// Samples every parameter from `seed`. All draws happen regardless of tier, so
/// tiers differ only in which light fields are blanked.
RenderJobSpec sample_job(std::string_view model_id, View view, QualityTier tier, std::uint64_t seed,
                         const JobOptions& opts = {});

/// Per-job seed derived from the root seed, model id and view.
std::uint64_t job_seed(std::uint64_t root_seed, std::string_view model_id, View view);

struct ModelSplit {
  std::vector<std::string> train_model_ids;
  std::vector<std::string> test_model_ids;
};

/// Holds out model_ids[holdout_index]; the rest train, in input order.
ModelSplit make_split(const std::vector<std::string>& model_ids, std::size_t holdout_index);

nlohmann::ordered_json to_json(const RenderJobSpec& s);
RenderJobSpec job_from_json(const nlohmann::json& j);
/// One compact JSON object per line.
void write_jobs_jsonl(std::ostream& os, const std::vector<RenderJobSpec>& jobs);
std::vector<RenderJobSpec> read_jobs_jsonl(std::istream& is);

/// Streams every job for every model (models in order, views in enumerate order).
void generate_jobs(std::ostream& os, const std::vector<std::string>& model_ids, QualityTier tier,
                   std::uint64_t root_seed, const std::map<std::string, double>& power_multipliers = {},
                   std::optional<double> sphere_radius = {});

}  // namespace vpkit
