#include "vpkit/rendergen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "vpkit/error.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {
namespace {

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Planck spectral radiance up to a constant factor; wavelength in metres.
double planck(double wavelength_m, double kelvin) {
  constexpr double c2 = 1.438776877e-2;  // second radiation constant, m*K
  return 1.0 / (std::pow(wavelength_m, 5) * std::expm1(c2 / (wavelength_m * kelvin)));
}

TemperatureProfile make_profile(std::string name, double kelvin) {
  const std::array<double, 3> lambda{610e-9, 550e-9, 465e-9};
  std::array<double, 3> g{};
  for (int c = 0; c < 3; ++c) g[c] = planck(lambda[c], kelvin);
  const double m = *std::max_element(g.begin(), g.end());
  for (auto& v : g) v /= m;
  return {std::move(name), kelvin, g};
}

template <typename T>
std::optional<T> opt_field(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

}  // namespace

std::string_view to_string(QualityTier t) {
  switch (t) {
    case QualityTier::SimpleMaterialAmbient: return "SimpleMaterialAmbient";
    case QualityTier::ComplexMaterialAmbient: return "ComplexMaterialAmbient";
    case QualityTier::ComplexMaterialDirectional: return "ComplexMaterialDirectional";
  }
  return "ComplexMaterialDirectional";
}

QualityTier parse_quality_tier(std::string_view s) {
  if (s == "SimpleMaterialAmbient" || s == "simple") return QualityTier::SimpleMaterialAmbient;
  if (s == "ComplexMaterialAmbient" || s == "complex-ambient") return QualityTier::ComplexMaterialAmbient;
  if (s == "ComplexMaterialDirectional" || s == "complex-directional") return QualityTier::ComplexMaterialDirectional;
  throw InputError(fmt::format("unknown quality tier '{}'", s));
}

const std::vector<TemperatureProfile>& temperature_profile_table() {
  static const std::vector<TemperatureProfile> table{
      make_profile("candle_flame", 1900.0),     make_profile("tungsten_bulb", 2700.0),
      make_profile("halogen", 3200.0),          make_profile("fluorescent_white", 4000.0),
      make_profile("horizon_daylight", 5000.0), make_profile("midday_sun", 5500.0),
      make_profile("electronic_flash", 6000.0), make_profile("overcast_sky", 6500.0),
      make_profile("blue_sky_shade", 10000.0),
  };
  return table;
}

std::vector<View> enumerate_views(std::string_view model_id) {
  if (model_id.empty()) throw InputError("enumerate_views: empty model id");
  std::vector<View> views;
  views.reserve(kViewsPerModel);
  for (int az = 0; az < 360; ++az) {
    for (int el : kCameraElevations) views.push_back({az, el});
  }
  return views;
}

std::uint64_t job_seed(std::uint64_t root_seed, std::string_view model_id, View view) {
  return derive_seed(root_seed, fmt::format("job/{}/{}/{}", model_id, view.azimuth_deg, view.elevation_deg));
}

RenderJobSpec sample_job(std::string_view model_id, View view, QualityTier tier, std::uint64_t seed,
                         const JobOptions& opts) {
  if (model_id.empty()) throw InputError("sample_job: empty model id");
  if (!(opts.power_multiplier > 0)) throw InputError("sample_job: power multiplier must be > 0");
  if (opts.background_pool == 0) throw InputError("sample_job: empty background pool");
  if (std::find(kCameraElevations.begin(), kCameraElevations.end(), view.elevation_deg) == kCameraElevations.end() ||
      view.azimuth_deg < 0 || view.azimuth_deg >= 360) {
    throw InputError("sample_job: view outside the camera rings");
  }

  Rng rng(seed);
  // Directed light uniform over the spherical band: sin(elevation) is uniform.
  const double light_az = rng.uniform01() * 360.0;
  const double z = rng.uniform(std::sin(deg2rad(kLightElevationMin)), std::sin(deg2rad(kLightElevationMax)));
  const double light_el =
      std::clamp(std::asin(z) * 180.0 / std::numbers::pi, kLightElevationMin, kLightElevationMax);
  const double power = rng.uniform(kLuminousPowerMin, kLuminousPowerMax) * opts.power_multiplier;
  const auto& profiles = temperature_profile_table();
  const auto profile = rng.below(profiles.size());
  const double f_stop = rng.uniform(kFStopMin, kFStopMax);
  const double shutter = rng.uniform(kShutterMin, kShutterMax);
  const bool vignetting = rng.bernoulli(kVignettingRate);
  const auto background = rng.below(opts.background_pool);

  RenderJobSpec s;
  s.model_id = std::string(model_id);
  s.azimuth_deg = view.azimuth_deg;
  s.elevation_deg = view.elevation_deg;
  if (tier == QualityTier::ComplexMaterialDirectional) {
    s.light_azimuth_deg = light_az;
    s.light_elevation_deg = light_el;
    s.luminous_power_lm = power;
    s.temperature_profile = profiles[profile].name;
  }
  s.f_stop = f_stop;
  s.shutter_s = shutter;
  s.vignetting = vignetting;
  s.background_patch_id = fmt::format("bg_{:06d}", background);
  s.quality_tier = tier;
  s.seed = seed;
  s.sphere_radius = opts.sphere_radius;
  return s;
}

ModelSplit make_split(const std::vector<std::string>& model_ids, std::size_t holdout_index) {
  if (model_ids.size() < 2) throw InputError("make_split: need at least 2 models");
  if (holdout_index >= model_ids.size()) {
    throw InputError(fmt::format("make_split: holdout index {} out of range for {} models", holdout_index,
                                 model_ids.size()));
  }
  std::set<std::string> seen;
  for (const auto& id : model_ids) {
    if (id.empty()) throw InputError("make_split: empty model id");
    if (!seen.insert(id).second) throw InputError("make_split: duplicate model id " + id);
  }
  ModelSplit split;
  for (std::size_t i = 0; i < model_ids.size(); ++i) {
    (i == holdout_index ? split.test_model_ids : split.train_model_ids).push_back(model_ids[i]);
  }
  return split;
}

nlohmann::ordered_json to_json(const RenderJobSpec& s) {
  nlohmann::ordered_json j;
  j["model_id"] = s.model_id;
  j["azimuth_deg"] = s.azimuth_deg;
  j["elevation_deg"] = s.elevation_deg;
  auto opt = [&j](const char* key, const auto& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
  };
  opt("light_azimuth_deg", s.light_azimuth_deg);
  opt("light_elevation_deg", s.light_elevation_deg);
  opt("luminous_power_lm", s.luminous_power_lm);
  opt("temperature_profile", s.temperature_profile);
  j["f_stop"] = s.f_stop;
  j["shutter_s"] = s.shutter_s;
  j["vignetting"] = s.vignetting;
  j["background_patch_id"] = s.background_patch_id;
  j["quality_tier"] = std::string(to_string(s.quality_tier));
  j["seed"] = s.seed;
  opt("sphere_radius", s.sphere_radius);
  return j;
}

RenderJobSpec job_from_json(const nlohmann::json& j) {
  try {
    RenderJobSpec s;
    s.model_id = j.at("model_id").get<std::string>();
    s.azimuth_deg = j.at("azimuth_deg").get<int>();
    s.elevation_deg = j.at("elevation_deg").get<int>();
    s.light_azimuth_deg = opt_field<double>(j, "light_azimuth_deg");
    s.light_elevation_deg = opt_field<double>(j, "light_elevation_deg");
    s.luminous_power_lm = opt_field<double>(j, "luminous_power_lm");
    s.temperature_profile = opt_field<std::string>(j, "temperature_profile");
    s.f_stop = j.at("f_stop").get<double>();
    s.shutter_s = j.at("shutter_s").get<double>();
    s.vignetting = j.at("vignetting").get<bool>();
    s.background_patch_id = j.at("background_patch_id").get<std::string>();
    s.quality_tier = parse_quality_tier(j.at("quality_tier").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.sphere_radius = opt_field<double>(j, "sphere_radius");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("job spec: ") + e.what());
  }
}

void write_jobs_jsonl(std::ostream& os, const std::vector<RenderJobSpec>& jobs) {
  for (const auto& s : jobs) os << to_json(s).dump() << '\n';
}

std::vector<RenderJobSpec> read_jobs_jsonl(std::istream& is) {
  std::vector<RenderJobSpec> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("job spec: ") + e.what());
    }
    out.push_back(job_from_json(j));
  }
  return out;
}

void generate_jobs(std::ostream& os, const std::vector<std::string>& model_ids, QualityTier tier,
                   std::uint64_t root_seed, const std::map<std::string, double>& power_multipliers,
                   std::optional<double> sphere_radius) {
  // Checked up front so a bad list leaves no partial output.
  std::set<std::string> seen;
  for (const auto& id : model_ids) {
    if (!seen.insert(id).second) throw InputError("duplicate model id " + id);
  }
  for (const auto& id : model_ids) {
    JobOptions opts;
    opts.sphere_radius = sphere_radius;
    if (const auto it = power_multipliers.find(id); it != power_multipliers.end()) opts.power_multiplier = it->second;
    for (const View& v : enumerate_views(id)) {
      os << to_json(sample_job(id, v, tier, job_seed(root_seed, id, v), opts)).dump() << '\n';
    }
  }
}

}  // namespace vpkit
