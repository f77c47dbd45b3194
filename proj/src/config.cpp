#include "vpkit/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "vpkit/error.hpp"

namespace vpkit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_as(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw InputError(fmt::format("config: bad value for {}: '{}'", key, v));
  return out;
}

}  // namespace

KeyValues parse_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InputError(fmt::format("config line {}: expected key=value", line_no));
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw InputError(fmt::format("config line {}: empty key", line_no));
    if (!kv.emplace(key, trim(t.substr(eq + 1))).second) {
      throw InputError(fmt::format("config line {}: duplicate key {}", line_no, key));
    }
  }
  return kv;
}

KeyValues read_key_values_file(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot open config " + p.string());
  return parse_key_values(is);
}

void apply_train_config(const KeyValues& kv, TrainConfig& cfg) {
  std::optional<bool> weighted;
  KernelConfig kernel = cfg.kernel.value_or(KernelConfig{});
  bool kernel_touched = false;
  for (const auto& [k, v] : kv) {
    if (k == "classes") cfg.classes = parse_as<int>(k, v);
    else if (k == "learning_rate") cfg.learning_rate = parse_as<double>(k, v);
    else if (k == "epochs") cfg.epochs = parse_as<int>(k, v);
    else if (k == "batch_size") cfg.batch_size = parse_as<int>(k, v);
    else if (k == "seed") cfg.seed = parse_as<std::uint64_t>(k, v);
    else if (k == "hidden_units") cfg.hidden_units = parse_as<int>(k, v);
    else if (k == "blend_ratio") cfg.blend_ratio = parse_as<double>(k, v);
    else if (k == "train_size") cfg.train_size = parse_as<std::size_t>(k, v);
    else if (k == "image_size") cfg.image_size = parse_as<int>(k, v);
    else if (k == "loss") {
      if (v == "sm") weighted = false;
      else if (v == "wsm") weighted = true;
      else throw InputError("config: loss must be sm or wsm");
    } else if (k == "sigma") {
      kernel.sigma = parse_as<double>(k, v);
      kernel_touched = true;
    } else if (k == "variant") {
      if (v == "squared") kernel.variant = KernelVariant::SquaredDistance;
      else if (v == "literal") kernel.variant = KernelVariant::LiteralPaper;
      else throw InputError("config: variant must be squared or literal");
      kernel_touched = true;
    } else if (k == "truncation_radius") {
      kernel.truncation_radius = parse_as<int>(k, v);
      kernel_touched = true;
    } else {
      throw InputError("config: unknown training key " + k);
    }
  }
  if (weighted.value_or(cfg.kernel.has_value() || kernel_touched)) cfg.kernel = kernel;
  else cfg.kernel.reset();
}

void apply_augment_config(const KeyValues& kv, AugmentConfig& cfg) {
  for (const auto& [k, v] : kv) {
    if (k == "jpeg_quality") cfg.jpeg_quality = parse_as<int>(k, v);
    else if (k == "color_cast_prob_per_channel") cfg.color_cast_prob_per_channel = parse_as<double>(k, v);
    else if (k == "color_cast_range") cfg.color_cast_range = parse_as<int>(k, v);
    else if (k == "channel_swap_prob") cfg.channel_swap_prob = parse_as<double>(k, v);
    else if (k == "degrade_fraction") cfg.degrade_fraction = parse_as<double>(k, v);
    else if (k == "degrade_target_area") cfg.degrade_target_area = parse_as<double>(k, v);
    else if (k == "occlusion_fraction") cfg.occlusion_fraction = parse_as<double>(k, v);
    else if (k == "occlusion_size_min") cfg.occlusion_size_min = parse_as<double>(k, v);
    else if (k == "occlusion_size_max") cfg.occlusion_size_max = parse_as<double>(k, v);
    else if (k == "occlusion_source") {
      if (v == "uniform") cfg.occlusion_source = OcclusionSource::UniformColor;
      else if (v == "corpus") cfg.occlusion_source = OcclusionSource::ImageCorpus;
      else throw InputError("config: occlusion_source must be uniform or corpus");
    } else if (k == "occlusion_corpus") cfg.occlusion_corpus = v;
    else if (k == "crop_fraction") cfg.crop_fraction = parse_as<double>(k, v);
    else if (k == "crop_probability") cfg.crop_probability = parse_as<double>(k, v);
    else throw InputError("config: unknown augment key " + k);
  }
  cfg.validate();
}

}  // namespace vpkit
