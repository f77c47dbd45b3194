#include "vpkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "vpkit/error.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {
namespace {

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

void check_rgb(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.data.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw InputError("augment: expected a non-empty 8-bit RGB image");
  }
}

void check_prob(double p, const char* name) {
  if (!(p >= 0 && p <= 1)) throw InputError(fmt::format("augment: {} must be in [0,1]", name));
}

// Source pixels overlapped by each destination pixel, with overlap lengths.
std::vector<std::vector<std::pair<int, double>>> coverage(int src, int dst) {
  std::vector<std::vector<std::pair<int, double>>> out(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < src && s < hi; ++s) {
      const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (w > 0) out[o].emplace_back(s, w);
    }
  }
  return out;
}

RgbImage area_downsample(const RgbImage& img, int w, int h) {
  const auto cx = coverage(img.width, w);
  const auto cy = coverage(img.height, h);
  RgbImage out(w, h);
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      std::array<double, 3> acc{};
      double total = 0.0;
      for (const auto& [sy, wy] : cy[oy]) {
        for (const auto& [sx, wx] : cx[ox]) {
          const double wgt = wx * wy;
          total += wgt;
          for (int c = 0; c < 3; ++c) acc[c] += wgt * img.at(sx, sy, c);
        }
      }
      for (int c = 0; c < 3; ++c) out.at(ox, oy, c) = to_u8(acc[c] / total);
    }
  }
  return out;
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!dir.empty() && std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path().filename());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("occlusion corpus has no images: " + dir.string());
  return files;
}

RgbImage corpus_image_for(const std::filesystem::path& file, int min_w, int min_h) {
  RgbImage src = read_image(file);
  if (src.width < min_w || src.height < min_h) {
    src = resize_bilinear(src, std::max(src.width, min_w), std::max(src.height, min_h));
  }
  return src;
}

std::string source_name(OcclusionSource s) { return s == OcclusionSource::UniformColor ? "uniform" : "corpus"; }

}  // namespace

void AugmentConfig::validate() const {
  if (jpeg_quality < 1 || jpeg_quality > 100) throw InputError("augment: jpeg_quality must be in [1,100]");
  check_prob(color_cast_prob_per_channel, "color_cast_prob_per_channel");
  check_prob(channel_swap_prob, "channel_swap_prob");
  check_prob(degrade_fraction, "degrade_fraction");
  check_prob(occlusion_fraction, "occlusion_fraction");
  check_prob(crop_probability, "crop_probability");
  if (color_cast_range < 0 || color_cast_range > 255) throw InputError("augment: color_cast_range must be in [0,255]");
  if (!(occlusion_size_min > 0 && occlusion_size_min <= occlusion_size_max && occlusion_size_max < 1)) {
    throw InputError("augment: occlusion size range must lie within (0,1)");
  }
  if (!(crop_fraction > 0 && crop_fraction < 1)) throw InputError("augment: crop_fraction must be in (0,1)");
  if (!(degrade_target_area > 0)) throw InputError("augment: degrade_target_area must be > 0");
}

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
  check_rgb(img);
  if (width <= 0 || height <= 0) throw InputError("resize: bad target size");
  RgbImage out(width, height);
  const double sx_scale = static_cast<double>(img.width) / width;
  const double sy_scale = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(x0, y0, c) * (1 - fx) + img.at(x1, y0, c) * fx;
        const double bot = img.at(x0, y1, c) * (1 - fx) + img.at(x1, y1, c) * fx;
        out.at(x, y, c) = to_u8(top * (1 - fy) + bot * fy);
      }
    }
  }
  return out;
}

RgbImage jpeg_roundtrip(const RgbImage& img, int quality) {
  check_rgb(img);
  return decode_jpeg(encode_jpeg(img, quality));
}

RgbImage apply_color_cast(const RgbImage& img, const ColorCastRecord& offsets) {
  check_rgb(img);
  RgbImage out = img;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const auto& off = offsets[i % 3];
    if (off) out.data[i] = static_cast<std::uint8_t>(std::clamp(out.data[i] + *off, 0, 255));
  }
  return out;
}

RgbImage color_cast(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed, ColorCastRecord* record) {
  Rng rng(seed);
  ColorCastRecord offsets;
  for (auto& o : offsets) {
    if (rng.bernoulli(cfg.color_cast_prob_per_channel)) {
      o = static_cast<int>(rng.uniform_int(-cfg.color_cast_range, cfg.color_cast_range));
    }
  }
  if (record) *record = offsets;
  return apply_color_cast(img, offsets);
}

const std::array<ChannelPermutation, 5>& non_identity_permutations() {
  static const std::array<ChannelPermutation, 5> perms{{{0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  return perms;
}

RgbImage apply_permutation(const RgbImage& img, const ChannelPermutation& perm) {
  check_rgb(img);
  RgbImage out = img;
  for (std::size_t p = 0; p < out.data.size(); p += 3) {
    for (int c = 0; c < 3; ++c) out.data[p + c] = img.data[p + perm[c]];
  }
  return out;
}

RgbImage channel_swap(const RgbImage& img, std::uint64_t seed, double probability,
                      std::optional<ChannelPermutation>* record) {
  check_prob(probability, "channel_swap_prob");
  Rng rng(seed);
  std::optional<ChannelPermutation> perm;
  if (rng.bernoulli(probability)) perm = non_identity_permutations()[rng.below(5)];
  if (record) *record = perm;
  return perm ? apply_permutation(img, *perm) : img;
}

RgbImage apply_degrade(const RgbImage& img, const DegradeRecord& rec) {
  check_rgb(img);
  if (rec.small_width < 1 || rec.small_height < 1) throw InputError("degrade: bad record");
  return resize_bilinear(area_downsample(img, rec.small_width, rec.small_height), img.width, img.height);
}

RgbImage degrade(const RgbImage& img, double target_area, DegradeRecord* record) {
  check_rgb(img);
  const double area = static_cast<double>(img.width) * img.height;
  if (!(target_area > 0) || target_area >= area) {
    throw InputError(fmt::format("degrade: target area {} must be positive and below the source area {}",
                                 target_area, area));
  }
  const double s = std::sqrt(target_area / area);
  DegradeRecord rec;
  rec.target_area = target_area;
  rec.small_width = std::clamp(static_cast<int>(std::lround(img.width * s)), 1, img.width);
  rec.small_height = std::clamp(static_cast<int>(std::lround(img.height * s)), 1, img.height);
  if (rec.small_width == img.width && rec.small_height == img.height) {
    if (img.width >= img.height) --rec.small_width;
    else --rec.small_height;
  }
  if (record) *record = rec;
  return apply_degrade(img, rec);
}

double area_percentile(std::span<const double> areas, double q) {
  if (areas.empty()) throw InputError("area_percentile: no areas");
  if (!(q > 0 && q <= 1)) throw InputError("area_percentile: q must be in (0,1]");
  std::vector<double> v(areas.begin(), areas.end());
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<double> read_box_areas(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot open box-area file " + p.string());
  std::vector<double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw InputError("box-area file: bad line '" + line + "'");
    }
  }
  return out;
}

RgbImage apply_occlusion(const RgbImage& img, const OcclusionRecord& rec, const std::filesystem::path& corpus_dir) {
  check_rgb(img);
  if (rec.x < 0 || rec.y < 0 || rec.width < 1 || rec.height < 1 || rec.x + rec.width > img.width ||
      rec.y + rec.height > img.height) {
    throw InputError("occlusion rectangle outside the image");
  }
  RgbImage out = img;
  if (rec.source == OcclusionSource::UniformColor) {
    for (int y = rec.y; y < rec.y + rec.height; ++y) {
      for (int x = rec.x; x < rec.x + rec.width; ++x) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = rec.color[c];
      }
    }
    return out;
  }
  const RgbImage src = corpus_image_for(corpus_dir / rec.corpus_file, rec.width, rec.height);
  if (rec.patch_x + rec.width > src.width || rec.patch_y + rec.height > src.height) {
    throw InputError("occlusion patch outside the corpus image");
  }
  for (int y = 0; y < rec.height; ++y) {
    for (int x = 0; x < rec.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(rec.x + x, rec.y + y, c) = src.at(rec.patch_x + x, rec.patch_y + y, c);
    }
  }
  return out;
}

OcclusionResult occlude(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed) {
  check_rgb(img);
  Rng geo(derive_seed(seed, "occlude/geometry"));
  auto side = [&](int full) {
    const int lo = std::max(1, static_cast<int>(std::ceil(cfg.occlusion_size_min * full)));
    const int hi = std::max(lo, static_cast<int>(std::floor(cfg.occlusion_size_max * full)));
    return std::clamp(static_cast<int>(std::lround(geo.uniform(cfg.occlusion_size_min, cfg.occlusion_size_max) * full)),
                      lo, std::min(hi, full));
  };
  OcclusionRecord rec;
  rec.width = side(img.width);
  rec.height = side(img.height);
  rec.x = static_cast<int>(geo.uniform_int(0, img.width - rec.width));
  rec.y = static_cast<int>(geo.uniform_int(0, img.height - rec.height));
  rec.source = cfg.occlusion_source;

  Rng fill(derive_seed(seed, "occlude/fill"));
  if (rec.source == OcclusionSource::UniformColor) {
    for (auto& c : rec.color) c = static_cast<std::uint8_t>(fill.below(256));
  } else {
    const auto files = corpus_files(cfg.occlusion_corpus);
    rec.corpus_file = files[fill.below(files.size())].string();
    const RgbImage src = corpus_image_for(cfg.occlusion_corpus / rec.corpus_file, rec.width, rec.height);
    rec.patch_x = static_cast<int>(fill.uniform_int(0, src.width - rec.width));
    rec.patch_y = static_cast<int>(fill.uniform_int(0, src.height - rec.height));
  }
  return {apply_occlusion(img, rec, cfg.occlusion_corpus), rec};
}

RgbImage apply_crop(const RgbImage& img, const CropWindow& w) {
  check_rgb(img);
  if (w.x < 0 || w.y < 0 || w.width < 1 || w.height < 1 || w.x + w.width > img.width || w.y + w.height > img.height) {
    throw InputError("crop window outside the image");
  }
  RgbImage cut(w.width, w.height);
  for (int y = 0; y < w.height; ++y) {
    for (int x = 0; x < w.width; ++x) {
      for (int c = 0; c < 3; ++c) cut.at(x, y, c) = img.at(w.x + x, w.y + y, c);
    }
  }
  return resize_bilinear(cut, img.width, img.height);
}

RgbImage crop(const RgbImage& img, double fraction, std::uint64_t seed, CropWindow* record) {
  check_rgb(img);
  if (!(fraction > 0 && fraction < 1)) throw InputError("crop: fraction must be in (0,1)");
  const double s = std::sqrt(fraction);
  CropWindow w;
  w.width = std::clamp(static_cast<int>(std::lround(img.width * s)), 1, img.width);
  w.height = std::clamp(static_cast<int>(std::lround(img.height * s)), 1, img.height);
  Rng rng(seed);
  w.x = static_cast<int>(rng.uniform_int(0, img.width - w.width));
  w.y = static_cast<int>(rng.uniform_int(0, img.height - w.height));
  if (record) *record = w;
  return apply_crop(img, w);
}

AugmentResult augment_pipeline(const RgbImage& img, const AugmentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  check_rgb(img);
  AugmentResult res;
  RgbImage cur = img;

  {
    Rng rng(derive_seed(seed, "crop"));
    if (rng.bernoulli(cfg.crop_probability)) {
      CropWindow w;
      cur = crop(cur, cfg.crop_fraction, rng.next_u64(), &w);
      res.record.crop = w;
    }
  }
  {
    Rng rng(derive_seed(seed, "degrade"));
    // Images already at or below the target area have nothing to lose.
    const double area = static_cast<double>(cur.width) * cur.height;
    if (rng.bernoulli(cfg.degrade_fraction) && cfg.degrade_target_area < area) {
      DegradeRecord d;
      cur = degrade(cur, cfg.degrade_target_area, &d);
      res.record.degrade = d;
    }
  }
  {
    ColorCastRecord cc;
    cur = color_cast(cur, cfg, derive_seed(seed, "color_cast"), &cc);
    if (cc[0] || cc[1] || cc[2]) res.record.color_cast = cc;
  }
  {
    std::optional<ChannelPermutation> perm;
    cur = channel_swap(cur, derive_seed(seed, "channel_swap"), cfg.channel_swap_prob, &perm);
    res.record.channel_swap = perm;
  }
  {
    Rng rng(derive_seed(seed, "occlude"));
    if (rng.bernoulli(cfg.occlusion_fraction)) {
      auto occ = occlude(cur, cfg, rng.next_u64());
      cur = std::move(occ.image);
      res.record.occlusion = occ.record;
    }
  }
  res.record.jpeg_quality = cfg.jpeg_quality;
  res.image = jpeg_roundtrip(cur, cfg.jpeg_quality);
  return res;
}

RgbImage replay(const RgbImage& img, const AugmentRecord& rec, const std::filesystem::path& corpus_dir) {
  RgbImage cur = img;
  if (rec.crop) cur = apply_crop(cur, *rec.crop);
  if (rec.degrade) cur = apply_degrade(cur, *rec.degrade);
  if (rec.color_cast) cur = apply_color_cast(cur, *rec.color_cast);
  if (rec.channel_swap) cur = apply_permutation(cur, *rec.channel_swap);
  if (rec.occlusion) cur = apply_occlusion(cur, *rec.occlusion, corpus_dir);
  return jpeg_roundtrip(cur, rec.jpeg_quality);
}

nlohmann::ordered_json to_json(const AugmentRecord& r) {
  nlohmann::ordered_json j;
  if (r.crop) j["crop"] = {{"x", r.crop->x}, {"y", r.crop->y}, {"width", r.crop->width}, {"height", r.crop->height}};
  if (r.degrade) {
    j["degrade"] = {{"target_area", r.degrade->target_area},
                    {"small_width", r.degrade->small_width},
                    {"small_height", r.degrade->small_height}};
  }
  if (r.color_cast) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& o : *r.color_cast) {
      if (o) a.push_back(*o);
      else a.push_back(nullptr);
    }
    j["color_cast"] = a;
  }
  if (r.channel_swap) j["channel_swap"] = *r.channel_swap;
  if (r.occlusion) {
    const auto& o = *r.occlusion;
    nlohmann::ordered_json occ{{"x", o.x}, {"y", o.y}, {"width", o.width}, {"height", o.height},
                               {"source", source_name(o.source)}};
    if (o.source == OcclusionSource::UniformColor) {
      occ["color"] = o.color;
    } else {
      occ["corpus_file"] = o.corpus_file;
      occ["patch_x"] = o.patch_x;
      occ["patch_y"] = o.patch_y;
    }
    j["occlusion"] = occ;
  }
  j["jpeg_quality"] = r.jpeg_quality;
  return j;
}

AugmentRecord augment_record_from_json(const nlohmann::json& j) {
  try {
    AugmentRecord r;
    if (j.contains("crop")) {
      const auto& c = j["crop"];
      r.crop = CropWindow{c.at("x").get<int>(), c.at("y").get<int>(), c.at("width").get<int>(), c.at("height").get<int>()};
    }
    if (j.contains("degrade")) {
      const auto& d = j["degrade"];
      r.degrade = DegradeRecord{d.at("target_area").get<double>(), d.at("small_width").get<int>(),
                                d.at("small_height").get<int>()};
    }
    if (j.contains("color_cast")) {
      ColorCastRecord cc;
      const auto& a = j["color_cast"];
      if (!a.is_array() || a.size() != 3) throw InputError("audit: color_cast must have 3 entries");
      for (int c = 0; c < 3; ++c) {
        if (!a[c].is_null()) cc[c] = a[c].get<int>();
      }
      r.color_cast = cc;
    }
    if (j.contains("channel_swap")) r.channel_swap = j["channel_swap"].get<ChannelPermutation>();
    if (j.contains("occlusion")) {
      const auto& o = j["occlusion"];
      OcclusionRecord rec;
      rec.x = o.at("x").get<int>();
      rec.y = o.at("y").get<int>();
      rec.width = o.at("width").get<int>();
      rec.height = o.at("height").get<int>();
      const auto src = o.at("source").get<std::string>();
      if (src == "uniform") {
        rec.source = OcclusionSource::UniformColor;
        rec.color = o.at("color").get<std::array<std::uint8_t, 3>>();
      } else if (src == "corpus") {
        rec.source = OcclusionSource::ImageCorpus;
        rec.corpus_file = o.at("corpus_file").get<std::string>();
        rec.patch_x = o.at("patch_x").get<int>();
        rec.patch_y = o.at("patch_y").get<int>();
      } else {
        throw InputError("audit: unknown occlusion source " + src);
      }
      r.occlusion = rec;
    }
    r.jpeg_quality = j.at("jpeg_quality").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("audit record: ") + e.what());
  }
}

}  // namespace vpkit
