#include "vpkit/manifest.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "vpkit/error.hpp"
#include "vpkit/glyph.hpp"
#include "vpkit/image.hpp"

namespace vpkit {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InputError(fmt::format("manifest line {}: bad {} '{}'", line_no, what, s));
  }
  return v;
}

}  // namespace

std::string_view to_string(SampleSource s) {
  switch (s) {
    case SampleSource::Real: return "real";
    case SampleSource::Synthetic: return "synthetic";
    case SampleSource::Glyph: return "glyph";
  }
  return "glyph";
}

SampleSource parse_source(std::string_view s) {
  if (s == "real") return SampleSource::Real;
  if (s == "synthetic") return SampleSource::Synthetic;
  if (s == "glyph") return SampleSource::Glyph;
  throw InputError(fmt::format("unknown sample source '{}'", s));
}

std::vector<int> DatasetManifest::labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.azimuth_bin);
  return out;
}

std::vector<double> DatasetManifest::azimuths() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.azimuth_deg);
  return out;
}

void DatasetManifest::validate(const CircularLabelSpace& space) const {
  std::unordered_set<std::string> ids;
  for (const auto& r : rows) {
    if (!ids.insert(r.sample_id).second) throw InputError("manifest: duplicate sample_id " + r.sample_id);
    if (r.azimuth_bin < 0 || r.azimuth_bin >= space.size()) {
      throw InputError(fmt::format("manifest: {} has bin {} outside K={}", r.sample_id, r.azimuth_bin, space.size()));
    }
    if (space.degrees_to_bin(r.azimuth_deg) != r.azimuth_bin) {
      throw InputError(fmt::format("manifest: {} bin {} inconsistent with {} deg at K={}", r.sample_id,
                                   r.azimuth_bin, r.azimuth_deg, space.size()));
    }
  }
}

void write_manifest(std::ostream& os, const DatasetManifest& m) {
  os << kManifestHeader << '\n';
  for (const auto& r : m.rows) {
    if (r.sample_id.find(',') != std::string::npos || r.image_path.find(',') != std::string::npos) {
      throw InputError("manifest: commas are not allowed in ids or paths");
    }
    if (r.glyph) {
      os << fmt::format("{},{},{},{},{},{}\n", r.sample_id, to_string(r.source), r.glyph->theta_deg, r.glyph->seed,
                        r.azimuth_deg, r.azimuth_bin);
    } else {
      os << fmt::format("{},{},{},,{},{}\n", r.sample_id, to_string(r.source), r.image_path, r.azimuth_deg,
                        r.azimuth_bin);
    }
  }
}

DatasetManifest read_manifest(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("manifest: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) throw InputError("manifest: unexpected header '" + line + "'");
  DatasetManifest m;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw InputError(fmt::format("manifest line {}: expected 6 fields", line_no));
    ManifestRow r;
    r.sample_id = std::string(f[0]);
    if (r.sample_id.empty()) throw InputError(fmt::format("manifest line {}: empty sample_id", line_no));
    r.source = parse_source(f[1]);
    if (!f[3].empty()) {
      r.glyph = GlyphRef{parse_number<double>(f[2], "theta", line_no), parse_number<std::uint64_t>(f[3], "seed", line_no)};
    } else {
      r.image_path = std::string(f[2]);
    }
    r.azimuth_deg = parse_number<double>(f[4], "azimuth_deg", line_no);
    r.azimuth_bin = parse_number<int>(f[5], "azimuth_bin", line_no);
    if (!std::isfinite(r.azimuth_deg)) throw InputError(fmt::format("manifest line {}: non-finite angle", line_no));
    m.rows.push_back(std::move(r));
  }
  return m;
}

void write_manifest_file(const std::filesystem::path& p, const DatasetManifest& m) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  write_manifest(os, m);
}

DatasetManifest read_manifest_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InputError("cannot open manifest " + p.string());
  return read_manifest(is);
}

Matrix load_features(const DatasetManifest& m, int image_size, const std::filesystem::path& base_dir, Exec exec) {
  if (image_size < 16) throw InputError("image size must be >= 16");
  const std::size_t dim = static_cast<std::size_t>(image_size) * image_size;
  Matrix x(m.size(), dim);
  // Image files first, serially (I/O and error reporting); glyphs render in parallel.
  for (std::size_t n = 0; n < m.size(); ++n) {
    const auto& r = m.rows[n];
    if (r.glyph) continue;
    const auto path = base_dir.empty() || std::filesystem::path(r.image_path).is_absolute()
                          ? std::filesystem::path(r.image_path)
                          : base_dir / r.image_path;
    const RgbImage img = read_image(path);
    if (img.width != image_size || img.height != image_size) {
      throw InputError(fmt::format("{}: image is {}x{}, expected {}x{}", path.string(), img.width, img.height,
                                   image_size, image_size));
    }
    auto row = x.row(n);
    for (std::size_t i = 0; i < dim; ++i) {
      row[i] = (img.data[i * 3] + img.data[i * 3 + 1] + img.data[i * 3 + 2]) / (3.0 * 255.0);
    }
  }
  const auto rows = static_cast<std::int64_t>(m.size());
  auto render = [&](std::int64_t n) {
    const auto& r = m.rows[static_cast<std::size_t>(n)];
    if (!r.glyph) return;
    const GlyphImage g = render_glyph(r.glyph->theta_deg, image_size, r.glyph->seed);
    std::copy(g.pixels.begin(), g.pixels.end(), x.row(static_cast<std::size_t>(n)).begin());
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t n = 0; n < rows; ++n) render(n);
  } else {
    for (std::int64_t n = 0; n < rows; ++n) render(n);
  }
  return x;
}

}  // namespace vpkit
