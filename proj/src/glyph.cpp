#include "vpkit/glyph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "vpkit/error.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {
namespace {

struct Pt {
  double x, y;
};

// Glyph outline in units of the image side, origin at the image center, y down.
// Vertical arm, horizontal foot, and a V notch cut into the top of the foot.
constexpr std::array<Pt, 9> kOutline{{
    {-0.28, -0.32},
    {-0.12, -0.32},
    {-0.12, 0.14},
    {0.06, 0.14},
    {0.11, 0.20},
    {0.16, 0.14},
    {0.30, 0.14},
    {0.30, 0.30},
    {-0.28, 0.30},
}};

bool inside_outline(double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = kOutline.size() - 1; i < kOutline.size(); j = i++) {
    const Pt& a = kOutline[i];
    const Pt& b = kOutline[j];
    if ((a.y > y) != (b.y > y)) {
      const double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < xc) in = !in;
    }
  }
  return in;
}

}  // namespace

GlyphImage render_glyph(double theta_deg, int size, std::uint64_t seed, GlyphOptions opts) {
  if (size < 16) throw InputError("render_glyph: size must be >= 16, got " + std::to_string(size));
  if (!std::isfinite(theta_deg)) throw InputError("render_glyph: non-finite angle");

  // theta = 90 * quarter + rest with rest in [0, 90); fmod is exact.
  double rest = std::fmod(theta_deg, 90.0);
  if (rest < 0) rest += 90.0;
  const double quarters = std::round((theta_deg - rest) / 90.0);
  const int quarter = static_cast<int>(((static_cast<long long>(quarters) % 4) + 4) % 4);
  const double rad = rest * std::numbers::pi / 180.0;
  const double cr = std::cos(rad);
  const double sr = std::sin(rad);

  const double c = size / 2.0;
  const double inv_size = 1.0 / size;
  constexpr int ss = kGlyphSupersample;

  GlyphImage img;
  img.width = size;
  img.height = size;
  img.theta_deg = theta_deg;
  img.seed = seed;
  img.pixels.resize(static_cast<std::size_t>(size) * size);

  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      int hits = 0;
      for (int b = 0; b < ss; ++b) {
        for (int a = 0; a < ss; ++a) {
          double u = (j + (a + 0.5) / ss) - c;
          double v = (i + (b + 0.5) / ss) - c;
          // Undo the quarter turns exactly: R(-90) maps (u, v) to (v, -u).
          for (int q = 0; q < quarter; ++q) {
            const double t = u;
            u = v;
            v = -t;
          }
          const double gx = (u * cr + v * sr) * inv_size;
          const double gy = (-u * sr + v * cr) * inv_size;
          bool hit = inside_outline(gx, gy);
          if (!hit && opts.symmetric) hit = inside_outline(-gx, -gy);
          hits += hit ? 1 : 0;
        }
      }
      img.pixels[static_cast<std::size_t>(i) * size + j] = 0.1 + 0.8 * hits / double(ss * ss);
    }
  }

  if (opts.noise) {
    Rng rng(derive_seed(seed, "glyph-noise"));
    for (auto& p : img.pixels) {
      p = std::clamp(p + rng.uniform(-kGlyphNoiseAmplitude, kGlyphNoiseAmplitude), 0.0, 1.0);
    }
  }
  return img;
}

std::vector<double> peaked_bin_weights(int classes, std::span<const double> peak_degrees, double concentration,
                                       double floor) {
  const CircularLabelSpace space(classes);
  std::vector<double> w(classes, floor);
  for (int b = 0; b < classes; ++b) {
    const double center = space.bin_to_degrees(b) * std::numbers::pi / 180.0;
    for (double p : peak_degrees) {
      w[b] += std::exp(concentration * (std::cos(center - p * std::numbers::pi / 180.0) - 1.0));
    }
  }
  return w;
}

DatasetManifest make_glyph_dataset(std::size_t n, std::span<const double> bin_weights, std::uint64_t seed,
                                   const GlyphDatasetOptions& opts) {
  if (bin_weights.empty()) throw InputError("glyph dataset: empty label distribution");
  double total = 0.0;
  for (double w : bin_weights) {
    if (w < 0 || !std::isfinite(w)) throw InputError("glyph dataset: weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0)) throw InputError("glyph dataset: label distribution has no mass");
  const CircularLabelSpace space(static_cast<int>(bin_weights.size()));
  const int k = space.size();

  Rng rng(derive_seed(seed, "glyph-dataset"));
  std::vector<int> bins;
  bins.reserve(n);
  if (opts.stratified) {
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (int b = 0; b < k; ++b) {
      const double exact = static_cast<double>(n) * bin_weights[b] / total;
      counts[b] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[b];
      remainders.emplace_back(exact - std::floor(exact), b);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
    for (int b = 0; b < k; ++b) bins.insert(bins.end(), counts[b], b);
  } else {
    std::vector<double> cdf(k);
    double acc = 0.0;
    for (int b = 0; b < k; ++b) cdf[b] = (acc += bin_weights[b] / total);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      bins.push_back(std::min<int>(static_cast<int>(it - cdf.begin()), k - 1));
    }
  }

  DatasetManifest m;
  m.rows.reserve(n);
  const double width = space.bin_width_deg();
  for (std::size_t i = 0; i < n; ++i) {
    double theta = space.bin_to_degrees(bins[i]) + (rng.uniform01() - 0.5) * width;
    theta = std::fmod(theta + 360.0, 360.0);
    ManifestRow row;
    char id[32];
    std::snprintf(id, sizeof id, "-%06zu", i);
    row.sample_id = opts.id_prefix + id;
    row.source = opts.source;
    row.glyph = GlyphRef{theta, rng.next_u64()};
    row.azimuth_deg = theta;
    row.azimuth_bin = space.degrees_to_bin(theta);
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace vpkit
