#include "vpkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "vpkit/error.hpp"

namespace vpkit {
namespace {

void check_bins(int bins) {
  if (bins < 1 || 360 % bins != 0) throw InputError(fmt::format("bin count {} must divide 360", bins));
}

double normalize_deg(double t) {
  t = std::fmod(t, 360.0);
  return t < 0 ? t + 360.0 : t;
}

double parse_double(const std::string& s, const std::string& key) {
  if (s == "nan") return std::nan("");
  double v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw InputError("report: bad value for " + key + ": " + s);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

double circular_error_deg(double a, double b) {
  const double d = normalize_deg(a - b);
  return std::min(d, 360.0 - d);
}

double median_angular_error(std::span<const double> pred_deg, std::span<const double> gt_deg) {
  if (pred_deg.size() != gt_deg.size()) throw InputError("median_angular_error: length mismatch");
  if (pred_deg.empty()) throw InputError("median_angular_error: empty input");
  std::vector<double> err(pred_deg.size());
  for (std::size_t i = 0; i < err.size(); ++i) err[i] = circular_error_deg(pred_deg[i], gt_deg[i]);
  std::sort(err.begin(), err.end());
  const std::size_t n = err.size();
  return n % 2 ? err[n / 2] : 0.5 * (err[n / 2 - 1] + err[n / 2]);
}

int range_bin(double theta_deg, int bins) {
  check_bins(bins);
  const double width = 360.0 / bins;
  const int b = static_cast<int>(std::floor(normalize_deg(theta_deg) / width));
  return std::clamp(b, 0, bins - 1);
}

std::vector<std::optional<double>> accuracy_by_bin(std::span<const double> pred_deg, std::span<const double> gt_deg,
                                                   int bins, double correct_within) {
  check_bins(bins);
  if (pred_deg.size() != gt_deg.size()) throw InputError("accuracy_by_bin: length mismatch");
  std::vector<std::size_t> hits(bins, 0), counts(bins, 0);
  for (std::size_t i = 0; i < gt_deg.size(); ++i) {
    const int b = range_bin(gt_deg[i], bins);
    ++counts[b];
    if (circular_error_deg(pred_deg[i], gt_deg[i]) <= correct_within) ++hits[b];
  }
  std::vector<std::optional<double>> acc(bins);
  for (int b = 0; b < bins; ++b) {
    if (counts[b]) acc[b] = static_cast<double>(hits[b]) / static_cast<double>(counts[b]);
  }
  return acc;
}

std::vector<std::optional<double>> accuracy_by_bin(std::span<const int> pred_bins, const CircularLabelSpace& space,
                                                   std::span<const double> gt_deg, int bins, double correct_within) {
  std::vector<double> pred(pred_bins.size());
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = space.bin_to_degrees(pred_bins[i]);
  return accuracy_by_bin(pred, gt_deg, bins, correct_within);
}

double accuracy_entropy(std::span<const std::optional<double>> per_bin_accuracy) {
  double total = 0.0;
  for (const auto& a : per_bin_accuracy) {
    if (!a) continue;
    if (*a < 0 || !std::isfinite(*a)) throw InputError("accuracy_entropy: accuracies must be non-negative");
    total += *a;
  }
  if (!(total > 0)) throw InputError("accuracy_entropy: all accuracies are zero");
  double h = 0.0;
  for (const auto& a : per_bin_accuracy) {
    if (!a || *a == 0.0) continue;
    const double q = *a / total;
    h -= q * std::log(q);
  }
  return h;
}

double accuracy_entropy(std::span<const double> per_bin_accuracy) {
  std::vector<std::optional<double>> v(per_bin_accuracy.begin(), per_bin_accuracy.end());
  return accuracy_entropy(v);
}

std::vector<std::size_t> label_histogram(const DatasetManifest& m, int bins) {
  check_bins(bins);
  std::vector<std::size_t> h(bins, 0);
  for (const auto& r : m.rows) ++h[range_bin(r.azimuth_deg, bins)];
  return h;
}

EvalReport evaluate(std::span<const double> pred_deg, std::span<const double> gt_deg, int bins,
                    double correct_within) {
  EvalReport r;
  r.median_angular_error_deg = median_angular_error(pred_deg, gt_deg);
  r.per_bin_accuracy = accuracy_by_bin(pred_deg, gt_deg, bins, correct_within);
  r.per_bin_count.assign(bins, 0);
  for (double g : gt_deg) ++r.per_bin_count[range_bin(g, bins)];
  r.n_evaluated = gt_deg.size();
  r.correct_within_deg = correct_within;
  const bool any_positive = std::any_of(r.per_bin_accuracy.begin(), r.per_bin_accuracy.end(),
                                        [](const auto& a) { return a && *a > 0; });
  if (any_positive) r.accuracy_entropy = accuracy_entropy(r.per_bin_accuracy);
  return r;
}

void write_report_text(std::ostream& os, const EvalReport& r) {
  if (!r.label.empty()) os << "label=" << r.label << '\n';
  os << fmt::format("n_evaluated={}\n", r.n_evaluated);
  os << fmt::format("median_angular_error_deg={}\n", r.median_angular_error_deg);
  os << "accuracy_entropy=" << (r.accuracy_entropy ? fmt::format("{}", *r.accuracy_entropy) : "nan") << '\n';
  os << fmt::format("bins={}\n", r.per_bin_accuracy.size());
  os << fmt::format("correct_within_deg={}\n", r.correct_within_deg);
  os << "per_bin_count=";
  for (std::size_t b = 0; b < r.per_bin_count.size(); ++b) os << (b ? "," : "") << r.per_bin_count[b];
  os << "\nper_bin_accuracy=";
  for (std::size_t b = 0; b < r.per_bin_accuracy.size(); ++b) {
    if (b) os << ',';
    if (r.per_bin_accuracy[b]) os << fmt::format("{}", *r.per_bin_accuracy[b]);
  }
  os << '\n';
}

EvalReport read_report_text(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("report: expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw InputError("report: missing key " + k);
    return it->second;
  };
  EvalReport r;
  if (kv.count("label")) r.label = kv["label"];
  r.n_evaluated = static_cast<std::size_t>(parse_double(need("n_evaluated"), "n_evaluated"));
  r.median_angular_error_deg = parse_double(need("median_angular_error_deg"), "median_angular_error_deg");
  const double h = parse_double(need("accuracy_entropy"), "accuracy_entropy");
  if (!std::isnan(h)) r.accuracy_entropy = h;
  r.correct_within_deg = parse_double(need("correct_within_deg"), "correct_within_deg");
  const int bins = static_cast<int>(parse_double(need("bins"), "bins"));
  for (const auto& c : split(need("per_bin_count"), ',')) {
    r.per_bin_count.push_back(static_cast<std::size_t>(parse_double(c, "per_bin_count")));
  }
  for (const auto& a : split(need("per_bin_accuracy"), ',')) {
    if (a.empty()) r.per_bin_accuracy.emplace_back();
    else r.per_bin_accuracy.emplace_back(parse_double(a, "per_bin_accuracy"));
  }
  if (static_cast<int>(r.per_bin_accuracy.size()) != bins || static_cast<int>(r.per_bin_count.size()) != bins) {
    throw InputError("report: per-bin vectors do not match bins");
  }
  return r;
}

void write_per_bin_csv(std::ostream& os, const EvalReport& r) {
  const int bins = static_cast<int>(r.per_bin_accuracy.size());
  const double width = bins ? 360.0 / bins : 0.0;
  os << "bin,range_start_deg,range_end_deg,count,accuracy\n";
  for (int b = 0; b < bins; ++b) {
    os << fmt::format("{},{},{},{},", b, b * width, (b + 1) * width,
                      b < static_cast<int>(r.per_bin_count.size()) ? r.per_bin_count[b] : 0);
    if (r.per_bin_accuracy[b]) os << fmt::format("{}", *r.per_bin_accuracy[b]);
    os << '\n';
  }
}

}  // namespace vpkit
