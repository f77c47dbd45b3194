#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vpkit/circular.hpp"
#include "vpkit/manifest.hpp"

namespace vpkit {

/// Shortest arc between two angles in degrees, in [0, 180].
double circular_error_deg(double a, double b);

/// Median of circular absolute errors; even counts average the two middle values.
double median_angular_error(std::span<const double> pred_deg, std::span<const double> gt_deg);

/// Index of the ground-truth range [b*360/B, (b+1)*360/B) containing theta.
int range_bin(double theta_deg, int bins);

/// Fraction of predictions within `correct_within` degrees of ground truth,
/// per ground-truth range bin. Bins with no samples are nullopt.
std::vector<std::optional<double>> accuracy_by_bin(std::span<const double> pred_deg, std::span<const double> gt_deg,
                                                   int bins = 36, double correct_within = 10.0);
/// Same, with predictions given as bins of `space` (scored at bin centers).
std::vector<std::optional<double>> accuracy_by_bin(std::span<const int> pred_bins, const CircularLabelSpace& space,
                                                   std::span<const double> gt_deg, int bins = 36,
                                                   double correct_within = 10.0);

/// Entropy (natural log) of accuracies normalized to a distribution. Missing
/// bins are skipped. Throws InputError if no accuracy is positive.
double accuracy_entropy(std::span<const std::optional<double>> per_bin_accuracy);
double accuracy_entropy(std::span<const double> per_bin_accuracy);

/// Counts of manifest angles per range bin.
std::vector<std::size_t> label_histogram(const DatasetManifest& m, int bins);

struct EvalReport {
  double median_angular_error_deg = 0.0;
  std::vector<std::optional<double>> per_bin_accuracy;
  std::vector<std::size_t> per_bin_count;
  std::optional<double> accuracy_entropy;  // unset when every bin has zero accuracy
  std::size_t n_evaluated = 0;
  double correct_within_deg = 10.0;
  std::string label;
};

EvalReport evaluate(std::span<const double> pred_deg, std::span<const double> gt_deg, int bins = 36,
                    double correct_within = 10.0);

/// One `key=value` per line.
void write_report_text(std::ostream& os, const EvalReport& r);
EvalReport read_report_text(std::istream& is);
/// bin,range_start_deg,range_end_deg,count,accuracy (accuracy empty when missing).
void write_per_bin_csv(std::ostream& os, const EvalReport& r);

}  // namespace vpkit
