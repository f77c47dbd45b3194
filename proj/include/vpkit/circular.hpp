#pragma once

#include <optional>
#include <span>
#include <vector>

namespace vpkit {

/// Azimuth circle discretized into K equal bins; bin b is centered at b * 360/K degrees.
class CircularLabelSpace {
 public:
  /// Throws InputError unless K >= 2 and K divides 360.
  explicit CircularLabelSpace(int classes);

  int size() const noexcept { return classes_; }
  double bin_width_deg() const noexcept { return 360.0 / classes_; }

  /// Nearest bin center, ties toward the lower (unwrapped) index; theta is taken mod 360.
  int degrees_to_bin(double theta_deg) const;
  /// Center of bin `bin`, in [0, 360).
  double bin_to_degrees(int bin) const;

 private:
  int classes_;
};

enum class KernelVariant {
  SquaredDistance,  // exp(-d^2 / sigma^2)
  LiteralPaper,     // exp(-d / sigma^2)
};

struct KernelConfig {
  double sigma = 2.0;
  KernelVariant variant = KernelVariant::SquaredDistance;
  /// Weights beyond this circular distance (in bins) are exactly zero.
  std::optional<int> truncation_radius;

  void validate() const;
};

/// Shortest arc between two bins on a ring of K bins.
int circular_distance(int a, int b, int classes);

/// Von Mises style weight between bins l and k.
double von_mises_weight(int l, int k, const KernelConfig& cfg, int classes);

/// Weight as a function of circular distance alone.
double kernel_weight_at_distance(int distance, const KernelConfig& cfg);

/// K x K circulant class-to-class weight matrix, stored row major.
class WeightMatrix {
 public:
  static WeightMatrix identity(int classes);

  int size() const noexcept { return classes_; }
  double operator()(int row, int col) const { return w_[static_cast<std::size_t>(row) * classes_ + col]; }
  std::span<const double> row(int r) const {
    return {w_.data() + static_cast<std::size_t>(r) * classes_, static_cast<std::size_t>(classes_)};
  }
  /// Sum of row r (identical for every row of a circulant matrix, kept per row anyway).
  double row_sum(int r) const { return row_sums_[r]; }

  bool is_identity() const noexcept { return identity_; }

 private:
  friend WeightMatrix build_weight_matrix(const CircularLabelSpace&, const KernelConfig&);
  WeightMatrix(int classes, std::vector<double> w);

  int classes_;
  std::vector<double> w_;
  std::vector<double> row_sums_;
  bool identity_ = false;
};

WeightMatrix build_weight_matrix(const CircularLabelSpace& space, const KernelConfig& cfg);

}  // namespace vpkit
