#include "vpkit/circular.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "vpkit/error.hpp"

namespace vpkit {

CircularLabelSpace::CircularLabelSpace(int classes) : classes_(classes) {
  if (classes < 2 || 360 % classes != 0) {
    throw InputError("label space: K must be >= 2 and divide 360, got " + std::to_string(classes));
  }
}

int CircularLabelSpace::degrees_to_bin(double theta_deg) const {
  if (!std::isfinite(theta_deg)) throw InputError("degrees_to_bin: non-finite angle");
  double t = std::fmod(theta_deg, 360.0);
  if (t < 0) t += 360.0;
  // Round half down: ceil(x - 1/2) picks the lower index on exact ties.
  const double x = t / bin_width_deg();
  const auto b = static_cast<long>(std::ceil(x - 0.5));
  return static_cast<int>(((b % classes_) + classes_) % classes_);
}

double CircularLabelSpace::bin_to_degrees(int bin) const {
  if (bin < 0 || bin >= classes_) throw InputError("bin_to_degrees: bin out of range");
  return bin * bin_width_deg();
}

void KernelConfig::validate() const {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw InputError("kernel: sigma must be > 0");
  if (truncation_radius && *truncation_radius < 0) {
    throw InputError("kernel: truncation_radius must be non-negative");
  }
}

int circular_distance(int a, int b, int classes) {
  if (classes < 1 || a < 0 || b < 0 || a >= classes || b >= classes) {
    throw InputError("circular_distance: index out of range");
  }
  const int d = std::abs(a - b);
  return d < classes - d ? d : classes - d;
}

double kernel_weight_at_distance(int distance, const KernelConfig& cfg) {
  const double s2 = cfg.sigma * cfg.sigma;
  const double d = distance;
  double w = cfg.variant == KernelVariant::SquaredDistance ? std::exp(-(d * d) / s2)
                                                           : std::exp(-d / s2);
  if (cfg.truncation_radius && distance > *cfg.truncation_radius) w = 0.0;
  return w;
}

double von_mises_weight(int l, int k, const KernelConfig& cfg, int classes) {
  cfg.validate();
  return kernel_weight_at_distance(circular_distance(l, k, classes), cfg);
}

WeightMatrix::WeightMatrix(int classes, std::vector<double> w) : classes_(classes), w_(std::move(w)) {
  row_sums_.resize(classes_);
  identity_ = true;
  for (int r = 0; r < classes_; ++r) {
    double s = 0.0;
    for (int c = 0; c < classes_; ++c) {
      const double v = (*this)(r, c);
      s += v;
      if (v != (r == c ? 1.0 : 0.0)) identity_ = false;
    }
    row_sums_[r] = s;
  }
}

WeightMatrix WeightMatrix::identity(int classes) {
  std::vector<double> w(static_cast<std::size_t>(classes) * classes, 0.0);
  for (int i = 0; i < classes; ++i) w[static_cast<std::size_t>(i) * classes + i] = 1.0;
  return WeightMatrix(classes, std::move(w));
}

WeightMatrix build_weight_matrix(const CircularLabelSpace& space, const KernelConfig& cfg) {
  cfg.validate();
  const int k = space.size();
  // One weight per distance, then scattered: keeps the matrix exactly circulant.
  std::vector<double> by_distance(k / 2 + 1);
  for (int d = 0; d <= k / 2; ++d) by_distance[d] = kernel_weight_at_distance(d, cfg);
  std::vector<double> w(static_cast<std::size_t>(k) * k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) w[static_cast<std::size_t>(r) * k + c] = by_distance[circular_distance(r, c, k)];
  }
  return WeightMatrix(k, std::move(w));
}

}  // namespace vpkit
