#include "vpkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "vpkit/error.hpp"

namespace vpkit {
namespace {

void check_finite(const Matrix& z) {
  for (double v : z.data) {
    if (!std::isfinite(v)) throw InputError("logits contain a non-finite value");
  }
}

void check_batch(const LogitsBatch& b, const WeightMatrix& w) {
  if (b.z.rows != b.labels.size()) throw InputError("loss: label count does not match batch size");
  if (b.z.cols != static_cast<std::size_t>(w.size())) {
    throw InputError("loss: logits have " + std::to_string(b.z.cols) + " classes, weight matrix " +
                     std::to_string(w.size()));
  }
  for (int l : b.labels) {
    if (l < 0 || l >= w.size()) throw InputError("loss: label out of range");
  }
  check_finite(b.z);
}

// log p for one row; returns via out.
void log_softmax_row(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double lse = std::log(s);
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = (z[k] - m) - lse;
}

void softmax_row(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] - m);
    s += out[k];
  }
  for (auto& v : out) v /= s;
}

template <typename RowFn>
void for_rows(std::size_t rows, Exec exec, RowFn&& fn) {
  const auto n = static_cast<std::int64_t>(rows);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) fn(static_cast<std::size_t>(r));
  } else {
    for (std::int64_t r = 0; r < n; ++r) fn(static_cast<std::size_t>(r));
  }
}

// Per-example loss and (optionally) the unscaled gradient row S p - w.
double example_loss(std::span<const double> z, std::span<const double> wrow, double wsum,
                    std::span<double> scratch, std::span<double> grad_row) {
  log_softmax_row(z, scratch);
  double e = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (wrow[k] != 0.0) e += wrow[k] * scratch[k];
  }
  if (!grad_row.empty()) {
    for (std::size_t k = 0; k < z.size(); ++k) grad_row[k] = wsum * std::exp(scratch[k]) - wrow[k];
  }
  return -e;
}

double mean_in_order(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

Matrix softmax(const Matrix& z, Exec exec) {
  check_finite(z);
  Matrix p(z.rows, z.cols);
  for_rows(z.rows, exec, [&](std::size_t r) { softmax_row(z.row(r), p.row(r)); });
  return p;
}

Matrix log_softmax(const Matrix& z, Exec exec) {
  check_finite(z);
  Matrix lp(z.rows, z.cols);
  for_rows(z.rows, exec, [&](std::size_t r) { log_softmax_row(z.row(r), lp.row(r)); });
  return lp;
}

LossValue weighted_softmax_loss(const LogitsBatch& batch, const WeightMatrix& w, Exec exec) {
  check_batch(batch, w);
  LossValue out;
  out.per_example.resize(batch.z.rows);
  Matrix scratch(batch.z.rows, batch.z.cols);
  for_rows(batch.z.rows, exec, [&](std::size_t n) {
    const int l = batch.labels[n];
    out.per_example[n] = example_loss(batch.z.row(n), w.row(l), w.row_sum(l), scratch.row(n), {});
  });
  out.mean = mean_in_order(out.per_example);
  return out;
}

LossAndGradient weighted_softmax_loss_and_gradient(const LogitsBatch& batch, const WeightMatrix& w, Exec exec) {
  check_batch(batch, w);
  LossAndGradient out;
  out.loss.per_example.resize(batch.z.rows);
  out.grad = Matrix(batch.z.rows, batch.z.cols);
  Matrix scratch(batch.z.rows, batch.z.cols);
  const double inv_n = batch.z.rows ? 1.0 / static_cast<double>(batch.z.rows) : 0.0;
  for_rows(batch.z.rows, exec, [&](std::size_t n) {
    const int l = batch.labels[n];
    auto g = out.grad.row(n);
    out.loss.per_example[n] = example_loss(batch.z.row(n), w.row(l), w.row_sum(l), scratch.row(n), g);
    for (auto& v : g) v *= inv_n;
  });
  out.loss.mean = mean_in_order(out.loss.per_example);
  return out;
}

Matrix weighted_softmax_gradient(const LogitsBatch& batch, const WeightMatrix& w, Exec exec) {
  return weighted_softmax_loss_and_gradient(batch, w, exec).grad;
}

MinLoss min_loss(std::span<const double> weight_row) {
  double total = 0.0;
  for (double v : weight_row) {
    if (v < 0 || !std::isfinite(v)) throw InputError("min_loss: weights must be finite and non-negative");
    total += v;
  }
  if (!(total > 0)) throw InputError("min_loss: weight row has no positive entry");
  MinLoss out;
  out.p.resize(weight_row.size());
  for (std::size_t k = 0; k < weight_row.size(); ++k) out.p[k] = weight_row[k] / total;
  double e = 0.0;
  for (std::size_t k = 0; k < weight_row.size(); ++k) {
    if (weight_row[k] > 0) e += weight_row[k] * std::log(out.p[k]);
  }
  out.loss = -e;
  return out;
}

}  // namespace vpkit
