#include "vpkit/kernels.hpp"

#include <cstddef>
#include <cstdint>

#include "vpkit/error.hpp"

namespace vpkit::kernels {
namespace {

inline void forward_row(const Matrix& x, const Matrix& weight, std::span<const double> bias, Matrix& out,
                        std::size_t n) {
  const auto xr = x.row(n);
  for (std::size_t o = 0; o < weight.rows; ++o) {
    const auto wr = weight.row(o);
    double s = 0.0;
    for (std::size_t i = 0; i < xr.size(); ++i) s += xr[i] * wr[i];
    out(n, o) = s + bias[o];
  }
}

inline void weight_grad_unit(const Matrix& x, const Matrix& g, Matrix& grad_w, std::span<double> grad_b,
                             std::size_t o) {
  auto gw = grad_w.row(o);
  for (auto& v : gw) v = 0.0;
  double gb = 0.0;
  for (std::size_t n = 0; n < x.rows; ++n) {
    const double go = g(n, o);
    gb += go;
    if (go == 0.0) continue;
    const auto xr = x.row(n);
    for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += go * xr[i];
  }
  grad_b[o] = gb;
}

inline void input_grad_row(const Matrix& g, const Matrix& weight, Matrix& grad_x, std::size_t n) {
  auto gx = grad_x.row(n);
  for (auto& v : gx) v = 0.0;
  for (std::size_t o = 0; o < weight.rows; ++o) {
    const double go = g(n, o);
    if (go == 0.0) continue;
    const auto wr = weight.row(o);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go * wr[i];
  }
}

}  // namespace

void dense_forward(const Matrix& x, const Matrix& weight, std::span<const double> bias, Matrix& out,
                   Exec exec) {
  if (x.cols != weight.cols || bias.size() != weight.rows) throw InputError("dense_forward: shape mismatch");
  if (out.rows != x.rows || out.cols != weight.rows) out = Matrix(x.rows, weight.rows);
  const auto rows = static_cast<std::int64_t>(x.rows);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t n = 0; n < rows; ++n) forward_row(x, weight, bias, out, static_cast<std::size_t>(n));
  } else {
    for (std::int64_t n = 0; n < rows; ++n) forward_row(x, weight, bias, out, static_cast<std::size_t>(n));
  }
}

void dense_weight_grad(const Matrix& x, const Matrix& g, Matrix& grad_w, std::span<double> grad_b, Exec exec) {
  if (x.rows != g.rows || grad_b.size() != g.cols) throw InputError("dense_weight_grad: shape mismatch");
  if (grad_w.rows != g.cols || grad_w.cols != x.cols) grad_w = Matrix(g.cols, x.cols);
  const auto units = static_cast<std::int64_t>(g.cols);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t o = 0; o < units; ++o) weight_grad_unit(x, g, grad_w, grad_b, static_cast<std::size_t>(o));
  } else {
    for (std::int64_t o = 0; o < units; ++o) weight_grad_unit(x, g, grad_w, grad_b, static_cast<std::size_t>(o));
  }
}

void dense_input_grad(const Matrix& g, const Matrix& weight, Matrix& grad_x, Exec exec) {
  if (g.cols != weight.rows) throw InputError("dense_input_grad: shape mismatch");
  if (grad_x.rows != g.rows || grad_x.cols != weight.cols) grad_x = Matrix(g.rows, weight.cols);
  const auto rows = static_cast<std::int64_t>(g.rows);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t n = 0; n < rows; ++n) input_grad_row(g, weight, grad_x, static_cast<std::size_t>(n));
  } else {
    for (std::int64_t n = 0; n < rows; ++n) input_grad_row(g, weight, grad_x, static_cast<std::size_t>(n));
  }
}

}  // namespace vpkit::kernels
