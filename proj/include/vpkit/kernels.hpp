#pragma once

#include <span>

#include "vpkit/matrix.hpp"

// Data-parallel inner loops of the trainer. The Parallel path splits work over
// independent output rows/units only, so it is bit-identical to Serial.
namespace vpkit::kernels {

/// out[n][o] = bias[o] + sum_i x[n][i] * weight[o][i]; weight is (outputs x inputs).
void dense_forward(const Matrix& x, const Matrix& weight, std::span<const double> bias, Matrix& out,
                   Exec exec = Exec::Parallel);

/// grad_w[o][i] = sum_n g[n][o] * x[n][i]; grad_b[o] = sum_n g[n][o]. Sums run over n in order.
void dense_weight_grad(const Matrix& x, const Matrix& g, Matrix& grad_w, std::span<double> grad_b,
                       Exec exec = Exec::Parallel);

/// grad_x[n][i] = sum_o g[n][o] * weight[o][i].
void dense_input_grad(const Matrix& g, const Matrix& weight, Matrix& grad_x, Exec exec = Exec::Parallel);

}  // namespace vpkit::kernels
