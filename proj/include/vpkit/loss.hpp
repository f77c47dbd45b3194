#pragma once

#include <span>
#include <vector>

#include "vpkit/circular.hpp"
#include "vpkit/matrix.hpp"

namespace vpkit {

/// N x K pre-SoftMax scores with one ground-truth bin per row.
struct LogitsBatch {
  Matrix z;
  std::vector<int> labels;
};

struct LossValue {
  double mean = 0.0;                // E, averaged over the batch
  std::vector<double> per_example;  // -sum_k W[l_n][k] * log p_{n,k}
};

struct LossAndGradient {
  LossValue loss;
  Matrix grad;  // dE/dz, already divided by N
};

/// Row-wise SoftMax with max subtraction. Throws InputError on non-finite logits.
Matrix softmax(const Matrix& z, Exec exec = Exec::Parallel);

/// Row-wise log SoftMax via log-sum-exp.
Matrix log_softmax(const Matrix& z, Exec exec = Exec::Parallel);

/// Von Mises weighted cross-entropy. With an identity W this is plain SoftMax loss.
LossValue weighted_softmax_loss(const LogitsBatch& batch, const WeightMatrix& w, Exec exec = Exec::Parallel);

/// dE/dz_{n,j} = (S_n p_{n,j} - W[l_n][j]) / N where S_n is the row sum of W[l_n].
Matrix weighted_softmax_gradient(const LogitsBatch& batch, const WeightMatrix& w, Exec exec = Exec::Parallel);

/// Single pass producing both; what the trainer uses.
LossAndGradient weighted_softmax_loss_and_gradient(const LogitsBatch& batch, const WeightMatrix& w,
                                                   Exec exec = Exec::Parallel);

/// Minimizer of -sum_k w_k log p_k over the probability simplex: p*_k = w_k / sum(w).
/// The minimum is zero only for one-hot weight rows.
struct MinLoss {
  std::vector<double> p;
  double loss = 0.0;
};
MinLoss min_loss(std::span<const double> weight_row);

}  // namespace vpkit
