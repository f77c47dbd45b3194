#pragma once
// Independent reference implementations used to check the library.
// Nothing here calls the code under test except for shared plumbing
// (Rng, derive_seed, Matrix).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "vpkit/matrix.hpp"
#include "vpkit/rng.hpp"

namespace oracle {

/// exp(-d^2/s^2) or exp(-d/s^2) on a ring of k bins, computed from scratch.
inline double kernel(int a, int b, int k, double sigma, bool squared, int truncation = -1) {
  int d = std::abs(a - b) % k;
  d = std::min(d, k - d);
  if (truncation >= 0 && d > truncation) return 0.0;
  const double dd = squared ? double(d) * d : double(d);
  return std::exp(-dd / (sigma * sigma));
}

/// -sum_k w_k log softmax(z)_k for one row, accumulated in long double.
inline long double row_loss(const double* z, const double* w, int k) {
  long double m = z[0];
  for (int j = 1; j < k; ++j) m = std::max<long double>(m, z[j]);
  long double s = 0;
  for (int j = 0; j < k; ++j) s += std::exp(static_cast<long double>(z[j]) - m);
  const long double lse = m + std::log(s);
  long double e = 0;
  for (int j = 0; j < k; ++j) e -= static_cast<long double>(w[j]) * (z[j] - lse);
  return e;
}

/// Batch mean of row_loss; w is K x K row major, row l_n used for sample n.
inline long double batch_loss(const vpkit::Matrix& z, const std::vector<int>& labels, const std::vector<double>& w) {
  const int k = static_cast<int>(z.cols);
  long double total = 0;
  for (std::size_t n = 0; n < z.rows; ++n) total += row_loss(&z.data[n * z.cols], &w[labels[n] * k], k);
  return total / static_cast<long double>(z.rows);
}

/// Central differences of batch_loss with step h.
inline vpkit::Matrix fd_gradient(vpkit::Matrix z, const std::vector<int>& labels, const std::vector<double>& w,
                                 double h) {
  vpkit::Matrix g(z.rows, z.cols);
  for (std::size_t i = 0; i < z.data.size(); ++i) {
    const double keep = z.data[i];
    z.data[i] = keep + h;
    const long double up = batch_loss(z, labels, w);
    z.data[i] = keep - h;
    const long double down = batch_loss(z, labels, w);
    z.data[i] = keep;
    g.data[i] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

/// Same central differences, exploiting that z[n][j] only moves row n's term.
/// O(N K^2) instead of O(N^2 K^3), which makes K = 360 affordable.
inline vpkit::Matrix fd_gradient_rowwise(vpkit::Matrix z, const std::vector<int>& labels, const std::vector<double>& w,
                                         double h) {
  const int k = static_cast<int>(z.cols);
  const long double n = static_cast<long double>(z.rows);
  vpkit::Matrix g(z.rows, z.cols);
  for (std::size_t r = 0; r < z.rows; ++r) {
    double* row = &z.data[r * z.cols];
    const double* wr = &w[static_cast<std::size_t>(labels[r]) * z.cols];
    for (int j = 0; j < k; ++j) {
      const double keep = row[j];
      row[j] = keep + h;
      const long double up = row_loss(row, wr, k);
      row[j] = keep - h;
      const long double down = row_loss(row, wr, k);
      row[j] = keep;
      g.data[r * z.cols + j] = static_cast<double>((up - down) / (2.0L * h * n));
    }
  }
  return g;
}

/// Plain cross-entropy: log-sum-exp(z) - z_label, row by row, averaged.
inline double cross_entropy(const vpkit::Matrix& z, const std::vector<int>& labels) {
  double total = 0;
  for (std::size_t n = 0; n < z.rows; ++n) {
    const double* r = &z.data[n * z.cols];
    const double m = *std::max_element(r, r + z.cols);
    double s = 0;
    for (std::size_t j = 0; j < z.cols; ++j) s += std::exp(r[j] - m);
    total += m + std::log(s) - r[labels[n]];
  }
  return total / static_cast<double>(z.rows);
}

/// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0, theta = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  for (auto& x : v) x = std::max(0.0, x - theta);
  return v;
}

/// Minimize -sum w_k log p_k over the simplex. The simplex is parametrized as
/// p = softmax(theta), which keeps every iterate interior and avoids the
/// 1/p blow-up of projected steps near tiny weights; descent on theta uses
/// Armijo backtracking with step growth. Returns the final p.
inline std::vector<double> minimize_on_simplex(const std::vector<double>& w, int max_iter = 2'000'000) {
  const std::size_t k = w.size();
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  auto probs = [&](const std::vector<double>& th) {
    const double m = *std::max_element(th.begin(), th.end());
    std::vector<double> p(k);
    double z = 0;
    for (std::size_t j = 0; j < k; ++j) z += p[j] = std::exp(th[j] - m);
    for (auto& v : p) v /= z;
    return p;
  };
  auto f = [&](const std::vector<double>& th) {
    const double m = *std::max_element(th.begin(), th.end());
    double z = 0, dot = 0;
    for (std::size_t j = 0; j < k; ++j) {
      z += std::exp(th[j] - m);
      dot += w[j] * th[j];
    }
    return s * (m + std::log(z)) - dot;
  };
  std::vector<double> th(k, 0.0), g(k), trial(k);
  double fth = f(th);
  double step = 1.0 / s;
  int stalled = 0;  // consecutive steps that no longer lower f measurably
  for (int it = 0; it < max_iter && stalled < 20; ++it) {
    const auto p = probs(th);
    double gmax = 0, gg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      g[j] = s * p[j] - w[j];
      gmax = std::max(gmax, std::abs(g[j]));
      gg += g[j] * g[j];
    }
    if (gmax == 0) break;
    double t = step * 2;
    for (;;) {
      for (std::size_t j = 0; j < k; ++j) trial[j] = th[j] - t * g[j];
      const double ft = f(trial);
      if (ft <= fth - 0.5 * t * gg) {
        stalled = fth - ft <= 1e-16 * std::max(1.0, std::abs(fth)) ? stalled + 1 : 0;
        th = trial;
        fth = ft;
        step = t;
        break;
      }
      t *= 0.5;
      if (t < 1e-300) return probs(th);
    }
  }
  return probs(th);
}

/// Hamilton apportionment of `budget` over non-negative integer `ideal` weights.
/// Ties in remainder go to the larger ideal, then the lower index.
inline std::vector<long long> largest_remainder(const std::vector<long long>& ideal, long long budget) {
  const long long total = std::accumulate(ideal.begin(), ideal.end(), 0LL);
  std::vector<long long> out(ideal.size(), 0);
  if (total == 0) return out;
  struct R {
    long long rem;
    long long ideal;
    std::size_t idx;
  };
  std::vector<R> rs;
  long long given = 0;
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    const long long num = ideal[i] * budget;
    out[i] = num / total;
    given += out[i];
    rs.push_back({num % total, ideal[i], i});
  }
  std::sort(rs.begin(), rs.end(), [](const R& a, const R& b) {
    if (a.rem != b.rem) return a.rem > b.rem;
    if (a.ideal != b.ideal) return a.ideal > b.ideal;
    return a.idx < b.idx;
  });
  for (long long i = 0; i < budget - given; ++i) ++out[rs[static_cast<std::size_t>(i)].idx];
  return out;
}

/// Smallest total additions, over every vector in [0, cap]^K, that makes h + a flat.
/// Returns -1 when no such vector exists in the box.
inline long long brute_force_min_additions(const std::vector<int>& h, int cap) {
  const std::size_t k = h.size();
  std::vector<int> a(k, 0);
  long long best = -1;
  for (;;) {
    bool flat = true;
    for (std::size_t i = 1; i < k; ++i) flat = flat && (h[i] + a[i] == h[0] + a[0]);
    if (flat) {
      const long long s = std::accumulate(a.begin(), a.end(), 0LL);
      if (best < 0 || s < best) best = s;
    }
    std::size_t i = 0;
    while (i < k && a[i] == cap) a[i++] = 0;
    if (i == k) break;
    ++a[i];
  }
  return best;
}

/// Upper tail probability of the chi-square distribution.
inline double chi_square_sf(double x, double dof) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

inline double chi_square_stat(const std::vector<long long>& counts, double expected_each) {
  double s = 0;
  for (auto c : counts) s += (c - expected_each) * (c - expected_each) / expected_each;
  return s;
}

/// A linear SoftMax classifier trained by mini-batch SGD with plain
/// cross-entropy, written without the library's loss or kernels. It draws
/// from the same seeded streams as the library trainer: the training-set
/// selection permutation from "select", Xavier-uniform init from "init",
/// epoch shuffles from "shuffle".
struct PlainTrainer {
  std::vector<double> weight;  // classes x dim
  std::vector<double> bias;
  std::vector<double> epoch_loss;

  void run(const vpkit::Matrix& x, const std::vector<int>& labels, int classes, double lr, int epochs, int batch,
           std::uint64_t seed) {
    const std::size_t dim = x.cols, n = x.rows, k = static_cast<std::size_t>(classes);
    weight.assign(k * dim, 0.0);
    bias.assign(k, 0.0);
    vpkit::Rng init(vpkit::derive_seed(seed, "init"));
    const double a = std::sqrt(6.0 / static_cast<double>(dim + k));
    for (auto& v : weight) v = init.uniform(-a, a);

    std::vector<std::size_t> picked(n);
    std::iota(picked.begin(), picked.end(), 0);
    vpkit::Rng select(vpkit::derive_seed(seed, "select"));
    select.shuffle(std::span(picked));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    vpkit::Rng shuf(vpkit::derive_seed(seed, "shuffle"));
    std::vector<double> z(k), gw(k * dim), gb(k);
    for (int e = 0; e < epochs; ++e) {
      shuf.shuffle(std::span(order));
      double total = 0;
      for (std::size_t s = 0; s < n; s += static_cast<std::size_t>(batch)) {
        const std::size_t end = std::min(n, s + static_cast<std::size_t>(batch));
        const double inv = 1.0 / static_cast<double>(end - s);
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        double batch_sum = 0;
        for (std::size_t t = s; t < end; ++t) {
          const std::size_t src = picked[order[t]];
          const double* xr = &x.data[src * dim];
          for (std::size_t o = 0; o < k; ++o) {
            double acc = 0;
            for (std::size_t i = 0; i < dim; ++i) acc += xr[i] * weight[o * dim + i];
            z[o] = acc + bias[o];
          }
          const double m = *std::max_element(z.begin(), z.end());
          double sum = 0;
          for (auto v : z) sum += std::exp(v - m);
          const int l = labels[src];
          batch_sum += m + std::log(sum) - z[l];
          for (std::size_t o = 0; o < k; ++o) {
            const double g = (std::exp(z[o] - m) / sum - (static_cast<int>(o) == l ? 1.0 : 0.0)) * inv;
            gb[o] += g;
            for (std::size_t i = 0; i < dim; ++i) gw[o * dim + i] += g * xr[i];
          }
        }
        for (std::size_t i = 0; i < weight.size(); ++i) weight[i] -= lr * gw[i];
        for (std::size_t o = 0; o < k; ++o) bias[o] -= lr * gb[o];
        total += batch_sum;
      }
      epoch_loss.push_back(total / static_cast<double>(n));
    }
  }
};

}  // namespace oracle
