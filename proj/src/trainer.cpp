#include "vpkit/trainer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "vpkit/error.hpp"
#include "vpkit/kernels.hpp"
#include "vpkit/loss.hpp"
#include "vpkit/metrics.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {
namespace {

constexpr std::array<char, 4> kModelMagic{'V', 'P', 'K', 'M'};
constexpr std::uint32_t kModelVersion = 1;

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), x.cols);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = x.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void relu_inplace(Matrix& m) {
  for (auto& v : m.data) v = v > 0 ? v : 0.0;
}

bool all_finite(const ModelParams& p) {
  for (const auto& l : p.layers) {
    for (double v : l.weight.data) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : l.bias) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void sgd_step(DenseLayer& layer, const Matrix& grad_w, std::span<const double> grad_b, double lr) {
  for (std::size_t i = 0; i < layer.weight.data.size(); ++i) layer.weight.data[i] -= lr * grad_w.data[i];
  for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * grad_b[i];
}

template <typename T>
void put_le(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const U u = std::bit_cast<U>(v);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(buf, sizeof buf);
}

template <typename T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof buf)) throw InputError("model file truncated");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(static_cast<U>(buf[i]) << (8 * i));
  return std::bit_cast<T>(u);
}

double train_mae(const ModelParams& params, const TrainingData& data, std::span<const std::size_t> idx,
                 const CircularLabelSpace& space, Exec exec, int epoch) {
  const Matrix z = forward_logits(params, gather_rows(data.features, idx), exec);
  for (double v : z.data) {
    if (!std::isfinite(v)) throw DivergenceError(epoch, fmt::format("logits became non-finite in epoch {}", epoch));
  }
  std::vector<double> p(idx.size()), g(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto row = z.row(i);
    p[i] = space.bin_to_degrees(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    g[i] = data.azimuth_deg[idx[i]];
  }
  return median_angular_error(p, g);
}

}  // namespace

void TrainConfig::validate() const {
  (void)CircularLabelSpace(classes);
  if (kernel) kernel->validate();
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be > 0");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  if (hidden_units < 0) throw InputError("hidden_units must be >= 0");
  if (!(blend_ratio >= 0 && blend_ratio <= 1)) throw InputError("blend_ratio must be in [0,1]");
  if (image_size < 16) throw InputError("image_size must be >= 16");
}

WeightMatrix TrainConfig::weight_matrix() const {
  if (!kernel) return WeightMatrix::identity(classes);
  return build_weight_matrix(CircularLabelSpace(classes), *kernel);
}

ModelParams init_params(int input_dim, int hidden_units, int classes, std::uint64_t seed) {
  if (input_dim < 1 || classes < 1 || hidden_units < 0) throw InputError("init_params: bad dimensions");
  ModelParams p;
  p.input_dim = input_dim;
  p.hidden_units = hidden_units;
  p.classes = classes;
  std::vector<std::pair<int, int>> shapes;  // (fan_in, fan_out)
  if (hidden_units > 0) {
    shapes = {{input_dim, hidden_units}, {hidden_units, classes}};
  } else {
    shapes = {{input_dim, classes}};
  }
  Rng rng(derive_seed(seed, "init"));
  for (const auto& [fan_in, fan_out] : shapes) {
    DenseLayer l;
    l.weight = Matrix(static_cast<std::size_t>(fan_out), static_cast<std::size_t>(fan_in));
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : l.weight.data) v = rng.uniform(-a, a);
    l.bias.assign(static_cast<std::size_t>(fan_out), 0.0);
    p.layers.push_back(std::move(l));
  }
  return p;
}

TrainingData make_training_data(const DatasetManifest& m, int image_size, const std::filesystem::path& base_dir,
                                Exec exec) {
  TrainingData d;
  d.features = load_features(m, image_size, base_dir, exec);
  d.labels = m.labels();
  d.azimuth_deg = m.azimuths();
  return d;
}

std::pair<std::size_t, std::size_t> blend_counts(std::size_t real_pool, std::size_t synth_pool,
                                                 const TrainConfig& cfg) {
  const double b = cfg.blend_ratio;
  auto synth_for = [b](std::size_t n) {
    return static_cast<std::size_t>(std::ceil(b * static_cast<double>(n) - 1e-9));
  };
  std::size_t n = cfg.train_size;
  if (n == 0) {
    if (b == 0.0) n = real_pool;
    else if (b == 1.0) n = synth_pool;
    else {
      n = real_pool + synth_pool;
      while (n > 0 && (synth_for(n) > synth_pool || n - synth_for(n) > real_pool)) --n;
    }
  }
  if (n == 0) throw InputError("train: combined training set is empty");
  const std::size_t s = synth_for(n);
  const std::size_t r = n - s;
  if (s > synth_pool) {
    throw InputError(fmt::format("train: blend needs {} synthetic samples, pool has {}", s, synth_pool));
  }
  if (r > real_pool) throw InputError(fmt::format("train: blend needs {} real samples, pool has {}", r, real_pool));
  return {r, s};
}

Matrix forward_logits(const ModelParams& params, const Matrix& x, Exec exec) {
  if (x.cols != static_cast<std::size_t>(params.input_dim)) {
    throw InputError(fmt::format("predict: input has {} features, model expects {}", x.cols, params.input_dim));
  }
  Matrix h;
  kernels::dense_forward(x, params.layers[0].weight, params.layers[0].bias, h, exec);
  if (params.layers.size() == 1) return h;
  relu_inplace(h);
  Matrix z;
  kernels::dense_forward(h, params.layers[1].weight, params.layers[1].bias, z, exec);
  return z;
}

Prediction predict(const ModelParams& params, const Matrix& x, Exec exec) {
  Prediction out;
  const Matrix z = forward_logits(params, x, exec);
  out.probabilities = softmax(z, exec);
  out.bins.resize(z.rows);
  for (std::size_t n = 0; n < z.rows; ++n) {
    const auto row = z.row(n);
    out.bins[n] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

TrainResult train(const TrainingData& real, const TrainingData& synthetic, const TrainConfig& cfg) {
  cfg.validate();
  const auto [n_real, n_synth] = blend_counts(real.size(), synthetic.size(), cfg);
  if (n_real && n_synth && real.features.cols != synthetic.features.cols) {
    throw InputError("train: real and synthetic images differ in size");
  }
  const CircularLabelSpace space(cfg.classes);
  const WeightMatrix w = cfg.weight_matrix();

  // Pool selection: the first n of a seeded permutation of each pool.
  Rng select_rng(derive_seed(cfg.seed, "select"));
  auto choose = [&](std::size_t pool, std::size_t count) {
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    select_rng.shuffle(std::span(idx));
    idx.resize(count);
    return idx;
  };
  const auto real_idx = choose(real.size(), n_real);
  const auto synth_idx = choose(synthetic.size(), n_synth);

  TrainingData data;
  {
    const Matrix xr = gather_rows(real.features, real_idx);
    const Matrix xs = gather_rows(synthetic.features, synth_idx);
    data.features = Matrix(n_real + n_synth, n_real ? xr.cols : xs.cols);
    std::copy(xr.data.begin(), xr.data.end(), data.features.data.begin());
    std::copy(xs.data.begin(), xs.data.end(), data.features.data.begin() + static_cast<std::ptrdiff_t>(xr.data.size()));
    for (auto i : real_idx) {
      data.labels.push_back(real.labels[i]);
      data.azimuth_deg.push_back(real.azimuth_deg[i]);
    }
    for (auto i : synth_idx) {
      data.labels.push_back(synthetic.labels[i]);
      data.azimuth_deg.push_back(synthetic.azimuth_deg[i]);
    }
  }
  for (int l : data.labels) {
    if (l < 0 || l >= cfg.classes) throw InputError(fmt::format("train: label {} outside K={}", l, cfg.classes));
  }

  TrainResult result;
  result.real_used = n_real;
  result.synthetic_used = n_synth;
  result.params = init_params(static_cast<int>(data.features.cols), cfg.hidden_units, cfg.classes, cfg.seed);
  ModelParams& params = result.params;
  const bool hidden = params.layers.size() == 2;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> all = order;
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));

  Matrix h_pre, h, z, grad_h, gw0, gw1;
  std::vector<double> gb0, gb1;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = gather_rows(data.features, idx);
      LogitsBatch batch;
      batch.labels.reserve(idx.size());
      for (auto i : idx) batch.labels.push_back(data.labels[i]);

      kernels::dense_forward(xb, params.layers[0].weight, params.layers[0].bias, h_pre, cfg.exec);
      if (hidden) {
        h = h_pre;
        relu_inplace(h);
        kernels::dense_forward(h, params.layers[1].weight, params.layers[1].bias, batch.z, cfg.exec);
      } else {
        batch.z = h_pre;
      }
      for (double v : batch.z.data) {
        if (!std::isfinite(v)) throw DivergenceError(epoch, fmt::format("training diverged in epoch {}", epoch));
      }
      const LossAndGradient lg = weighted_softmax_loss_and_gradient(batch, w, cfg.exec);
      if (!std::isfinite(lg.loss.mean)) {
        throw DivergenceError(epoch, fmt::format("training diverged in epoch {}", epoch));
      }
      loss_sum += lg.loss.mean * static_cast<double>(idx.size());

      if (hidden) {
        gb1.assign(params.layers[1].bias.size(), 0.0);
        kernels::dense_weight_grad(h, lg.grad, gw1, gb1, cfg.exec);
        kernels::dense_input_grad(lg.grad, params.layers[1].weight, grad_h, cfg.exec);
        for (std::size_t i = 0; i < grad_h.data.size(); ++i) {
          if (!(h_pre.data[i] > 0)) grad_h.data[i] = 0.0;
        }
        gb0.assign(params.layers[0].bias.size(), 0.0);
        kernels::dense_weight_grad(xb, grad_h, gw0, gb0, cfg.exec);
        sgd_step(params.layers[1], gw1, gb1, cfg.learning_rate);
        sgd_step(params.layers[0], gw0, gb0, cfg.learning_rate);
      } else {
        gb0.assign(params.layers[0].bias.size(), 0.0);
        kernels::dense_weight_grad(xb, lg.grad, gw0, gb0, cfg.exec);
        sgd_step(params.layers[0], gw0, gb0, cfg.learning_rate);
      }
    }
    if (!all_finite(params)) throw DivergenceError(epoch, fmt::format("parameters became non-finite in epoch {}", epoch));
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(order.size());
    entry.train_mae = train_mae(params, data, all, space, cfg.exec, epoch);
    result.log.push_back(entry);
  }
  return result;
}

void write_model(std::ostream& os, const ModelParams& p) {
  os.write(kModelMagic.data(), kModelMagic.size());
  put_le<std::uint32_t>(os, kModelVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.input_dim));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(p.hidden_units));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(p.classes));
  for (const auto& l : p.layers) {
    for (double v : l.weight.data) put_le<double>(os, v);
    for (double v : l.bias) put_le<double>(os, v);
  }
}

ModelParams read_model(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kModelMagic) throw InputError("not a model file (bad magic)");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kModelVersion) throw InputError(fmt::format("unsupported model version {}", version));
  const auto input_dim = get_le<std::uint32_t>(is);
  const auto hidden = get_le<std::uint16_t>(is);
  const auto classes = get_le<std::uint16_t>(is);
  if (input_dim == 0 || classes == 0) throw InputError("model file: zero dimension");
  ModelParams p;
  p.input_dim = static_cast<int>(input_dim);
  p.hidden_units = hidden;
  p.classes = classes;
  std::vector<std::pair<int, int>> shapes;
  if (hidden) shapes = {{p.input_dim, hidden}, {hidden, classes}};
  else shapes = {{p.input_dim, classes}};
  for (const auto& [in, out] : shapes) {
    DenseLayer l;
    l.weight = Matrix(static_cast<std::size_t>(out), static_cast<std::size_t>(in));
    for (auto& v : l.weight.data) v = get_le<double>(is);
    l.bias.resize(static_cast<std::size_t>(out));
    for (auto& v : l.bias) v = get_le<double>(is);
    p.layers.push_back(std::move(l));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw InputError("model file has trailing bytes");
  return p;
}

void write_model_file(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  write_model(os, params);
}

ModelParams read_model_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open model " + path.string());
  return read_model(is);
}

void write_training_log(std::ostream& os, const std::vector<EpochLog>& log) {
  os << "epoch,loss,train_mae\n";
  for (const auto& e : log) os << fmt::format("{},{},{}\n", e.epoch, e.loss, e.train_mae);
}

}  // namespace vpkit
