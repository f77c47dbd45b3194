#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vpkit/circular.hpp"
#include "vpkit/manifest.hpp"
#include "vpkit/matrix.hpp"

namespace vpkit {

struct TrainConfig {
  int classes = 36;
  std::optional<KernelConfig> kernel;  // nullopt trains plain SoftMax
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int hidden_units = 0;      // 0: linear model
  double blend_ratio = 0.0;  // fraction of synthetic samples in the training set
  std::size_t train_size = 0;  // 0: the largest size both pools allow
  int image_size = 64;
  Exec exec = Exec::Parallel;

  void validate() const;
  WeightMatrix weight_matrix() const;
};

struct DenseLayer {
  Matrix weight;  // outputs x inputs
  std::vector<double> bias;
  bool operator==(const DenseLayer&) const = default;
};

/// Flattened pixels -> (optional ReLU hidden layer) -> K logits.
struct ModelParams {
  int input_dim = 0;
  int hidden_units = 0;
  int classes = 0;
  std::vector<DenseLayer> layers;

  bool operator==(const ModelParams&) const = default;
};

/// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)); zero biases.
ModelParams init_params(int input_dim, int hidden_units, int classes, std::uint64_t seed);

/// Features and labels of one pool. azimuth_deg feeds the MAE column of the log.
struct TrainingData {
  Matrix features;
  std::vector<int> labels;
  std::vector<double> azimuth_deg;

  std::size_t size() const noexcept { return labels.size(); }
};

TrainingData make_training_data(const DatasetManifest& m, int image_size, const std::filesystem::path& base_dir = {},
                                Exec exec = Exec::Parallel);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_mae = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  std::size_t real_used = 0;
  std::size_t synthetic_used = 0;
};

/// Sample counts (real, synthetic) drawn for a configuration; ceil(blend * n) synthetic.
std::pair<std::size_t, std::size_t> blend_counts(std::size_t real_pool, std::size_t synth_pool,
                                                 const TrainConfig& cfg);

/// Mini-batch SGD. Deterministic in (inputs, cfg). Throws InputError for empty
/// or insufficient pools and DivergenceError when the loss stops being finite.
TrainResult train(const TrainingData& real, const TrainingData& synthetic, const TrainConfig& cfg);

struct Prediction {
  Matrix probabilities;
  std::vector<int> bins;  // argmax, ties to the lower bin
};

Matrix forward_logits(const ModelParams& params, const Matrix& x, Exec exec = Exec::Parallel);
Prediction predict(const ModelParams& params, const Matrix& x, Exec exec = Exec::Parallel);

/// 16-byte header ("VPKM", u32 version, u32 input_dim, u16 hidden, u16 classes)
/// followed by each layer's weights then biases as little-endian f64.
void write_model(std::ostream& os, const ModelParams& params);
ModelParams read_model(std::istream& is);
void write_model_file(const std::filesystem::path& p, const ModelParams& params);
ModelParams read_model_file(const std::filesystem::path& p);

/// epoch,loss,train_mae
void write_training_log(std::ostream& os, const std::vector<EpochLog>& log);

}  // namespace vpkit
