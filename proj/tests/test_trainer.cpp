#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "vpkit/error.hpp"
#include "vpkit/glyph.hpp"
#include "vpkit/loss.hpp"
#include "vpkit/trainer.hpp"

using namespace vpkit;

namespace {

TrainingData glyph_data(std::size_t n, int classes, std::uint64_t seed, int size = 32, bool stratified = true) {
  const std::vector<double> w(static_cast<std::size_t>(classes), 1.0);
  GlyphDatasetOptions opts;
  opts.stratified = stratified;
  return make_training_data(make_glyph_dataset(n, w, seed, opts), size);
}

TrainingData random_pool(Rng& rng, std::size_t n, std::size_t dim, int classes) {
  TrainingData d;
  d.features = Matrix(n, dim);
  for (auto& v : d.features.data) v = rng.uniform01();
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
    d.azimuth_deg.push_back(d.labels.back() * 360.0 / classes);
  }
  return d;
}

std::string dump(const ModelParams& p) {
  std::ostringstream os;
  write_model(os, p);
  return os.str();
}

double accuracy(const ModelParams& p, const TrainingData& d) {
  const Prediction pred = predict(p, d.features);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += pred.bins[i] == d.labels[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

// Independent one-vs-rest perceptron; returns training accuracy of the argmax rule.
double one_vs_rest_perceptron(const TrainingData& d, int classes, int max_epochs) {
  const std::size_t dim = d.features.cols;
  std::vector<std::vector<double>> w(static_cast<std::size_t>(classes), std::vector<double>(dim + 1, 0.0));
  for (int e = 0; e < max_epochs; ++e) {
    int mistakes = 0;
    for (std::size_t n = 0; n < d.size(); ++n) {
      const auto x = d.features.row(n);
      for (int c = 0; c < classes; ++c) {
        double s = w[c][dim];
        for (std::size_t i = 0; i < dim; ++i) s += w[c][i] * x[i];
        const double y = d.labels[n] == c ? 1.0 : -1.0;
        if (y * s <= 0) {
          ++mistakes;
          for (std::size_t i = 0; i < dim; ++i) w[c][i] += y * x[i];
          w[c][dim] += y;
        }
      }
    }
    if (mistakes == 0) break;
  }
  std::size_t ok = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    const auto x = d.features.row(n);
    int best = 0;
    double best_s = -INFINITY;
    for (int c = 0; c < classes; ++c) {
      double s = w[c][dim];
      for (std::size_t i = 0; i < dim; ++i) s += w[c][i] * x[i];
      if (s > best_s) {
        best_s = s;
        best = c;
      }
    }
    ok += best == d.labels[n];
  }
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.blend_ratio = 1.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.classes = 7;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.kernel = KernelConfig{-1.0, KernelVariant::SquaredDistance, {}};
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("init is Xavier uniform and seeded") {
  const auto a = init_params(100, 0, 36, 5);
  const auto b = init_params(100, 0, 36, 5);
  CHECK(a == b);
  CHECK(a != init_params(100, 0, 36, 6));
  const double lim = std::sqrt(6.0 / 136.0);
  for (double v : a.layers[0].weight.data) REQUIRE(std::abs(v) <= lim);
  for (double v : a.layers[0].bias) CHECK(v == 0.0);
  const auto h = init_params(100, 20, 36, 5);
  REQUIRE(h.layers.size() == 2);
  CHECK(h.layers[0].weight.rows == 20);
  CHECK(h.layers[1].weight.cols == 20);
}

TEST_CASE("blend ratio boundaries and counts") {
  const auto real = glyph_data(40, 4, 1);
  const auto synth = glyph_data(60, 4, 2);
  TrainConfig c;
  c.classes = 4;
  c.epochs = 1;
  c.image_size = 32;
  c.blend_ratio = 0;
  auto r = train(real, synth, c);
  CHECK(r.real_used == 40);
  CHECK(r.synthetic_used == 0);
  c.blend_ratio = 1;
  r = train(real, synth, c);
  CHECK(r.real_used == 0);
  CHECK(r.synthetic_used == 60);
  c.blend_ratio = 0.3;
  c.train_size = 50;
  r = train(real, synth, c);
  CHECK(r.synthetic_used == 15);
  CHECK(r.real_used == 35);
  c.blend_ratio = 0.25;
  c.train_size = 0;
  CHECK(blend_counts(40, 60, c) == std::pair<std::size_t, std::size_t>{40, 14});  // largest n = 54
  c.blend_ratio = 1.0 / 3;
  c.train_size = 10;
  CHECK(blend_counts(40, 60, c).second == 4);  // ceil(3.33)

  c.blend_ratio = 1;
  c.train_size = 0;
  const TrainingData empty{Matrix(0, 32 * 32), {}, {}};
  CHECK_THROWS_AS(train(real, empty, c), InputError);
  c.blend_ratio = 0.5;
  c.train_size = 100;
  CHECK_THROWS_AS(train(real, synth, c), InputError);
  c.blend_ratio = 0;
  c.train_size = 0;
  CHECK_THROWS_AS(train(empty, synth, c), InputError);
}

TEST_CASE("training is deterministic and identical serial vs parallel") {
  const auto d = glyph_data(64, 12, 3);
  TrainConfig c;
  c.classes = 12;
  c.epochs = 3;
  c.hidden_units = 8;
  c.learning_rate = 0.01;
  c.kernel = KernelConfig{};
  const auto a = train(d, {}, c);
  const auto b = train(d, {}, c);
  CHECK(dump(a.params) == dump(b.params));
  c.exec = Exec::Serial;
  const auto s = train(d, {}, c);
  CHECK(dump(a.params) == dump(s.params));
  for (std::size_t e = 0; e < a.log.size(); ++e) CHECK(a.log[e].loss == s.log[e].loss);
  c.seed = 2;
  CHECK(dump(train(d, {}, c).params) != dump(a.params));
}

TEST_CASE("linear model fits 200 separable glyphs at K=4") {
  const auto d = glyph_data(200, 4, 8, 64, false);
  // The data admit a linear rule: an independent perceptron separates them.
  CHECK(one_vs_rest_perceptron(d, 4, 500) >= 0.95);

  TrainConfig c;
  c.classes = 4;
  c.epochs = 50;
  c.learning_rate = 0.02;
  c.batch_size = 16;
  c.seed = 3;
  const auto r = train(d, {}, c);
  CHECK(r.log.size() == 50);
  CHECK(r.log.back().loss < r.log.front().loss);
  CHECK(accuracy(r.params, d) >= 0.95);
}

TEST_CASE("one SGD step on one example lowers its loss at lr=1e-4") {
  Rng rng(77);
  for (int t = 0; t < 50; ++t) {
    const int k = t % 3 == 0 ? 4 : 12;
    TrainingData d = random_pool(rng, 1, 40, k);
    TrainConfig c;
    c.classes = k;
    c.epochs = 1;
    c.batch_size = 1;
    c.learning_rate = 1e-4;
    c.seed = static_cast<std::uint64_t>(t);
    c.hidden_units = t % 2 ? 6 : 0;
    if (t % 4 >= 2) c.kernel = KernelConfig{2.0, KernelVariant::SquaredDistance, {}};
    const auto r = train(d, {}, c);
    LogitsBatch b{forward_logits(r.params, d.features), d.labels};
    const double after = weighted_softmax_loss(b, c.weight_matrix()).mean;
    CHECK(after < r.log[0].loss);
  }
}

TEST_CASE("identity kernel reproduces an independent plain cross-entropy trainer") {
  const auto d = glyph_data(96, 12, 21, 16);
  TrainConfig c;
  c.classes = 12;
  c.epochs = 8;
  c.batch_size = 10;
  c.learning_rate = 0.05;
  c.seed = 9;
  const auto r = train(d, {}, c);
  oracle::PlainTrainer ref;
  ref.run(d.features, d.labels, 12, 0.05, 8, 10, 9);
  REQUIRE(ref.epoch_loss.size() == r.log.size());
  for (std::size_t e = 0; e < r.log.size(); ++e) {
    CHECK(r.log[e].loss == doctest::Approx(ref.epoch_loss[e]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < ref.weight.size(); ++i) {
    REQUIRE(r.params.layers[0].weight.data[i] == doctest::Approx(ref.weight[i]).epsilon(1e-9));
  }
}

TEST_CASE("plain SoftMax and a zero-radius kernel train identically") {
  const auto d = glyph_data(48, 36, 5, 16);
  TrainConfig sm;
  sm.classes = 36;
  sm.epochs = 4;
  sm.learning_rate = 0.05;
  TrainConfig trunc0 = sm;
  trunc0.kernel = KernelConfig{2.0, KernelVariant::SquaredDistance, 0};
  CHECK(dump(train(d, {}, sm).params) == dump(train(d, {}, trunc0).params));
  TrainConfig wsm = sm;
  wsm.kernel = KernelConfig{};
  CHECK(dump(train(d, {}, sm).params) != dump(train(d, {}, wsm).params));
}

TEST_CASE("divergence raises an error naming the epoch") {
  const auto d = glyph_data(32, 4, 5, 16);
  TrainConfig c;
  c.classes = 4;
  c.epochs = 5;
  c.learning_rate = 1e308;
  try {
    train(d, {}, c);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(e.epoch() <= 5);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("predict on a zero model and under batch permutation") {
  ModelParams p = init_params(10, 0, 6, 1);
  for (auto& v : p.layers[0].weight.data) v = 0;
  Matrix x(3, 10, 0.5);
  const Prediction z = predict(p, x);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(z.bins[n] == 0);
    for (int k = 0; k < 6; ++k) CHECK(z.probabilities(n, k) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  }
  CHECK_THROWS_AS(predict(p, Matrix(2, 11)), InputError);

  Rng rng(4);
  const auto q = init_params(10, 5, 6, 2);
  Matrix a(8, 10);
  for (auto& v : a.data) v = rng.uniform01();
  Matrix b(8, 10);
  for (std::size_t n = 0; n < 8; ++n) {
    for (std::size_t i = 0; i < 10; ++i) b(n, i) = a(7 - n, i);
  }
  const auto pa = predict(q, a), pb = predict(q, b);
  for (std::size_t n = 0; n < 8; ++n) {
    CHECK(pa.bins[n] == pb.bins[7 - n]);
    for (int k = 0; k < 6; ++k) CHECK(pa.probabilities(n, k) == pb.probabilities(7 - n, k));
  }
}

TEST_CASE("model binary format") {
  const auto p = init_params(64, 7, 12, 3);
  const std::string bytes = dump(p);
  CHECK(bytes.size() == 16 + 8 * (7 * 64 + 7 + 12 * 7 + 12));
  CHECK(bytes.substr(0, 4) == "VPKM");
  CHECK(bytes[4] == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 64);
  CHECK(bytes[12] == 7);
  CHECK(bytes[14] == 12);
  std::istringstream in(bytes);
  const auto back = read_model(in);
  CHECK(back == p);
  CHECK(dump(back) == bytes);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_model(truncated), InputError);
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_model(trailing), InputError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream magic(bad);
  CHECK_THROWS_AS(read_model(magic), InputError);
}

TEST_CASE("training log format") {
  std::ostringstream os;
  write_training_log(os, {{1, 0.5, 10.0}, {2, 0.25, 5.5}});
  CHECK(os.str() == "epoch,loss,train_mae\n1,0.5,10\n2,0.25,5.5\n");
}
