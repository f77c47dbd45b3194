// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vpkit/balance.hpp"
#include "vpkit/circular.hpp"
#include "vpkit/cli.hpp"
#include "vpkit/glyph.hpp"
#include "vpkit/loss.hpp"
#include "vpkit/metrics.hpp"
#include "vpkit/rendergen.hpp"
#include "vpkit/trainer.hpp"

using namespace vpkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

LogitsBatch random_batch(Rng& rng, std::size_t n, int k, double scale) {
  LogitsBatch b{Matrix(n, static_cast<std::size_t>(k)), {}};
  for (auto& v : b.z.data) v = rng.uniform(-scale, scale);
  for (std::size_t i = 0; i < n; ++i) b.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
  return b;
}

// ---------------------------------------------------------------- gradient

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(1, "acceptance/gradient"));
  constexpr double kStep = 1e-5;
  // Relative error |g - fd| / max(|g|, |fd|, floor). Entries below the floor
  // are all rounding noise in the difference quotient (about 1e-16 / h).
  constexpr double kFloor = 1e-8;
  double worst = 0;
  int instances = 0;
  for (int k : {4, 12, 36, 360}) {
    for (double sigma : {2.0, 3.0, 4.0, 10.0, 15.0}) {
      for (auto variant : {KernelVariant::SquaredDistance, KernelVariant::LiteralPaper}) {
        KernelConfig cfg;
        cfg.sigma = sigma;
        cfg.variant = variant;
        const WeightMatrix w = build_weight_matrix(CircularLabelSpace(k), cfg);
        // The oracle builds its own weights from the formula.
        std::vector<double> ow(static_cast<std::size_t>(k) * k);
        for (int a = 0; a < k; ++a) {
          for (int b = 0; b < k; ++b) {
            ow[static_cast<std::size_t>(a) * k + b] =
                oracle::kernel(a, b, k, sigma, variant == KernelVariant::SquaredDistance);
          }
        }
        for (int rep = 0; rep < 3; ++rep) {
          const LogitsBatch b = random_batch(rng, 1 + rng.below(4), k, 1.0 + 2.0 * rep);
          const Matrix g = weighted_softmax_gradient(b, w);
          const Matrix fd = oracle::fd_gradient_rowwise(b.z, b.labels, ow, kStep);
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double den = std::max({std::abs(g.data[i]), std::abs(fd.data[i]), kFloor});
            worst = std::max(worst, std::abs(g.data[i] - fd.data[i]) / den);
          }
          ++instances;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {instances >= 100 && worst < 1e-5 && secs < 10.0,
          fmt::format("{} instances, max rel err {:.2e} (< 1e-5), {:.2f} s (< 10 s)", instances, worst, secs)};
}

// ---------------------------------------------------------------- reduction

Outcome reduction_identity() {
  Rng rng(derive_seed(1, "acceptance/reduction"));
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng.below(359));
    const LogitsBatch b = random_batch(rng, 1 + rng.below(64), k, rng.uniform(0.1, 20.0));
    const double lib = weighted_softmax_loss(b, WeightMatrix::identity(k)).mean;
    const double ref = oracle::cross_entropy(b.z, b.labels);
    worst = std::max(worst, std::abs(lib - ref));
  }
  return {worst <= 1e-12, fmt::format("1000 batches, max |wSM(I) - CE| = {:.2e} (<= 1e-12)", worst)};
}

// ---------------------------------------------------------------- min-loss law

Outcome min_loss_law() {
  Rng rng(derive_seed(1, "acceptance/minloss"));
  double worst = 0;
  int rows = 0;
  for (int k = 2; k <= 12; ++k) {
    std::vector<std::vector<double>> ws;
    for (double sigma : {1.0, 2.0, 4.0}) {
      for (auto variant : {KernelVariant::SquaredDistance, KernelVariant::LiteralPaper}) {
        // K must divide 360, so 7 and 11 are replaced by 8 and 12.
        const WeightMatrix m = build_weight_matrix(CircularLabelSpace(k == 7 || k == 11 ? k + 1 : k),
                                                   KernelConfig{sigma, variant, std::nullopt});
        ws.emplace_back(m.row(0).begin(), m.row(0).end());
      }
    }
    std::vector<double> rnd(static_cast<std::size_t>(k));
    for (auto& v : rnd) v = rng.uniform(0.01, 1.0);
    ws.push_back(rnd);
    for (const auto& w : ws) {
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      const auto p = oracle::minimize_on_simplex(w);
      for (std::size_t j = 0; j < w.size(); ++j) worst = std::max(worst, std::abs(p[j] - w[j] / sum));
      ++rows;
    }
  }
  return {worst <= 1e-6, fmt::format("{} weight rows with K <= 12, max |p - w/sum(w)| = {:.2e} (<= 1e-6)", rows, worst)};
}

// ---------------------------------------------------------------- effective width

Outcome effective_width() {
  bool ok = true;
  std::string detail;
  for (auto [sigma, width] : {std::pair{2.0, 6}, std::pair{4.0, 12}, std::pair{10.0, 30}}) {
    const WeightMatrix w = build_weight_matrix(CircularLabelSpace(360), KernelConfig{sigma, {}, std::nullopt});
    int first_below = -1;
    for (int d = 0; d <= 180; ++d) {
      const double v = w(0, d);
      if (d > 1.5 * sigma && !(v < 0.11)) ok = false;
      if (d <= 1.48 * sigma && !(v >= 0.11)) ok = false;
      if (first_below < 0 && v < 0.11) first_below = d;
    }
    ok = ok && 2 * first_below == width;
    detail += fmt::format("{}sigma={:g} -> {} deg", detail.empty() ? "" : ", ", sigma, 2 * first_below);
  }
  return {ok, detail + " (expected 6, 12, 30)"};
}

// ---------------------------------------------------------------- SM vs wSM

double test_mae(const ModelParams& params, const DatasetManifest& test, const Matrix& features) {
  const CircularLabelSpace space(params.classes);
  const Prediction p = predict(params, features);
  std::vector<double> deg;
  for (int b : p.bins) deg.push_back(space.bin_to_degrees(b));
  return median_angular_error(deg, test.azimuths());
}

// Fixed training budget for both losses. With enough epochs a linear model
// classifies every 64x64 glyph correctly under either loss and both sit on
// the bin-quantization floor (about 2.43 deg) and the comparison says
// nothing. The budget below keeps both in the data- and step-limited regime
// where errors remain.
TrainConfig trend_config(std::uint64_t seed, std::size_t n, bool weighted) {
  TrainConfig c;
  c.classes = 36;
  c.learning_rate = 0.002;
  c.epochs = 5;
  c.batch_size = 32;
  c.seed = seed;
  c.train_size = n;
  c.image_size = 64;
  if (weighted) c.kernel = KernelConfig{2.0, KernelVariant::SquaredDistance, std::nullopt};
  return c;
}

Outcome sm_vs_wsm() {
  const auto t0 = Clock::now();
  const std::vector<double> flat(36, 1.0);
  GlyphDatasetOptions to;
  to.stratified = true;
  to.id_prefix = "t";
  const DatasetManifest test = make_glyph_dataset(720, flat, derive_seed(100, "acceptance/test"), to);
  const Matrix test_x = load_features(test, 64);
  int wins = 0, runs = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const DatasetManifest train_m = make_glyph_dataset(2000, flat, derive_seed(seed, "acceptance/train"));
    const TrainingData data = make_training_data(train_m, 64);
    for (std::size_t n : {500, 2000}) {
      const double sm = test_mae(train(data, {}, trend_config(seed, n, false)).params, test, test_x);
      const double wsm = test_mae(train(data, {}, trend_config(seed, n, true)).params, test, test_x);
      wins += wsm <= sm;
      ++runs;
      detail += fmt::format(" [seed {} n {}: SM {:.2f} wSM {:.2f}]", seed, n, sm, wsm);
    }
  }
  const double secs = seconds_since(t0);
  return {wins >= 5 && secs < 300,
          fmt::format("wSM <= SM in {}/{} runs (>= 5), {:.1f} s (< 300 s);{}", wins, runs, secs, detail)};
}

// ---------------------------------------------------------------- balancing

int run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "vpkit " << fmt::format("{}", fmt::join(args, " ")) << ": " << e.str();
  return code;
}

Outcome balancing(const fs::path& dir) {
  Rng rng(derive_seed(1, "acceptance/balance"));
  int flat_ok = 0, flat_total = 0;
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng.below(40));
    std::vector<std::size_t> h(static_cast<std::size_t>(k));
    DatasetManifest real, pool;
    for (int b = 0; b < k; ++b) {
      h[static_cast<std::size_t>(b)] = rng.below(100);
      for (std::size_t i = 0; i < h[static_cast<std::size_t>(b)]; ++i) {
        real.rows.push_back({fmt::format("r{}-{}", b, i), SampleSource::Real, GlyphRef{0, 0}, {}, 0, b});
      }
      for (int i = 0; i < 100; ++i) {
        pool.rows.push_back({fmt::format("s{}-{}", b, i), SampleSource::Synthetic, GlyphRef{0, 0}, {}, 0, b});
      }
    }
    const auto after = bin_counts(apply_plan(real, pool, plan_adaptive(h), 3), k);
    flat_ok += std::adjacent_find(after.begin(), after.end(), std::not_equal_to<>()) == after.end();
    ++flat_total;
  }

  int minimal_ok = 0, minimal_total = 0;
  for (int k = 1; k <= 6; ++k) {
    for (int t = 0; t < (k <= 4 ? 50 : 10); ++t) {
      std::vector<int> h(static_cast<std::size_t>(k));
      std::vector<std::size_t> hs;
      for (auto& v : h) hs.push_back(static_cast<std::size_t>(v = static_cast<int>(rng.below(9))));
      minimal_ok += static_cast<long long>(plan_adaptive(hs).total()) == oracle::brute_force_min_additions(h, 8);
      ++minimal_total;
    }
  }

  // Budgeted run through the command line, read back from its log line.
  const std::vector<double> peaks{0, 180};
  GlyphDatasetOptions ro;
  ro.source = SampleSource::Real;
  ro.id_prefix = "r";
  write_manifest_file(dir / "real.csv",
                      make_glyph_dataset(4000, peaked_bin_weights(36, peaks, 4.0), derive_seed(1, "acceptance/real"), ro));
  GlyphDatasetOptions so;
  so.stratified = true;
  so.source = SampleSource::Synthetic;
  so.id_prefix = "s";
  write_manifest_file(dir / "pool.csv", make_glyph_dataset(36 * 200, std::vector<double>(36, 1.0), 2, so));
  std::string log;
  const int code = run({"balance", "--real", (dir / "real.csv").string(), "--pool", (dir / "pool.csv").string(),
                        "--budget", "2000", "--seed", "1", "--out", (dir / "balanced.csv").string()},
                       &log);
  const bool logged = code == 0 && log.find("additions_total=2000\n") != std::string::npos &&
                      read_manifest_file(dir / "balanced.csv").size() == 4000 + 2000;

  return {flat_ok == flat_total && minimal_ok == minimal_total && logged,
          fmt::format("flat {}/{}, minimal vs brute force {}/{}, budget run logged additions_total=2000: {}", flat_ok,
                      flat_total, minimal_ok, minimal_total, logged ? "yes" : "no")};
}

// ---------------------------------------------------------------- entropy

Outcome entropy_diagnostics() {
  const std::vector<double> peaks{0, 180};
  const auto bimodal_w = peaked_bin_weights(36, peaks, 4.0);
  const std::vector<double> flat(36, 1.0);
  GlyphDatasetOptions to;
  to.stratified = true;
  to.id_prefix = "t";
  const DatasetManifest test = make_glyph_dataset(720, flat, derive_seed(200, "acceptance/test"), to);
  const Matrix test_x = load_features(test, 64);
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    GlyphDatasetOptions ro;
    ro.source = SampleSource::Real;
    ro.id_prefix = "r";
    const DatasetManifest real = make_glyph_dataset(1000, bimodal_w, derive_seed(seed, "acceptance/bimodal"), ro);
    GlyphDatasetOptions so;
    so.stratified = true;
    so.source = SampleSource::Synthetic;
    so.id_prefix = "s";
    const auto h = bin_counts(real, 36);
    const std::size_t top = *std::max_element(h.begin(), h.end());
    const DatasetManifest pool = make_glyph_dataset(36 * top, flat, derive_seed(seed, "acceptance/pool"), so);
    const DatasetManifest balanced = apply_plan(real, pool, plan_adaptive(h), seed);

    auto entropy_of = [&](const DatasetManifest& m) {
      TrainConfig c = trend_config(seed, 0, false);
      const ModelParams p = train(make_training_data(m, 64), {}, c).params;
      const CircularLabelSpace space(36);
      std::vector<double> deg;
      for (int b : predict(p, test_x).bins) deg.push_back(space.bin_to_degrees(b));
      const auto r = evaluate(deg, test.azimuths(), 36, 10.0);
      return r.accuracy_entropy.value_or(0.0);
    };
    const double hb = entropy_of(real);
    const double hu = entropy_of(balanced);
    wins += hb < hu;
    detail += fmt::format(" [seed {}: bimodal {:.4f} balanced {:.4f}]", seed, hb, hu);
  }
  return {wins >= 2, fmt::format("bimodal < balanced in {}/3 seeds (>= 2), ln 36 = {:.4f};{}", wins, std::log(36.0),
                                 detail)};
}

// ---------------------------------------------------------------- generator

Outcome generator_contracts() {
  bool views_ok = true;
  for (const char* id : {"car_00", "car_01", "x"}) views_ok = views_ok && enumerate_views(id).size() == 1800;
  const auto views = enumerate_views("m");
  const std::uint64_t root = derive_seed(1, "acceptance/jobs");
  std::size_t bad = 0, vig = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const View v = views[i % views.size()];
    const std::string id = fmt::format("model{}", i / views.size());
    const auto j = sample_job(id, v, QualityTier::ComplexMaterialDirectional, job_seed(root, id, v));
    const bool in = j.f_stop >= 2.7 && j.f_stop <= 8.3 && j.shutter_s >= 1.0 / 200 && j.shutter_s <= 1.0 / 25 &&
                    j.luminous_power_lm && *j.luminous_power_lm >= 1400 && *j.luminous_power_lm <= 10000 &&
                    j.light_elevation_deg && *j.light_elevation_deg >= 10 && *j.light_elevation_deg <= 80 &&
                    j.light_azimuth_deg && *j.light_azimuth_deg >= 0 && *j.light_azimuth_deg < 360;
    bad += !in;
    vig += j.vignetting;
  }
  const double rate = static_cast<double>(vig) / 10000.0;
  return {views_ok && bad == 0 && std::abs(rate - 0.25) <= 0.02,
          fmt::format("1800 views per model: {}, out-of-range jobs {}/10000, vignetting rate {:.4f} (0.25 +- 0.02)",
                      views_ok ? "yes" : "no", bad, rate)};
}

// ---------------------------------------------------------------- determinism

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Every regular file under `dir`, by relative path, with its bytes.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> v;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) v.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(v.begin(), v.end());
  return v;
}

Outcome determinism(const fs::path& root) {
  // Runs the whole chain in a fresh directory and records stdout per step.
  auto chain = [](const fs::path& d) {
    fs::create_directories(d);
    auto p = [&](const char* name) { return (d / name).string(); };
    std::ofstream(d / "models.txt") << "car_a\ncar_b\ncar_c\n";
    std::ofstream(d / "train.cfg") << "loss=wsm\nsigma=2\nepochs=3\nlearning_rate=0.01\n";
    std::ofstream(d / "aug.cfg") << "occlusion_fraction=0.5\n";
    std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
        {"glyphs", {"glyphs", "--n", "400", "--distribution", "peaked", "--source", "real", "--seed", "7", "--out",
                    p("real.csv"), "--export-dir", p("imgs"), "--size", "32"}},
        {"glyphs", {"glyphs", "--n", "2160", "--stratified", "--source", "synthetic", "--seed", "7", "--out",
                    p("pool.csv")}},
        {"glyphs", {"glyphs", "--n", "180", "--stratified", "--prefix", "t", "--seed", "8", "--out", p("test.csv")}},
        {"gen-jobs", {"gen-jobs", "--models", p("models.txt"), "--seed", "7", "--holdout", "2", "--out", p("jobs.jsonl")}},
        {"augment", {"augment", "--in", p("imgs"), "--config", p("aug.cfg"), "--seed", "7", "--out", p("aug"), "--audit",
                     p("audit.jsonl")}},
        {"balance", {"balance", "--real", p("real.csv"), "--pool", p("pool.csv"), "--seed", "7", "--out",
                     p("balanced.csv"), "--plan-out", p("plan.json")}},
        {"train", {"train", "--real", p("balanced.csv"), "--config", p("train.cfg"), "--size", "32", "--seed", "7",
                   "--out", p("model.bin"), "--log", p("train.log")}},
        {"eval", {"eval", "--manifest", p("test.csv"), "--model", p("model.bin"), "--label", "wsm", "--out",
                  p("wsm.report"), "--per-bin-csv", p("wsm.csv"), "--predictions-out", p("pred.csv")}},
        {"report", {"report", "--in", p("wsm.report"), "--out", p("table.txt")}},
    };
    std::vector<std::pair<std::string, std::string>> outs;
    for (const auto& [name, args] : steps) {
      std::string out;
      const int code = run(args, &out);
      outs.emplace_back(name, code == 0 ? out : fmt::format("exit {}", code));
    }
    return outs;
  };
  const auto a = chain(root / "a");
  const auto b = chain(root / "b");
  const auto sa = snapshot(root / "a");
  const auto sb = snapshot(root / "b");
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second.starts_with("exit") || a[i] != b[i]) failed.push_back(a[i].first);
  }
  bool files_equal = sa.size() == sb.size();
  for (std::size_t i = 0; files_equal && i < sa.size(); ++i) files_equal = sa[i] == sb[i];
  return {failed.empty() && files_equal,
          fmt::format("7 subcommands, {} output files; stdout mismatches: {}; files identical: {}", sa.size(),
                      failed.empty() ? "none" : fmt::format("{}", fmt::join(failed, ","))
                      , files_equal ? "yes" : "no")};
}

}  // namespace

int main() {
  const fs::path scratch = testutil::fresh_dir("acceptance");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"reduction identity", reduction_identity},
      {"min-loss law", min_loss_law},
      {"effective width", effective_width},
      {"SM vs wSM trend", sm_vs_wsm},
      {"balancing", [&] { return balancing(scratch / "balance"); }},
      {"entropy diagnostics", entropy_diagnostics},
      {"generator contracts", generator_contracts},
      {"determinism", [&] { return determinism(scratch / "determinism"); }},
  };
  fs::create_directories(scratch / "balance");
  int failures = 0;
  const char* only = std::getenv("VPKIT_ACCEPTANCE_ONLY");  // run one criterion while debugging
  for (const auto& [name, fn] : criteria) {
    if (only && name != only) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  fs::remove_all(scratch.parent_path());
  return failures == 0 ? 0 : 1;
}
