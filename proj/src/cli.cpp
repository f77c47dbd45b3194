#include "vpkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vpkit/augment.hpp"
#include "vpkit/balance.hpp"
#include "vpkit/config.hpp"
#include "vpkit/error.hpp"
#include "vpkit/glyph.hpp"
#include "vpkit/image.hpp"
#include "vpkit/metrics.hpp"
#include "vpkit/rendergen.hpp"
#include "vpkit/rng.hpp"
#include "vpkit/trainer.hpp"

namespace vpkit {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  return os;
}

std::vector<double> read_weights_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot open weights file " + p.string());
  std::vector<double> w;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      w.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw InputError("weights file: bad line '" + line + "'");
    }
  }
  return w;
}

std::vector<std::string> read_model_ids(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot open model list " + p.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  if (ids.empty()) throw InputError("model list is empty: " + p.string());
  return ids;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path().filename());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no images found in " + dir.string());
  return files;
}

// ---------------------------------------------------------------- glyphs

struct GlyphsArgs {
  std::size_t n = 360;
  int classes = 36;
  std::string distribution = "uniform";
  std::vector<double> peaks{0.0, 180.0};
  double concentration = 4.0;
  double floor = 0.02;
  std::string weights_file;
  bool stratified = false;
  std::string source = "glyph";
  std::string prefix;
  std::uint64_t seed = 1;
  std::string out;
  std::string export_dir;
  int size = 64;
};

void run_glyphs(const GlyphsArgs& a, std::ostream& out) {
  std::vector<double> weights;
  if (!a.weights_file.empty()) {
    weights = read_weights_file(a.weights_file);
  } else if (a.distribution == "uniform") {
    weights.assign(static_cast<std::size_t>(CircularLabelSpace(a.classes).size()), 1.0);
  } else if (a.distribution == "peaked") {
    weights = peaked_bin_weights(a.classes, a.peaks, a.concentration, a.floor);
  } else {
    throw InputError("glyphs: distribution must be uniform or peaked");
  }
  GlyphDatasetOptions opts;
  opts.stratified = a.stratified;
  opts.source = parse_source(a.source);
  opts.id_prefix = a.prefix.empty() ? std::string(to_string(opts.source)) : a.prefix;
  DatasetManifest m = make_glyph_dataset(a.n, weights, derive_seed(a.seed, "glyphs"), opts);

  if (!a.export_dir.empty()) {
    fs::create_directories(a.export_dir);
    for (auto& row : m.rows) {
      const GlyphImage g = render_glyph(row.glyph->theta_deg, a.size, row.glyph->seed);
      std::vector<std::uint8_t> gray(g.pixels.size());
      for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = static_cast<std::uint8_t>(std::lround(g.pixels[i] * 255.0));
      write_png_gray(fs::path(a.export_dir) / (row.sample_id + ".png"), g.width, g.height, gray);
    }
  }
  auto os = open_out(a.out);
  write_manifest(os, m);
  out << fmt::format("samples={}\n", m.size());
}

// ---------------------------------------------------------------- gen-jobs

struct GenJobsArgs {
  std::string models;
  std::string tier = "ComplexMaterialDirectional";
  std::uint64_t seed = 1;
  std::string out;
  std::optional<std::size_t> holdout;
  std::string split_out;
  std::optional<double> radius;
  std::vector<std::string> power_scale;
  int augment_copies = 5;
};

void run_gen_jobs(const GenJobsArgs& a, std::ostream& out) {
  const auto ids = read_model_ids(a.models);
  const QualityTier tier = parse_quality_tier(a.tier);
  std::map<std::string, double> scale;
  for (const auto& s : a.power_scale) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("--power-scale expects model=multiplier");
    double m = 0;
    try {
      m = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("--power-scale: bad multiplier in " + s);
    }
    if (!(m > 0)) throw InputError("--power-scale: multiplier must be > 0");
    scale[s.substr(0, eq)] = m;
  }
  if (a.augment_copies < 1) throw InputError("--augment-copies must be >= 1");
  std::optional<ModelSplit> split;
  if (a.holdout) split = make_split(ids, *a.holdout);
  {
    auto os = open_out(a.out);
    generate_jobs(os, ids, tier, derive_seed(a.seed, "gen-jobs"), scale, a.radius);
  }
  if (split) {
    const fs::path split_path = a.split_out.empty() ? fs::path(a.out + ".split.json") : fs::path(a.split_out);
    nlohmann::ordered_json j;
    j["train_model_ids"] = split->train_model_ids;
    j["test_model_ids"] = split->test_model_ids;
    j["views_per_model"] = kViewsPerModel;
    j["augment_copies"] = a.augment_copies;
    j["train_images"] = split->train_model_ids.size() * static_cast<std::size_t>(kViewsPerModel) *
                        static_cast<std::size_t>(a.augment_copies);
    j["test_images"] = split->test_model_ids.size() * static_cast<std::size_t>(kViewsPerModel);
    auto os = open_out(split_path);
    os << j.dump(2) << '\n';
    out << fmt::format("split_train={} split_test={}\n", split->train_model_ids.size(), split->test_model_ids.size());
  }
  out << fmt::format("jobs={}\n", ids.size() * static_cast<std::size_t>(kViewsPerModel));
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
  std::string in;
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::string audit;
  std::string box_areas;
  std::string corpus;
  std::string replay;
};

void run_augment(const AugmentArgs& a, std::ostream& out) {
  const auto files = list_images(a.in);
  fs::create_directories(a.out);
  if (!a.replay.empty()) {
    std::ifstream is(a.replay);
    if (!is) throw InputError("cannot open audit " + a.replay);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("audit: ") + e.what());
      }
      const fs::path name = j.at("image").get<std::string>();
      const fs::path corpus = j.contains("corpus") ? fs::path(j["corpus"].get<std::string>()) : fs::path(a.corpus);
      const RgbImage img = read_image(fs::path(a.in) / name);
      write_png(fs::path(a.out) / name.stem().concat(".png"), replay(img, augment_record_from_json(j.at("record")), corpus));
      ++n;
    }
    out << fmt::format("replayed={}\n", n);
    return;
  }
  AugmentConfig cfg;
  if (!a.config.empty()) apply_augment_config(read_key_values_file(a.config), cfg);
  if (!a.corpus.empty()) {
    cfg.occlusion_corpus = a.corpus;
    cfg.occlusion_source = OcclusionSource::ImageCorpus;
  }
  if (!a.box_areas.empty()) cfg.degrade_target_area = area_percentile(read_box_areas(a.box_areas), 0.3);
  cfg.validate();
  auto audit = open_out(a.audit);
  for (const auto& name : files) {
    const RgbImage img = read_image(fs::path(a.in) / name);
    const std::uint64_t seed = derive_seed(a.seed, "augment/" + name.string());
    const AugmentResult res = augment_pipeline(img, cfg, seed);
    write_png(fs::path(a.out) / fs::path(name).stem().concat(".png"), res.image);
    nlohmann::ordered_json j;
    j["image"] = name.string();
    j["seed"] = seed;
    if (res.record.occlusion && res.record.occlusion->source == OcclusionSource::ImageCorpus) {
      j["corpus"] = cfg.occlusion_corpus.string();
    }
    j["record"] = to_json(res.record);
    audit << j.dump() << '\n';
  }
  out << fmt::format("augmented={}\n", files.size());
}

// ---------------------------------------------------------------- balance

struct BalanceArgs {
  std::string real;
  std::string pool;
  std::string method = "adaptive";
  std::optional<std::size_t> budget;
  int classes = 36;
  std::uint64_t seed = 1;
  std::string out;
  std::string plan_out;
};

void run_balance(const BalanceArgs& a, std::ostream& out) {
  const CircularLabelSpace space(a.classes);
  const DatasetManifest real = read_manifest_file(a.real);
  const DatasetManifest pool = read_manifest_file(a.pool);
  real.validate(space);
  pool.validate(space);
  BalancePlan plan;
  if (a.method == "adaptive") {
    plan = plan_adaptive(bin_counts(real, a.classes), a.budget);
  } else if (a.method == "random") {
    if (!a.budget) throw InputError("balance: --budget is required for random balancing");
    plan = plan_random(*a.budget, a.classes, derive_seed(a.seed, "balance/plan"));
  } else {
    throw InputError("balance: method must be adaptive or random");
  }
  const DatasetManifest combined = apply_plan(real, pool, plan, derive_seed(a.seed, "balance/apply"));
  {
    auto os = open_out(a.out);
    write_manifest(os, combined);
  }
  if (!a.plan_out.empty()) {
    auto os = open_out(a.plan_out);
    os << to_json(plan).dump() << '\n';
  }
  out << fmt::format("method={}\nreal={}\nadditions_total={}\ncombined={}\n", a.method, real.size(), plan.total(),
                     combined.size());
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string real;
  std::string synth;
  std::string config;
  std::string out;
  std::string log;
  std::string base_dir;
  std::optional<std::string> loss;
  std::optional<double> sigma;
  std::optional<std::string> variant;
  std::optional<int> truncation;
  std::optional<double> blend;
  std::optional<int> classes;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<int> hidden;
  std::optional<std::uint64_t> seed;
  std::optional<int> size;
  std::optional<std::size_t> train_size;
  bool serial = false;
};

void run_train(const TrainArgs& a, std::ostream& out) {
  KeyValues kv;
  if (!a.config.empty()) kv = read_key_values_file(a.config);
  // Flags override the config file.
  auto set = [&kv](const char* key, const auto& v) {
    if (v) kv[key] = fmt::format("{}", *v);
  };
  set("loss", a.loss);
  set("sigma", a.sigma);
  set("variant", a.variant);
  set("truncation_radius", a.truncation);
  set("blend_ratio", a.blend);
  set("classes", a.classes);
  set("epochs", a.epochs);
  set("learning_rate", a.lr);
  set("batch_size", a.batch);
  set("hidden_units", a.hidden);
  set("seed", a.seed);
  set("image_size", a.size);
  set("train_size", a.train_size);
  TrainConfig cfg;
  apply_train_config(kv, cfg);
  if (a.serial) cfg.exec = Exec::Serial;
  cfg.validate();

  const CircularLabelSpace space(cfg.classes);
  auto load = [&](const std::string& path) {
    if (path.empty()) return TrainingData{Matrix(0, static_cast<std::size_t>(cfg.image_size) * cfg.image_size), {}, {}};
    const DatasetManifest m = read_manifest_file(path);
    m.validate(space);
    const fs::path base = a.base_dir.empty() ? fs::path(path).parent_path() : fs::path(a.base_dir);
    return make_training_data(m, cfg.image_size, base, cfg.exec);
  };
  const TrainingData real = load(a.real);
  const TrainingData synth = load(a.synth);
  const TrainResult res = train(real, synth, cfg);
  write_model_file(a.out, res.params);
  if (!a.log.empty()) {
    auto os = open_out(a.log);
    write_training_log(os, res.log);
  }
  out << fmt::format("loss={}\nreal_used={}\nsynthetic_used={}\nfinal_loss={}\nfinal_train_mae={}\n",
                     cfg.kernel ? "wsm" : "sm", res.real_used, res.synthetic_used, res.log.back().loss,
                     res.log.back().train_mae);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string manifest;
  std::string model;
  std::string predictions;
  std::string out;
  std::string per_bin_csv;
  std::string predictions_out;
  std::string label;
  std::string base_dir;
  int bins = 36;
  double tolerance = 10.0;
  int size = 64;
};

std::map<std::string, double> read_predictions(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot open predictions " + p.string());
  std::map<std::string, double> pred;
  std::string line;
  std::getline(is, line);
  if (line.rfind("sample_id,", 0) != 0) throw InputError("predictions: expected a header starting with sample_id,");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = line.find(',');
    if (c == std::string::npos) throw InputError("predictions: bad line '" + line + "'");
    const auto c2 = line.find(',', c + 1);
    try {
      pred[line.substr(0, c)] = std::stod(line.substr(c + 1, c2 == std::string::npos ? std::string::npos : c2 - c - 1));
    } catch (const std::exception&) {
      throw InputError("predictions: bad angle in '" + line + "'");
    }
  }
  return pred;
}

void run_eval(const EvalArgs& a, std::ostream& out) {
  if (a.model.empty() == a.predictions.empty()) throw InputError("eval: give exactly one of --model or --predictions");
  const DatasetManifest m = read_manifest_file(a.manifest);
  if (m.empty()) throw InputError("eval: manifest is empty");
  std::vector<double> pred_deg(m.size());
  std::vector<int> pred_bin(m.size(), -1);
  if (!a.model.empty()) {
    const ModelParams params = read_model_file(a.model);
    const int side = static_cast<int>(std::lround(std::sqrt(params.input_dim)));
    if (side * side != params.input_dim) throw InputError("eval: model input is not a square image");
    const CircularLabelSpace space(params.classes);
    m.validate(space);
    const fs::path base = a.base_dir.empty() ? fs::path(a.manifest).parent_path() : fs::path(a.base_dir);
    const Prediction p = predict(params, load_features(m, side, base));
    for (std::size_t i = 0; i < m.size(); ++i) {
      pred_bin[i] = p.bins[i];
      pred_deg[i] = space.bin_to_degrees(p.bins[i]);
    }
  } else {
    const auto pred = read_predictions(a.predictions);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto it = pred.find(m.rows[i].sample_id);
      if (it == pred.end()) throw InputError("eval: no prediction for " + m.rows[i].sample_id);
      pred_deg[i] = it->second;
    }
  }
  EvalReport r = evaluate(pred_deg, m.azimuths(), a.bins, a.tolerance);
  r.label = a.label;
  if (a.out.empty()) {
    write_report_text(out, r);
  } else {
    auto os = open_out(a.out);
    write_report_text(os, r);
  }
  if (!a.per_bin_csv.empty()) {
    auto os = open_out(a.per_bin_csv);
    write_per_bin_csv(os, r);
  }
  if (!a.predictions_out.empty()) {
    auto os = open_out(a.predictions_out);
    os << "sample_id,pred_deg,pred_bin,gt_deg\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      os << fmt::format("{},{},{},{}\n", m.rows[i].sample_id, pred_deg[i],
                        pred_bin[i] >= 0 ? fmt::format("{}", pred_bin[i]) : std::string(), m.rows[i].azimuth_deg);
    }
  }
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

void write_report_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  const std::size_t bins = reports.front().per_bin_accuracy.size();
  for (const auto& r : reports) {
    if (r.per_bin_accuracy.size() != bins) throw InputError("report: inputs use different bin counts");
  }
  os << "# Median angular error\n";
  os << fmt::format("{:<28} {:>8} {:>10} {:>9} {:>9}\n", "configuration", "n", "MAE_deg", "entropy", "max");
  const double max_h = std::log(static_cast<double>(bins));
  for (const auto& r : reports) {
    os << fmt::format("{:<28} {:>8} {:>10.2f} {:>9} {:>9.4f}\n", r.label, r.n_evaluated, r.median_angular_error_deg,
                      r.accuracy_entropy ? fmt::format("{:.4f}", *r.accuracy_entropy) : std::string("nan"), max_h);
  }
  os << "\n# Accuracy by ground-truth angle\n";
  os << fmt::format("{:<10}", "range_deg");
  for (const auto& r : reports) os << fmt::format(" {:>14}", r.label.substr(0, 14));
  os << '\n';
  const double width = 360.0 / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    os << fmt::format("{:<10}", fmt::format("{:g}-{:g}", b * width, (b + 1) * width));
    for (const auto& r : reports) {
      os << fmt::format(" {:>14}", r.per_bin_accuracy[b] ? fmt::format("{:.3f}", *r.per_bin_accuracy[b]) : "-");
    }
    os << '\n';
  }
}

void run_report(const ReportArgs& a, std::ostream& out) {
  std::vector<EvalReport> reports;
  for (const auto& p : a.inputs) {
    std::ifstream is(p);
    if (!is) throw InputError("cannot open report " + p);
    EvalReport r = read_report_text(is);
    if (r.label.empty()) r.label = fs::path(p).stem().string();
    reports.push_back(std::move(r));
  }
  if (a.out.empty()) {
    write_report_table(out, reports);
  } else {
    auto os = open_out(a.out);
    write_report_table(os, reports);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Viewpoint-estimation toolkit: weighted SoftMax, render jobs, augmentation, balancing, evaluation"};
  app.require_subcommand(1);

  GlyphsArgs ga;
  auto* glyphs = app.add_subcommand("glyphs", "Generate a rotated-glyph dataset manifest");
  glyphs->add_option("--n", ga.n, "Number of samples");
  glyphs->add_option("-k,--classes", ga.classes, "Azimuth bins K");
  glyphs->add_option("--distribution", ga.distribution, "uniform or peaked");
  glyphs->add_option("--peaks", ga.peaks, "Peak angles (degrees) for peaked")->delimiter(',');
  glyphs->add_option("--concentration", ga.concentration, "Peak concentration");
  glyphs->add_option("--floor", ga.floor, "Weight floor added to every bin");
  glyphs->add_option("--weights", ga.weights_file, "File of K bin weights, one per line");
  glyphs->add_flag("--stratified", ga.stratified, "Deterministic per-bin counts");
  glyphs->add_option("--source", ga.source, "real, synthetic or glyph");
  glyphs->add_option("--prefix", ga.prefix, "Sample id prefix");
  glyphs->add_option("--seed", ga.seed, "Root seed");
  glyphs->add_option("--out", ga.out, "Manifest CSV")->required();
  glyphs->add_option("--export-dir", ga.export_dir, "Also write 8-bit grayscale PNGs here");
  glyphs->add_option("--size", ga.size, "Image side for export");

  GenJobsArgs ja;
  auto* gen = app.add_subcommand("gen-jobs", "Emit render-job specs as JSON Lines");
  gen->add_option("--models", ja.models, "File with one model id per line")->required();
  gen->add_option("--tier", ja.tier, "SimpleMaterialAmbient, ComplexMaterialAmbient or ComplexMaterialDirectional");
  gen->add_option("--seed", ja.seed, "Root seed");
  gen->add_option("--out", ja.out, "Job JSONL")->required();
  gen->add_option("--holdout", ja.holdout, "Index of the held-out test model");
  gen->add_option("--split-out", ja.split_out, "Split JSON (default: <out>.split.json)");
  gen->add_option("--radius", ja.radius, "Camera sphere radius, passed through");
  gen->add_option("--power-scale", ja.power_scale, "model=multiplier for luminous power");
  gen->add_option("--augment-copies", ja.augment_copies, "Augmented copies per training view");

  AugmentArgs aa;
  auto* aug = app.add_subcommand("augment", "Augment a directory of images");
  aug->add_option("--in", aa.in, "Input image directory")->required();
  aug->add_option("--config", aa.config, "key=value AugmentConfig file");
  aug->add_option("--seed", aa.seed, "Root seed");
  aug->add_option("--out", aa.out, "Output directory")->required();
  aug->add_option("--audit", aa.audit, "Audit JSONL");
  aug->add_option("--box-areas", aa.box_areas, "Box areas; degrade targets their 30th percentile");
  aug->add_option("--corpus", aa.corpus, "Occlusion patch corpus directory");
  aug->add_option("--replay", aa.replay, "Replay an audit file instead of sampling");

  BalanceArgs ba;
  auto* bal = app.add_subcommand("balance", "Balance a manifest with samples from a synthetic pool");
  bal->add_option("--real", ba.real, "Manifest to balance")->required();
  bal->add_option("--pool", ba.pool, "Synthetic pool manifest")->required();
  bal->add_option("--method", ba.method, "adaptive or random");
  bal->add_option("--budget", ba.budget, "Number of additions");
  bal->add_option("-k,--classes", ba.classes, "Azimuth bins K");
  bal->add_option("--seed", ba.seed, "Root seed");
  bal->add_option("--out", ba.out, "Combined manifest")->required();
  bal->add_option("--plan-out", ba.plan_out, "Plan JSONL");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a linear or one-hidden-layer classifier");
  tr->add_option("--real", ta.real, "Real manifest");
  tr->add_option("--synth", ta.synth, "Synthetic manifest");
  tr->add_option("--config", ta.config, "key=value TrainConfig file");
  tr->add_option("--out", ta.out, "Model binary")->required();
  tr->add_option("--log", ta.log, "Training log CSV");
  tr->add_option("--base-dir", ta.base_dir, "Directory for relative image paths");
  tr->add_option("--loss", ta.loss, "sm or wsm");
  tr->add_option("--sigma", ta.sigma, "Kernel width in bins");
  tr->add_option("--variant", ta.variant, "squared or literal");
  tr->add_option("--truncation", ta.truncation, "Kernel truncation radius in bins");
  tr->add_option("--blend", ta.blend, "Fraction of synthetic samples");
  tr->add_option("-k,--classes", ta.classes, "Azimuth bins K");
  tr->add_option("--epochs", ta.epochs, "Epochs");
  tr->add_option("--lr", ta.lr, "Learning rate");
  tr->add_option("--batch", ta.batch, "Batch size");
  tr->add_option("--hidden", ta.hidden, "Hidden units (0 = linear)");
  tr->add_option("--seed", ta.seed, "Root seed");
  tr->add_option("--size", ta.size, "Image side");
  tr->add_option("--train-size", ta.train_size, "Training set size (0 = largest possible)");
  tr->add_flag("--serial", ta.serial, "Use the serial reference kernels");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Evaluate a model or a predictions file");
  ev->add_option("--manifest", ea.manifest, "Ground-truth manifest")->required();
  ev->add_option("--model", ea.model, "Model binary");
  ev->add_option("--predictions", ea.predictions, "CSV sample_id,pred_deg");
  ev->add_option("--out", ea.out, "Report text (default stdout)");
  ev->add_option("--per-bin-csv", ea.per_bin_csv, "Per-bin accuracy CSV");
  ev->add_option("--predictions-out", ea.predictions_out, "Write predictions CSV");
  ev->add_option("--label", ea.label, "Configuration label");
  ev->add_option("--base-dir", ea.base_dir, "Directory for relative image paths");
  ev->add_option("--bins", ea.bins, "Accuracy bins B");
  ev->add_option("--tolerance", ea.tolerance, "Correct within this many degrees");

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Tabulate eval reports");
  rep->add_option("--in", ra.inputs, "Report files")->required();
  rep->add_option("--out", ra.out, "Output file (default stdout)");

  std::vector<std::string> storage{"vpkit"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (glyphs->parsed()) run_glyphs(ga, out);
    else if (gen->parsed()) run_gen_jobs(ja, out);
    else if (aug->parsed()) {
      if (aa.replay.empty() && aa.audit.empty()) throw InputError("augment: --audit is required");
      run_augment(aa, out);
    } else if (bal->parsed()) run_balance(ba, out);
    else if (tr->parsed()) {
      if (ta.real.empty() && ta.synth.empty()) throw InputError("train: give --real and/or --synth");
      run_train(ta, out);
    } else if (ev->parsed()) run_eval(ea, out);
    else if (rep->parsed()) run_report(ra, out);
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace vpkit
