#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cfad/bank_io.hpp"
#include "cfad/harness.hpp"
#include "cfad/json_io.hpp"

using namespace cfad;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string bank_hash(const FilterBank& bank) { return config_hash(to_json(bank.manifest)); }

NccMode parse_ncc_mode(const std::string& s) {
  if (s == "literal") return NccMode::Literal;
  if (s == "mean") return NccMode::MeanSubtracted;
  throw Error(ErrorKind::InvalidArgument, "unknown NCC mode: " + s);
}

LocalizationRule parse_rule(const std::string& s) {
  if (s == "5px") return LocalizationRule::Within5Px;
  if (s == "10pct") return LocalizationRule::Within10PctIod;
  throw Error(ErrorKind::InvalidArgument, "unknown localization rule: " + s);
}

struct Common {
  unsigned workers = 0;
  bool force = false;
};

struct SynthArgs {
  fs::path out;
  std::string preset = "default";
  int n_train = 256;
  int n_test = 73;
  std::uint64_t seed = 42;
  std::optional<int> width, height;
  std::optional<double> iod_min, iod_max, pose_min, pose_max, noise, octave_jitter;
  std::vector<double> octaves;
};

struct TrainArgs {
  fs::path data;
  fs::path out;
  std::vector<double> octaves;
  std::vector<std::string> poses;
  double sigma = 2.0;
  double eps_relative = 1e-2;
  std::optional<double> eps_absolute;
};

struct DetectArgs {
  fs::path bank;
  fs::path data;
  fs::path out;
  std::string backend = "FREQUENCY_PSR";
  std::size_t k = 1;
  std::string ncc_mode = "literal";
};

struct EvalArgs {
  fs::path bank;
  fs::path data;
  fs::path out;     // JSON report
  fs::path csv;     // curve CSV
  std::string backend = "SPATIAL_NCC";
  std::string ncc_mode = "literal";
  std::string overlap = "IOU";
  double threshold = 0.25;
  std::string rule = "5px";
  std::uint64_t seed = 1;
  double octave = 5.0;
  double half_range = 0.5;
  double step = 0.05;
};

struct RepeatedArgs {
  fs::path out;
  int n_train = 256;
  int n_test = 73;
  std::uint64_t seed = 42;
  std::uint64_t baseline_seed = 1;
  int width = 384;
  int height = 288;
  std::vector<double> octaves{4.25, 4.75};
  std::string backend = "SPATIAL_NCC";
  std::string ncc_mode = "literal";
  double threshold = 0.25;
};

void cmd_synth(const SynthArgs& a, const Common& c) {
  CorpusSpec spec;
  if (a.preset == "repeated") {
    spec = repeated_setting_spec();
  } else if (a.preset == "grid") {
    spec = bank_grid_spec();
  } else if (a.preset != "default") {
    throw Error(ErrorKind::InvalidArgument, "unknown preset: " + a.preset);
  }
  if (a.width) spec.width = *a.width;
  if (a.height) spec.height = *a.height;
  if (a.iod_min) spec.iod_min = *a.iod_min;
  if (a.iod_max) spec.iod_max = *a.iod_max;
  if (a.pose_min) spec.pose_min = *a.pose_min;
  if (a.pose_max) spec.pose_max = *a.pose_max;
  if (a.noise) spec.noise_sigma = *a.noise;
  if (a.octave_jitter) spec.octave_jitter = *a.octave_jitter;
  if (!a.octaves.empty()) spec.octaves = a.octaves;
  const Corpus corpus = generate_corpus(spec, a.n_train, a.n_test, a.seed, c.workers);
  write_corpus(corpus, a.out);
  std::cout << corpus.hash() << "\n";
}

void cmd_train(const TrainArgs& a, const Common& c) {
  TrainConfig cfg;
  if (!a.octaves.empty()) cfg.manifest.grid.octaves = a.octaves;
  if (!a.poses.empty()) {
    cfg.manifest.grid.poses.clear();
    for (const auto& p : a.poses) cfg.manifest.grid.poses.push_back(parse_pose(p));
  }
  cfg.manifest.sigma = a.sigma;
  cfg.manifest.epsilon.relative = a.eps_relative;
  cfg.manifest.epsilon.absolute = a.eps_absolute;
  cfg.workers = c.workers;
  const FilterBank bank = run_train(load_dataset(a.data), cfg, corpus_hash_for(a.data));
  save_bank(bank, a.out);
  std::cout << bank_hash(bank) << "\n";
}

void cmd_detect(const DetectArgs& a, const Common& c) {
  const FilterBank bank = load_bank(a.bank);
  check_corpus_hash(bank, corpus_hash_for(a.data), c.force);
  const Dataset data = load_dataset(a.data);
  DetectConfig cfg;
  cfg.options.backend = parse_backend(a.backend);
  cfg.options.k = a.k;
  cfg.options.ncc_mode = parse_ncc_mode(a.ncc_mode);
  cfg.options.workers = c.workers;
  cfg.bank_hash = bank_hash(bank);
  write_json(a.out, detections_json(data, rank_all(data, bank, cfg.options), cfg));
}

EvalConfig eval_config(const EvalArgs& a, const Common& c, const FilterBank& bank) {
  EvalConfig cfg;
  cfg.backend = parse_backend(a.backend);
  cfg.ncc_mode = parse_ncc_mode(a.ncc_mode);
  cfg.criterion = {parse_overlap_mode(a.overlap), a.threshold};
  if (!(a.threshold > 0.0 && a.threshold <= 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be in (0, 1]");
  cfg.rule = parse_rule(a.rule);
  cfg.seed = a.seed;
  cfg.center_octave = a.octave;
  cfg.sweep = {a.half_range, a.step, cfg.rule};
  cfg.bank_hash = bank_hash(bank);
  cfg.workers = c.workers;
  return cfg;
}

void write_curve(const EvalArgs& a, const CurveReport& r) {
  if (!a.csv.empty()) write_text(a.csv, to_csv(r.curve));
  if (!a.out.empty()) write_json(a.out, r.to_json());
  if (a.csv.empty() && a.out.empty()) std::cout << to_csv(r.curve);
}

void cmd_eval(const std::string& which, const EvalArgs& a, const Common& c) {
  const FilterBank bank = load_bank(a.bank);
  check_corpus_hash(bank, corpus_hash_for(a.data), c.force);
  const EvalConfig cfg = eval_config(a, c, bank);
  const Dataset data = load_dataset(a.data);
  if (which == "baseline") {
    const ExperimentReport r = run_baseline(data, bank, cfg);
    nlohmann::json j = r.to_json();
    j["config_hash"] = config_hash(r.config);
    if (a.out.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      write_json(a.out, j);
    }
  } else if (which == "cumulative") {
    write_curve(a, run_cumulative(data, bank, cfg));
  } else if (which == "random-baseline") {
    write_curve(a, run_random_baseline(data, bank, cfg));
  } else {
    write_curve(a, run_scale_sweep(data, bank, cfg));
  }
}

void cmd_repeated(const RepeatedArgs& a, const Common& c) {
  RepeatedSettingConfig cfg;
  cfg.corpus.width = a.width;
  cfg.corpus.height = a.height;
  cfg.n_train = a.n_train;
  cfg.n_test = a.n_test;
  cfg.corpus_seed = a.seed;
  cfg.baseline_seed = a.baseline_seed;
  cfg.octaves = a.octaves;
  cfg.backend = parse_backend(a.backend);
  cfg.ncc_mode = parse_ncc_mode(a.ncc_mode);
  cfg.criterion.threshold = a.threshold;
  cfg.workers = c.workers;
  const nlohmann::json j = run_repeated_setting(cfg).to_json();
  if (a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(a.out, j);
  }
}

void add_bank_data(CLI::App* sub, fs::path& bank, fs::path& data) {
  sub->add_option("--bank", bank, "Filter bank (.cfad)")->required()->check(CLI::ExistingFile);
  sub->add_option("--data", data, "Annotation CSV")->required()->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-filter face detection toolkit"};
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Common common;
  app.add_option("--workers", common.workers, "Worker threads (0 = all cores)");
  app.add_flag("--force", common.force, "Ignore bank/corpus hash mismatches");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic annotated corpus");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--preset", synth.preset, "default | repeated | grid")->capture_default_str();
  s->add_option("--n-train", synth.n_train)->capture_default_str();
  s->add_option("--n-test", synth.n_test)->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--width", synth.width);
  s->add_option("--height", synth.height);
  s->add_option("--iod-min", synth.iod_min);
  s->add_option("--iod-max", synth.iod_max);
  s->add_option("--pose-min", synth.pose_min);
  s->add_option("--pose-max", synth.pose_max);
  s->add_option("--noise", synth.noise);
  s->add_option("--octaves", synth.octaves, "Draw scales from these octaves instead of the IOD range")->delimiter(',');
  s->add_option("--octave-jitter", synth.octave_jitter);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a MOSSE filter bank");
  t->add_option("--data", train.data, "Annotation CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--out", train.out, "Output bank (.cfad)")->required();
  t->add_option("--octaves", train.octaves, "Grid octaves (default: quarter octaves 4..7)")->delimiter(',');
  t->add_option("--poses", train.poses, "Pose bins: LEFT FRONTAL RIGHT")->delimiter(',');
  t->add_option("--sigma", train.sigma)->capture_default_str();
  t->add_option("--epsilon-relative", train.eps_relative)->capture_default_str();
  t->add_option("--epsilon", train.eps_absolute, "Absolute regularizer (overrides the relative one)");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "Detect faces; writes ranked detections as JSON");
  add_bank_data(d, det.bank, det.data);
  d->add_option("--out", det.out, "Output JSON")->required();
  d->add_option("--backend", det.backend, "FREQUENCY_PSR | SPATIAL_NCC")->capture_default_str();
  d->add_option("-k,--top", det.k, "Detections per image")->capture_default_str();
  d->add_option("--ncc-mode", det.ncc_mode, "literal | mean")->capture_default_str();

  auto* e = app.add_subcommand("eval", "Reproduce an experiment");
  e->require_subcommand(1);
  e->fallthrough();
  EvalArgs ev;
  std::string which;
  const std::pair<const char*, const char*> curve_cmds[] = {
      {"baseline", "Matched-scale eye localization"},
      {"scale-sweep", "Localization accuracy of one filter across scales"},
      {"cumulative", "Detection rate vs number of top-ranked filters"},
      {"random-baseline", "Random template placement, same curve shape"},
  };
  for (const auto& [name, help] : curve_cmds) {
    auto* sub = e->add_subcommand(name, help);
    add_bank_data(sub, ev.bank, ev.data);
    sub->add_option("--out", ev.out, "JSON report");
    sub->add_option("--overlap", ev.overlap, "IOU | INTERSECTION_OVER_TRUTH")->capture_default_str();
    sub->add_option("--threshold", ev.threshold)->capture_default_str();
    sub->add_option("--rule", ev.rule, "Localization rule: 5px | 10pct")->capture_default_str();
    if (std::string(name) != "baseline") sub->add_option("--csv", ev.csv, "Curve CSV");
    if (std::string(name) == "cumulative") {
      sub->add_option("--backend", ev.backend)->capture_default_str();
      sub->add_option("--ncc-mode", ev.ncc_mode)->capture_default_str();
    }
    if (std::string(name) == "random-baseline") sub->add_option("--seed", ev.seed)->capture_default_str();
    if (std::string(name) == "scale-sweep") {
      sub->add_option("--octave", ev.octave, "Matched octave of the swept filter")->capture_default_str();
      sub->add_option("--half-range", ev.half_range)->capture_default_str();
      sub->add_option("--step", ev.step)->capture_default_str();
    }
    sub->callback([&which, name] { which = name; });
  }
  RepeatedArgs rep;
  auto* r = e->add_subcommand("repeated-setting", "Synthetic fixed-background experiment, end to end");
  r->add_option("--out", rep.out, "JSON report");
  r->add_option("--n-train", rep.n_train)->capture_default_str();
  r->add_option("--n-test", rep.n_test)->capture_default_str();
  r->add_option("--seed", rep.seed)->capture_default_str();
  r->add_option("--baseline-seed", rep.baseline_seed)->capture_default_str();
  r->add_option("--width", rep.width)->capture_default_str();
  r->add_option("--height", rep.height)->capture_default_str();
  r->add_option("--octaves", rep.octaves)->delimiter(',')->capture_default_str();
  r->add_option("--backend", rep.backend)->capture_default_str();
  r->add_option("--ncc-mode", rep.ncc_mode)->capture_default_str();
  r->add_option("--threshold", rep.threshold)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (s->parsed()) cmd_synth(synth, common);
    if (t->parsed()) cmd_train(train, common);
    if (d->parsed()) cmd_detect(det, common);
    if (r->parsed()) {
      cmd_repeated(rep, common);
    } else if (e->parsed()) {
      cmd_eval(which, ev, common);
    }
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: usage: " << ex.what() << "\n";
    return 2;
  } catch (const Error& ex) {
    std::cerr << "error: " << error_kind_name(ex.kind()) << ": " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: internal: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
