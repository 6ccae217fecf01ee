#include "cfad/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cfad/json_io.hpp"

namespace cfad {
namespace {

std::string_view ncc_mode_name(NccMode m) { return m == NccMode::Literal ? "LITERAL" : "MEAN_SUBTRACTED"; }

std::string_view rule_name(LocalizationRule r) {
  return r == LocalizationRule::Within5Px ? "WITHIN_5PX" : "WITHIN_10PCT_IOD";
}

nlohmann::json criterion_json(const OverlapCriterion& c) {
  return {{"mode", overlap_mode_name(c.mode)}, {"threshold", c.threshold}};
}

nlohmann::json with_hash(nlohmann::json config) {
  const std::string h = config_hash(config);
  return {{"config", std::move(config)}, {"config_hash", h}};
}

}  // namespace

std::optional<std::string> corpus_hash_for(const std::filesystem::path& csv) {
  const auto manifest = csv.parent_path() / "manifest.json";
  std::ifstream in(manifest);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::MalformedHeader, "unreadable corpus manifest: " + manifest.string());
  }
  if (!j.contains("config_hash")) return std::nullopt;
  return j["config_hash"].get<std::string>();
}

void check_corpus_hash(const FilterBank& bank, const std::optional<std::string>& data_hash, bool force) {
  if (force || !data_hash || bank.manifest.corpus_hash.empty()) return;
  if (*data_hash != bank.manifest.corpus_hash) {
    throw Error(ErrorKind::HashMismatch, "bank was trained on corpus " + bank.manifest.corpus_hash +
                                             " but the data belongs to corpus " + *data_hash);
  }
}

nlohmann::json to_json(const TrainConfig& c) { return {{"manifest", to_json(c.manifest)}}; }

FilterBank run_train(const Dataset& data, const TrainConfig& config, const std::optional<std::string>& corpus_hash) {
  BankManifest m = config.manifest;
  m.corpus_hash = corpus_hash.value_or("");
  return build_bank(data, m, config.workers);
}

nlohmann::json to_json(const DetectConfig& c) {
  return {{"backend", backend_name(c.options.backend)},
          {"k", c.options.k},
          {"ncc_mode", ncc_mode_name(c.options.ncc_mode)},
          {"max_dim", c.options.max_dim},
          {"bank_hash", c.bank_hash}};
}

nlohmann::json detections_json(const Dataset& data, const std::vector<DetectResult>& ranked, const DetectConfig& config) {
  nlohmann::json j = with_hash(to_json(config));
  j["rect_convention"] = kRectConvention;
  auto& images = j["images"] = nlohmann::json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& d : ranked.at(i).detections) {
      dets.push_back({{"rect", to_json(d.rect)}, {"score", d.score}, {"filter", to_json(d.filter_id)}});
    }
    images.push_back({{"path", data[i].path},
                      {"status", ranked[i].status == DetectStatus::Ok ? "OK" : "NO_RESPONSE"},
                      {"detections", std::move(dets)}});
  }
  return j;
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"backend", backend_name(c.backend)},
          {"ncc_mode", ncc_mode_name(c.ncc_mode)},
          {"overlap", criterion_json(c.criterion)},
          {"rule", rule_name(c.rule)},
          {"seed", c.seed},
          {"center_octave", c.center_octave},
          {"half_range", c.sweep.half_range},
          {"step", c.sweep.step},
          {"bank_hash", c.bank_hash}};
}

nlohmann::json CurveReport::to_json() const {
  nlohmann::json j = with_hash(config);
  j["experiment"] = experiment;
  j["x_label"] = curve.x_label;
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"x", p.x}, {"accuracy", p.tally.accuracy()}, {"hits", p.tally.hits}, {"total", p.tally.total}});
  }
  return j;
}

ExperimentReport run_baseline(const Dataset& test, const FilterBank& bank, const EvalConfig& config) {
  ExperimentReport rep = baseline_localization(test, bank, config.rule);
  rep.config = to_json(config);
  return rep;
}

CurveReport run_cumulative(const Dataset& test, const FilterBank& bank, const EvalConfig& config) {
  DetectOptions opt;
  opt.backend = config.backend;
  opt.ncc_mode = config.ncc_mode;
  opt.k = bank.size();
  opt.workers = config.workers;
  const auto ranked = rank_all(test, bank, opt);
  return {"cumulative", cumulative_curve(test, ranked, bank.size(), config.criterion, bank.manifest.crop),
          to_json(config)};
}

CurveReport run_random_baseline(const Dataset& test, const FilterBank& bank, const EvalConfig& config) {
  return {"random-baseline", random_baseline(test, bank, config.seed, config.criterion), to_json(config)};
}

CurveReport run_scale_sweep(const Dataset& test, const FilterBank& bank, const EvalConfig& config) {
  const FilterId want{config.center_octave, PoseBin::Frontal};
  const auto it = std::find_if(bank.filters.begin(), bank.filters.end(), [&](const MosseFilter& f) {
    return std::abs(f.id.octave - want.octave) < 1e-9 && f.id.pose == want.pose;
  });
  if (it == bank.filters.end()) {
    throw Error(ErrorKind::ConfigConflict, "scale sweep: bank has no FRONTAL filter at octave " +
                                               std::to_string(config.center_octave));
  }
  return {"scale-sweep", scale_sweep(*it, test, config.center_octave, config.sweep, config.workers), to_json(config)};
}

nlohmann::json to_json(const RepeatedSettingConfig& c) {
  return {{"corpus", to_json(c.corpus)},
          {"n_train", c.n_train},
          {"n_test", c.n_test},
          {"corpus_seed", c.corpus_seed},
          {"baseline_seed", c.baseline_seed},
          {"octaves", c.octaves},
          {"backend", backend_name(c.backend)},
          {"ncc_mode", ncc_mode_name(c.ncc_mode)},
          {"overlap", criterion_json(c.criterion)}};
}

nlohmann::json RepeatedSettingResult::to_json() const {
  nlohmann::json j = report.to_json();
  j["config_hash"] = config_hash(report.config);
  j["bank_size"] = bank_size;
  j["baseline"] = {{"accuracy", baseline.accuracy()}, {"hits", baseline.hits}, {"total", baseline.total}};
  return j;
}

RepeatedSettingResult run_repeated_setting(const RepeatedSettingConfig& config) {
  const Corpus corpus = generate_corpus(config.corpus, config.n_train, config.n_test, config.corpus_seed, config.workers);
  BankManifest m;
  m.grid.octaves = config.octaves;
  m.grid.poses = {PoseBin::Frontal};
  m.crop = config.corpus.crop;
  m.corpus_hash = corpus.hash();
  const FilterBank bank = build_bank(to_dataset(corpus.train), m, config.workers);

  const Dataset test = to_dataset(corpus.test);
  DetectOptions opt;
  opt.backend = config.backend;
  opt.ncc_mode = config.ncc_mode;
  opt.workers = config.workers;
  RepeatedSettingResult r;
  r.report = detection_report(test, rank_all(test, bank, opt), config.criterion, m.crop);
  r.report.experiment = "repeated-setting";
  r.report.seed = config.corpus_seed;
  r.report.config = to_json(config);
  r.baseline = random_baseline(test, bank, config.baseline_seed, config.criterion).points.front().tally;
  r.bank_size = bank.size();
  return r;
}

}  // namespace cfad
