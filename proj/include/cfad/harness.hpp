#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cfad/eval.hpp"
#include "cfad/synth.hpp"

namespace cfad {

// Experiment runners shared by the command-line tool and the tests. Every
// runner takes a fully resolved config and echoes it into its output.

/// Corpus hash recorded in manifest.json next to an annotation CSV, if any.
std::optional<std::string> corpus_hash_for(const std::filesystem::path& csv);

/// Throws HashMismatch when both hashes are known and differ, unless forced.
void check_corpus_hash(const FilterBank& bank, const std::optional<std::string>& data_hash, bool force);

struct TrainConfig {
  BankManifest manifest;
  unsigned workers = 0;
};

nlohmann::json to_json(const TrainConfig& c);

/// Trains a bank; `corpus_hash` is recorded in the manifest.
FilterBank run_train(const Dataset& data, const TrainConfig& config, const std::optional<std::string>& corpus_hash);

struct DetectConfig {
  DetectOptions options;
  std::string bank_hash;  // config hash of the bank manifest
};

nlohmann::json to_json(const DetectConfig& c);

/// Per image: path, status and the ranked detections.
nlohmann::json detections_json(const Dataset& data, const std::vector<DetectResult>& ranked, const DetectConfig& config);

struct EvalConfig {
  Backend backend = Backend::SpatialNcc;
  NccMode ncc_mode = NccMode::Literal;
  OverlapCriterion criterion;
  LocalizationRule rule = LocalizationRule::Within5Px;
  std::uint64_t seed = 1;      // random baseline
  double center_octave = 5.0;  // scale sweep
  SweepOptions sweep;
  std::string bank_hash;
  unsigned workers = 0;
};

nlohmann::json to_json(const EvalConfig& c);

/// A curve together with the config that produced it.
struct CurveReport {
  std::string experiment;
  Curve curve;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

ExperimentReport run_baseline(const Dataset& test, const FilterBank& bank, const EvalConfig& config);
CurveReport run_cumulative(const Dataset& test, const FilterBank& bank, const EvalConfig& config);
CurveReport run_random_baseline(const Dataset& test, const FilterBank& bank, const EvalConfig& config);
/// Sweeps the bank filter at (center_octave, FRONTAL).
CurveReport run_scale_sweep(const Dataset& test, const FilterBank& bank, const EvalConfig& config);

/// Fixed background, disjoint identities, a small scale-only bank.
struct RepeatedSettingConfig {
  CorpusSpec corpus = repeated_setting_spec();
  int n_train = 256;
  int n_test = 73;
  std::uint64_t corpus_seed = 42;
  std::uint64_t baseline_seed = 1;
  std::vector<double> octaves{4.25, 4.75};
  Backend backend = Backend::SpatialNcc;
  NccMode ncc_mode = NccMode::Literal;
  OverlapCriterion criterion;
  unsigned workers = 0;
};

nlohmann::json to_json(const RepeatedSettingConfig& c);

struct RepeatedSettingResult {
  ExperimentReport report;  // trained bank, rank-1
  Tally baseline;           // random placement, rank-1
  std::size_t bank_size = 0;

  nlohmann::json to_json() const;
};

RepeatedSettingResult run_repeated_setting(const RepeatedSettingConfig& config);

}  // namespace cfad
