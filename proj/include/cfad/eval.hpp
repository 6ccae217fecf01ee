#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfad/detector.hpp"
#include "cfad/pgm.hpp"

namespace cfad {

enum class OverlapMode { Iou, IntersectionOverTruth };

struct OverlapCriterion {
  OverlapMode mode = OverlapMode::Iou;
  double threshold = 0.25;  // in (0, 1]
};

std::string_view overlap_mode_name(OverlapMode m);
OverlapMode parse_overlap_mode(std::string_view name);

/// IOU, or intersection over the area of `truth`.
double rect_overlap(const FaceRect& a, const FaceRect& truth, OverlapMode mode);
bool overlap_hit(const FaceRect& detected, const FaceRect& truth, const OverlapCriterion& c);

enum class LocalizationRule {
  Within5Px,       // Euclidean distance to the eye midpoint <= 5 px
  Within10PctIod,  // |dx| and |dy| each <= 0.1 * interocular distance
};

bool localization_hit(Point2 peak, const EyeAnnotation& ann, LocalizationRule rule);

/// Accuracy as an exact ratio of integer counts.
struct Tally {
  long hits = 0;
  long total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total); }
};

struct CurvePoint {
  double x = 0.0;  // k, or octave offset
  Tally tally;
};

struct Curve {
  std::string x_label;
  std::vector<CurvePoint> points;

  std::vector<double> accuracies() const;
};

std::string to_csv(const Curve& curve);

struct ImageRecord {
  std::string path;
  FaceRect truth;
  std::optional<Detection> detection;  // rank-1
  double overlap = 0.0;
  bool hit = false;
  int first_hit_rank = 0;  // 1-based rank of the first passing detection, 0 if none
};

/// Rect convention shared by every report.
inline constexpr const char* kRectConvention =
    "rect top-left = frequency peak (face center) minus half the template size; "
    "spatial NCC peak is the template top-left";

struct ExperimentReport {
  std::string experiment;
  std::vector<ImageRecord> records;
  Tally tally;
  OverlapCriterion criterion;
  std::uint64_t seed = 0;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

/// Ranked detections (k = bank size) for every image; result i belongs to data[i].
std::vector<DetectResult> rank_all(const Dataset& data, const FilterBank& bank, const DetectOptions& options);

/// Rank-1 detection accuracy under an overlap criterion.
ExperimentReport detection_report(const Dataset& data, const std::vector<DetectResult>& ranked,
                                  const OverlapCriterion& criterion, const CropGeometry& crop);

/// accuracy[k] = fraction of images where any of the top-k rectangles passes.
Curve cumulative_curve(const Dataset& data, const std::vector<DetectResult>& ranked, std::size_t bank_size,
                       const OverlapCriterion& criterion, const CropGeometry& crop);

/// Convenience: ranks with the given back end, then builds the curve.
Curve cumulative_curve(const Dataset& data, const FilterBank& bank, Backend backend,
                       const OverlapCriterion& criterion = {}, unsigned workers = 1);

/// Random-placement baseline: per image, a random permutation of the bank's
/// templates, each at a uniform random valid top-left. Reproducible from seed.
Curve random_baseline(const Dataset& data, const FilterBank& bank, std::uint64_t seed,
                      const OverlapCriterion& criterion = {});

/// Matched-scale localization: each image is correlated with the filter whose
/// cell contains it, and the peak is scored against the eye midpoint.
ExperimentReport baseline_localization(const Dataset& data, const FilterBank& bank, LocalizationRule rule);

struct SweepOptions {
  double half_range = 0.5;
  double step = 0.05;
  LocalizationRule rule = LocalizationRule::Within5Px;
};

/// Localization accuracy of one filter over test images downscaled to
/// octaves center-half_range .. center+half_range. Every image must have an
/// interocular octave >= the largest target (downscale only).
Curve scale_sweep(const MosseFilter& filter, const Dataset& test, double center_octave,
                  const SweepOptions& options = {}, unsigned workers = 1);

/// Peak of a single filter's response restricted to the image area, in image coordinates.
Pixel response_peak(const Image& img, const MosseFilter& filter);

}  // namespace cfad
