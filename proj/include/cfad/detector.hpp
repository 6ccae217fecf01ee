#pragma once

#include <span>
#include <vector>

#include "cfad/matching.hpp"
#include "cfad/mosse.hpp"

namespace cfad {

enum class Backend { FrequencyPsr, SpatialNcc };

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

struct Detection {
  FaceRect rect;
  double score = 0.0;  // PSR (frequency) or raw NCC peak (spatial)
  FilterId filter_id;
  std::size_t filter_index = 0;
  Backend backend = Backend::FrequencyPsr;
};

enum class DetectStatus { Ok, NoResponse };

struct DetectResult {
  DetectStatus status = DetectStatus::Ok;
  std::vector<Detection> detections;  // descending score, length <= k
};

struct DetectOptions {
  Backend backend = Backend::FrequencyPsr;
  std::size_t k = 1;
  NccMode ncc_mode = NccMode::Literal;
  int max_dim = kDefaultMaxCorrelationDim;
  unsigned workers = 1;
};

/// Applies every bank filter and returns the top-k per-filter best responses.
///
/// Frequency back end: the surface is restricted to face centers whose
/// template rectangle lies inside the image, PSR is computed on that region and
/// the rectangle is the template extent around the peak. Spatial back end: the
/// raw NCC peak of the filter's template gives the rectangle's top-left.
/// Ordering is by score, then lower octave, then pose LEFT < FRONTAL < RIGHT.
DetectResult detect(const Image& img, const FilterBank& bank, const DetectOptions& options = {});

struct FilterResponse {
  FilterId id;
  PsrScore score;
};

/// Filter with the highest PSR; ties go to the lower octave, then pose order.
FilterId max_psr_select(std::span<const FilterResponse> responses);

/// Strict weak order used for ranking: higher score first, then the tie rule.
bool ranks_before(double score_a, const FilterId& a, double score_b, const FilterId& b);

}  // namespace cfad
