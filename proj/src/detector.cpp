#include "cfad/detector.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "cfad/parallel.hpp"

namespace cfad {

std::string_view backend_name(Backend b) {
  return b == Backend::FrequencyPsr ? "FREQUENCY_PSR" : "SPATIAL_NCC";
}

Backend parse_backend(std::string_view name) {
  if (name == "FREQUENCY_PSR" || name == "frequency") return Backend::FrequencyPsr;
  if (name == "SPATIAL_NCC" || name == "spatial") return Backend::SpatialNcc;
  throw Error(ErrorKind::InvalidArgument, "unknown backend: " + std::string(name));
}

bool ranks_before(double score_a, const FilterId& a, double score_b, const FilterId& b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

FilterId max_psr_select(std::span<const FilterResponse> responses) {
  if (responses.empty()) throw Error(ErrorKind::InvalidArgument, "max_psr_select: no responses");
  const FilterResponse* best = &responses.front();
  for (const auto& r : responses) {
    if (ranks_before(r.score.psr, r.id, best->score.psr, best->id)) best = &r;
  }
  return best->id;
}

namespace {

using Spectra = std::map<std::pair<int, int>, FrequencyGrid>;

std::optional<Detection> frequency_response(const Spectra& spectra, int img_w, int img_h, const FilterBank& bank,
                                            std::size_t i) {
  const MosseFilter& f = bank.filters[i];
  const Pixel extent{static_cast<int>(bank.templates[i].cols()), static_cast<int>(bank.templates[i].rows())};
  const int valid_w = img_w - extent.x + 1;
  const int valid_h = img_h - extent.y + 1;
  if (valid_w <= 0 || valid_h <= 0 || static_cast<long>(valid_w) * valid_h <= 25) return std::nullopt;

  const auto& spectrum = spectra.at({std::max(img_w, f.width()), std::max(img_h, f.height())});
  const CorrelationSurface full = correlate_spectrum(spectrum, f);
  const CorrelationSurface valid = crop_surface(full, extent.x / 2, extent.y / 2, valid_w, valid_h);
  PsrScore score;
  try {
    score = psr(valid);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateSurface) return std::nullopt;
    throw;
  }
  const Pixel center{score.peak_xy.x + valid.origin_offset.x, score.peak_xy.y + valid.origin_offset.y};
  return Detection{rect_around(center, extent), score.psr, f.id, i, Backend::FrequencyPsr};
}

std::optional<Detection> spatial_response(const NccImage& img, const FilterBank& bank, std::size_t i, NccMode mode) {
  const Image& t = bank.templates[i];
  if (t.cols() > img.width || t.rows() > img.height) return std::nullopt;
  CorrelationSurface s;
  try {
    s = spatial_ncc(img, t, mode);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateInput) return std::nullopt;
    throw;
  }
  const Peak p = find_peak(s);
  const FaceRect rect{p.xy.x + s.origin_offset.x, p.xy.y + s.origin_offset.y, static_cast<int>(t.cols()),
                      static_cast<int>(t.rows())};
  return Detection{rect, p.value, bank.filters[i].id, i, Backend::SpatialNcc};
}

}  // namespace

DetectResult detect(const Image& img, const FilterBank& bank, const DetectOptions& options) {
  if (bank.filters.empty()) throw Error(ErrorKind::InvalidArgument, "detect: empty filter bank");
  if (options.k < 1) throw Error(ErrorKind::InvalidArgument, "detect: k must be >= 1");
  check_finite(img, "detect");
  const int img_w = static_cast<int>(img.cols());
  const int img_h = static_cast<int>(img.rows());

  std::vector<std::optional<Detection>> slots(bank.size());
  if (options.backend == Backend::FrequencyPsr) {
    Image prepared;
    try {
      prepared = preprocess(img);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DegenerateInput) return {DetectStatus::NoResponse, {}};
      throw;
    }
    Spectra spectra;
    for (const auto& f : bank.filters) {
      const std::pair key{std::max(img_w, f.width()), std::max(img_h, f.height())};
      if (key.first > options.max_dim || key.second > options.max_dim) {
        throw Error(ErrorKind::SizeLimit, "detect: correlation grid exceeds the maximum dimension");
      }
      if (!spectra.contains(key)) spectra.emplace(key, image_spectrum(prepared, key.first, key.second));
    }
    parallel_for(bank.size(), options.workers,
                 [&](std::size_t i) { slots[i] = frequency_response(spectra, img_w, img_h, bank, i); });
  } else {
    const NccImage prepared(img);
    // Every window has zero energy, so every surface is identically zero.
    if (prepared.sum_sq(img_h, img_w) == 0.0) return {DetectStatus::NoResponse, {}};
    parallel_for(bank.size(), options.workers,
                 [&](std::size_t i) { slots[i] = spatial_response(prepared, bank, i, options.ncc_mode); });
  }

  DetectResult result;
  for (auto& s : slots) {
    if (s) result.detections.push_back(*s);
  }
  if (result.detections.empty()) return {DetectStatus::NoResponse, {}};
  std::stable_sort(result.detections.begin(), result.detections.end(), [](const Detection& a, const Detection& b) {
    return ranks_before(a.score, a.filter_id, b.score, b.filter_id);
  });
  if (result.detections.size() > options.k) result.detections.resize(options.k);
  return result;
}

}  // namespace cfad
