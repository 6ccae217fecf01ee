#include "cfad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cfad/json_io.hpp"
#include "cfad/parallel.hpp"

namespace cfad {

std::string_view overlap_mode_name(OverlapMode m) {
  return m == OverlapMode::Iou ? "IOU" : "INTERSECTION_OVER_TRUTH";
}

OverlapMode parse_overlap_mode(std::string_view name) {
  if (name == "IOU" || name == "iou") return OverlapMode::Iou;
  if (name == "INTERSECTION_OVER_TRUTH" || name == "iot") return OverlapMode::IntersectionOverTruth;
  throw Error(ErrorKind::InvalidArgument, "unknown overlap mode: " + std::string(name));
}

double rect_overlap(const FaceRect& a, const FaceRect& truth, OverlapMode mode) {
  const long long ix = std::max(0, std::min(a.x + a.w, truth.x + truth.w) - std::max(a.x, truth.x));
  const long long iy = std::max(0, std::min(a.y + a.h, truth.y + truth.h) - std::max(a.y, truth.y));
  const double inter = static_cast<double>(ix * iy);
  if (mode == OverlapMode::IntersectionOverTruth) return inter / static_cast<double>(truth.area());
  return inter / static_cast<double>(a.area() + truth.area() - ix * iy);
}

bool overlap_hit(const FaceRect& detected, const FaceRect& truth, const OverlapCriterion& c) {
  return rect_overlap(detected, truth, c.mode) >= c.threshold;
}

bool localization_hit(Point2 peak, const EyeAnnotation& ann, LocalizationRule rule) {
  const Point2 mid = ann.center();
  const double dx = peak.x - mid.x;
  const double dy = peak.y - mid.y;
  if (rule == LocalizationRule::Within5Px) return dx * dx + dy * dy <= 25.0;
  const double tol = 0.1 * ann.interocular();
  return std::abs(dx) <= tol && std::abs(dy) <= tol;
}

std::vector<double> Curve::accuracies() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.tally.accuracy());
  return out;
}

std::string to_csv(const Curve& curve) {
  std::ostringstream os;
  os.precision(10);
  os << curve.x_label << ",accuracy,hits,total\n";
  for (const auto& p : curve.points) {
    os << p.x << ',' << p.tally.accuracy() << ',' << p.tally.hits << ',' << p.tally.total << '\n';
  }
  return os.str();
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["accuracy"] = tally.accuracy();
  j["hits"] = tally.hits;
  j["total"] = tally.total;
  j["overlap"] = {{"mode", overlap_mode_name(criterion.mode)}, {"threshold", criterion.threshold}};
  j["rect_convention"] = kRectConvention;
  j["seed"] = seed;
  j["config"] = config;
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json e = {{"path", r.path}, {"truth", cfad::to_json(r.truth)}, {"overlap", r.overlap},
                        {"hit", r.hit}, {"first_hit_rank", r.first_hit_rank}};
    if (r.detection) {
      e["detection"] = {{"rect", cfad::to_json(r.detection->rect)},
                        {"score", r.detection->score},
                        {"filter", cfad::to_json(r.detection->filter_id)},
                        {"backend", backend_name(r.detection->backend)}};
    } else {
      e["detection"] = nullptr;
    }
    recs.push_back(std::move(e));
  }
  return j;
}

std::vector<DetectResult> rank_all(const Dataset& data, const FilterBank& bank, const DetectOptions& options) {
  std::vector<DetectResult> out(data.size());
  DetectOptions per_image = options;
  per_image.workers = 1;
  parallel_for(data.size(), options.workers, [&](std::size_t i) { out[i] = detect(data[i].image, bank, per_image); });
  return out;
}

ExperimentReport detection_report(const Dataset& data, const std::vector<DetectResult>& ranked,
                                  const OverlapCriterion& criterion, const CropGeometry& crop) {
  ExperimentReport rep;
  rep.experiment = "detection";
  rep.criterion = criterion;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ImageRecord r;
    r.path = data[i].path;
    r.truth = face_rect(data[i].eyes, crop);
    const auto& dets = ranked.at(i).detections;
    if (!dets.empty()) {
      r.detection = dets.front();
      r.overlap = rect_overlap(dets.front().rect, r.truth, criterion.mode);
      r.hit = r.overlap >= criterion.threshold;
    }
    for (std::size_t k = 0; k < dets.size(); ++k) {
      if (overlap_hit(dets[k].rect, r.truth, criterion)) {
        r.first_hit_rank = static_cast<int>(k + 1);
        break;
      }
    }
    rep.tally.hits += r.hit ? 1 : 0;
    ++rep.tally.total;
    rep.records.push_back(std::move(r));
  }
  return rep;
}

Curve cumulative_curve(const Dataset& data, const std::vector<DetectResult>& ranked, std::size_t bank_size,
                       const OverlapCriterion& criterion, const CropGeometry& crop) {
  // first[i] = 1-based rank of the first passing rectangle, 0 if none.
  std::vector<std::size_t> first(data.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const FaceRect truth = face_rect(data[i].eyes, crop);
    const auto& dets = ranked.at(i).detections;
    for (std::size_t k = 0; k < dets.size(); ++k) {
      if (overlap_hit(dets[k].rect, truth, criterion)) {
        first[i] = k + 1;
        break;
      }
    }
  }
  Curve c;
  c.x_label = "k";
  for (std::size_t k = 1; k <= bank_size; ++k) {
    Tally t;
    t.total = static_cast<long>(data.size());
    t.hits = std::count_if(first.begin(), first.end(), [k](std::size_t f) { return f != 0 && f <= k; });
    c.points.push_back({static_cast<double>(k), t});
  }
  return c;
}

Curve cumulative_curve(const Dataset& data, const FilterBank& bank, Backend backend,
                       const OverlapCriterion& criterion, unsigned workers) {
  DetectOptions opt;
  opt.backend = backend;
  opt.k = bank.size();
  opt.workers = workers;
  return cumulative_curve(data, rank_all(data, bank, opt), bank.size(), criterion, bank.manifest.crop);
}

Curve random_baseline(const Dataset& data, const FilterBank& bank, std::uint64_t seed,
                      const OverlapCriterion& criterion) {
  if (bank.templates.empty()) throw Error(ErrorKind::InvalidArgument, "random_baseline: empty bank");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> first(data.size(), 0);
  std::vector<std::size_t> order(bank.templates.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int w = static_cast<int>(data[i].image.cols());
    const int h = static_cast<int>(data[i].image.rows());
    const FaceRect truth = face_rect(data[i].eyes, bank.manifest.crop);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t j = order.size(); j > 1; --j) {
      std::swap(order[j - 1], order[static_cast<std::size_t>(rng() % j)]);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Image& t = bank.templates[order[k]];
      const int tw = static_cast<int>(t.cols());
      const int th = static_cast<int>(t.rows());
      if (tw > w || th > h) continue;
      const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(w - tw + 1));
      const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(h - th + 1));
      if (first[i] == 0 && overlap_hit({x, y, tw, th}, truth, criterion)) first[i] = k + 1;
    }
  }
  Curve c;
  c.x_label = "k";
  for (std::size_t k = 1; k <= bank.templates.size(); ++k) {
    Tally t;
    t.total = static_cast<long>(data.size());
    t.hits = std::count_if(first.begin(), first.end(), [k](std::size_t f) { return f != 0 && f <= k; });
    c.points.push_back({static_cast<double>(k), t});
  }
  return c;
}

Pixel response_peak(const Image& img, const MosseFilter& filter) {
  const CorrelationSurface s = freq_correlate(img, filter);
  const CorrelationSurface inside = crop_surface(s, 0, 0, static_cast<int>(img.cols()), static_cast<int>(img.rows()));
  return find_peak(inside).xy;
}

ExperimentReport baseline_localization(const Dataset& data, const FilterBank& bank, LocalizationRule rule) {
  ExperimentReport rep;
  rep.experiment = "baseline";
  for (const auto& s : data) {
    ImageRecord r;
    r.path = s.path;
    r.truth = face_rect(s.eyes, bank.manifest.crop);
    const auto id = cell_for(bank.manifest.grid, s.eyes, s.pose_degrees);
    if (id) {
      const auto it = std::find_if(bank.filters.begin(), bank.filters.end(), [&](const MosseFilter& f) { return f.id == *id; });
      if (it != bank.filters.end()) {
        const Pixel p = response_peak(s.image, *it);
        const std::size_t index = static_cast<std::size_t>(it - bank.filters.begin());
        const Pixel extent{static_cast<int>(bank.templates[index].cols()), static_cast<int>(bank.templates[index].rows())};
        r.detection = Detection{rect_around(p, extent), 0.0, it->id, index, Backend::FrequencyPsr};
        r.hit = localization_hit({static_cast<double>(p.x), static_cast<double>(p.y)}, s.eyes, rule);
        r.overlap = rect_overlap(r.detection->rect, r.truth, OverlapMode::Iou);
      }
    }
    rep.tally.hits += r.hit ? 1 : 0;
    ++rep.tally.total;
    rep.records.push_back(std::move(r));
  }
  return rep;
}

Curve scale_sweep(const MosseFilter& filter, const Dataset& test, double center_octave, const SweepOptions& options,
                  unsigned workers) {
  if (test.empty()) throw Error(ErrorKind::EmptyTestSet, "scale_sweep: empty test set");
  if (!(options.step > 0.0) || !(options.half_range >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "scale_sweep: bad range or step");
  }
  const int steps = static_cast<int>(std::lround(options.half_range / options.step));
  const double top = center_octave + steps * options.step;
  for (const auto& s : test) {
    if (s.eyes.octave() < top - 1e-9) {
      throw Error(ErrorKind::ConfigConflict, "scale_sweep: test image " + s.path + " (octave " +
                                                 std::to_string(s.eyes.octave()) + ") would need upsampling to octave " +
                                                 std::to_string(top));
    }
  }
  Curve c;
  c.x_label = "octave_offset";
  for (int i = -steps; i <= steps; ++i) {
    const double target = center_octave + i * options.step;
    std::vector<char> hit(test.size(), 0);
    parallel_for(test.size(), workers, [&](std::size_t j) {
      const Sample& s = test[j];
      const double factor = std::exp2(target - s.eyes.octave());
      const Image img = resample_bilinear(s.image, factor);
      const EyeAnnotation eyes{resampled_point(s.eyes.left_eye, factor), resampled_point(s.eyes.right_eye, factor)};
      const Pixel p = response_peak(img, filter);
      hit[j] = localization_hit({static_cast<double>(p.x), static_cast<double>(p.y)}, eyes, options.rule) ? 1 : 0;
    });
    Tally t;
    t.total = static_cast<long>(test.size());
    t.hits = std::count(hit.begin(), hit.end(), 1);
    c.points.push_back({i * options.step, t});
  }
  return c;
}

}  // namespace cfad
