#include "cfad/mosse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfad/parallel.hpp"

namespace cfad {
namespace {

constexpr double kPoseEdgeDegrees = 12.0;

template <typename Derived>
auto single_precision(const Eigen::ArrayBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
    return a.template cast<std::complex<float>>().template cast<std::complex<double>>().eval();
  } else {
    return a.template cast<float>().template cast<double>().eval();
  }
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

PoseBin pose_bin_for(double degrees) {
  if (degrees < -kPoseEdgeDegrees) return PoseBin::Left;
  if (degrees > kPoseEdgeDegrees) return PoseBin::Right;
  return PoseBin::Frontal;
}

std::string_view pose_name(PoseBin pose) {
  switch (pose) {
    case PoseBin::Left: return "LEFT";
    case PoseBin::Frontal: return "FRONTAL";
    case PoseBin::Right: return "RIGHT";
  }
  return "FRONTAL";
}

PoseBin parse_pose(std::string_view name) {
  if (name == "LEFT") return PoseBin::Left;
  if (name == "FRONTAL") return PoseBin::Frontal;
  if (name == "RIGHT") return PoseBin::Right;
  throw Error(ErrorKind::InvalidArgument, "unknown pose bin: " + std::string(name));
}

std::string to_string(const FilterId& id) {
  std::ostringstream os;
  os << "(octave " << id.octave << ", " << pose_name(id.pose) << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

MosseAccumulator::MosseAccumulator(int width, int height)
    : numerator_(FrequencyGrid::Zero(height, width)), denominator_(FrequencyGrid::Zero(height, width)) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "accumulator: empty dims");
}

MosseAccumulator::MosseAccumulator(FrequencyGrid numerator, FrequencyGrid denominator, int count)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)), count_(count) {
  if (numerator_.rows() != denominator_.rows() || numerator_.cols() != denominator_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "accumulator: numerator/denominator dims differ");
  }
  if (count_ < 0) throw Error(ErrorKind::InvalidArgument, "accumulator: negative count");
}

void MosseAccumulator::add(const Image& frame, const EyeAnnotation& ann, double sigma) {
  if (frame.cols() != width() || frame.rows() != height()) {
    throw Error(ErrorKind::DimensionMismatch, "accumulate: frame is " + std::to_string(frame.cols()) + "x" +
                                                  std::to_string(frame.rows()) + ", accumulator is " +
                                                  std::to_string(width()) + "x" + std::to_string(height()));
  }
  validate(ann);
  const Image goal = gaussian_goal(width(), height(), ann.center(), sigma);
  const FrequencyGrid f = forward_dft(preprocess(frame));
  const FrequencyGrid g = forward_dft(goal);
  numerator_ += g * f.conjugate();
  denominator_ += f.abs2().cast<std::complex<double>>();
  ++count_;
}

void MosseAccumulator::merge(const MosseAccumulator& other) {
  if (other.width() != width() || other.height() != height()) {
    throw Error(ErrorKind::DimensionMismatch, "merge: accumulator dims differ");
  }
  numerator_ += other.numerator_;
  denominator_ += other.denominator_;
  count_ += other.count_;
}

MosseAccumulator accumulate(MosseAccumulator acc, const Image& frame, const EyeAnnotation& ann, double sigma) {
  acc.add(frame, ann, sigma);
  return acc;
}

Image spatial_kernel(const FrequencyGrid& freq) { return inverse_dft<double>(freq.conjugate()); }

MosseFilter MosseFilter::from_spatial(const Image& kernel, FilterId id) {
  MosseFilter f;
  f.freq = forward_dft(kernel).conjugate();
  f.spatial = kernel;
  f.id = id;
  return f;
}

double default_epsilon(const MosseAccumulator& acc, double relative) {
  return relative * acc.denominator().real().mean();
}

MosseFilter finalize(const MosseAccumulator& acc, double epsilon, FilterId id) {
  if (acc.count() < 1) throw Error(ErrorKind::DegenerateInput, "finalize: accumulator is empty");
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "finalize: epsilon must be >= 0");
  const Eigen::ArrayXXd den = acc.denominator().real() + epsilon;
  if ((den <= 0.0).any()) {
    throw Error(ErrorKind::DivisionDegenerate, "finalize: zero denominator bin with epsilon = " + std::to_string(epsilon));
  }
  MosseFilter f;
  f.freq = acc.numerator() / den.cast<std::complex<double>>();
  f.spatial = spatial_kernel(f.freq);
  f.id = id;
  f.train_count = acc.count();
  return f;
}

MosseFilter exact_filter(const Image& frame, const EyeAnnotation& ann, double sigma) {
  validate(ann);
  const int w = static_cast<int>(frame.cols());
  const int h = static_cast<int>(frame.rows());
  const FrequencyGrid f = forward_dft(preprocess(frame));
  const FrequencyGrid g = forward_dft(gaussian_goal(w, h, ann.center(), sigma));
  const Eigen::ArrayXXd mag = f.abs();
  if ((mag <= 1e-15 * mag.maxCoeff()).any()) {
    throw Error(ErrorKind::DivisionDegenerate, "exact_filter: zero DFT bin in training frame");
  }
  MosseFilter out;
  out.freq = g / f;
  out.spatial = spatial_kernel(out.freq);
  out.id = {ann.octave(), PoseBin::Frontal};
  out.train_count = 1;
  return out;
}

Image pad_kernel(const Image& kernel, int width, int height) {
  const int kw = static_cast<int>(kernel.cols());
  const int kh = static_cast<int>(kernel.rows());
  if (kw > width || kh > height) throw Error(ErrorKind::DimensionMismatch, "pad_kernel: kernel larger than target");
  if (kw == width && kh == height) return kernel;
  Image out = Image::Zero(height, width);
  for (int j = 0; j < kh; ++j) {
    const int y = wrap(signed_offset(j, kh), height);
    for (int i = 0; i < kw; ++i) out(y, wrap(signed_offset(i, kw), width)) = kernel(j, i);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScaleGrid ScaleGrid::quarter_octaves(double lo, double hi) {
  ScaleGrid g;
  const int n = static_cast<int>(std::lround((hi - lo) / 0.25));
  for (int i = 0; i <= n; ++i) g.octaves.push_back(lo + 0.25 * i);
  g.poses = {PoseBin::Left, PoseBin::Frontal, PoseBin::Right};
  return g;
}

std::optional<std::size_t> ScaleGrid::scale_index(double octave) const {
  if (octaves.empty()) return std::nullopt;
  double half = 0.125;
  for (std::size_t i = 1; i < octaves.size(); ++i) {
    half = (i == 1) ? 0.5 * (octaves[1] - octaves[0]) : std::min(half, 0.5 * (octaves[i] - octaves[i - 1]));
  }
  constexpr double slack = 1e-9;
  if (octave < octaves.front() - half - slack || octave > octaves.back() + half + slack) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < octaves.size(); ++i) {
    // Strict comparison keeps ties on the lower scale.
    if (std::abs(octave - octaves[i]) < std::abs(octave - octaves[best]) - slack) best = i;
  }
  return best;
}

Image crop_template(const Image& spatial, Pixel extent) {
  const int w = static_cast<int>(spatial.cols());
  const int h = static_cast<int>(spatial.rows());
  if (extent.x > w || extent.y > h || extent.x <= 0 || extent.y <= 0) {
    throw Error(ErrorKind::DimensionMismatch, "crop_template: template " + std::to_string(extent.x) + "x" +
                                                  std::to_string(extent.y) + " does not fit filter " +
                                                  std::to_string(w) + "x" + std::to_string(h));
  }
  Image t(extent.y, extent.x);
  for (int j = 0; j < extent.y; ++j) {
    const int y = wrap(j - extent.y / 2, h);
    for (int i = 0; i < extent.x; ++i) t(j, i) = spatial(y, wrap(i - extent.x / 2, w));
  }
  return t;
}

std::optional<FilterId> cell_for(const ScaleGrid& grid, const EyeAnnotation& eyes, std::optional<double> pose_degrees) {
  const auto si = grid.scale_index(eyes.octave());
  if (!si) return std::nullopt;
  const PoseBin pose = pose_degrees ? pose_bin_for(*pose_degrees) : PoseBin::Frontal;
  if (std::find(grid.poses.begin(), grid.poses.end(), pose) == grid.poses.end()) return std::nullopt;
  return FilterId{grid.octaves[*si], pose};
}

FilterBank build_bank(const Dataset& data, const BankManifest& manifest, unsigned workers) {
  const ScaleGrid& grid = manifest.grid;
  if (grid.cell_count() == 0) throw Error(ErrorKind::InvalidArgument, "build_bank: empty grid");
  for (double o : grid.octaves) {
    if (o < 3.0 || o > 7.5) throw Error(ErrorKind::InvalidArgument, "build_bank: octave outside [3, 7.5]");
  }

  std::vector<std::vector<std::size_t>> members(grid.cell_count());
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto id = cell_for(grid, data[s].eyes, data[s].pose_degrees);
    if (!id) continue;
    const auto si = *grid.scale_index(id->octave);
    const auto pi = static_cast<std::size_t>(
        std::find(grid.poses.begin(), grid.poses.end(), id->pose) - grid.poses.begin());
    members[si * grid.poses.size() + pi].push_back(s);
  }
  auto cell_id = [&](std::size_t c) {
    return FilterId{grid.octaves[c / grid.poses.size()], grid.poses[c % grid.poses.size()]};
  };
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) {
      throw Error(ErrorKind::EmptyCell, "build_bank: no training samples for cell " + to_string(cell_id(c)));
    }
  }

  FilterBank bank;
  bank.manifest = manifest;
  bank.filters.resize(members.size());
  bank.templates.resize(members.size());
  bank.cell_counts.resize(members.size());
  parallel_for(members.size(), workers, [&](std::size_t c) {
    const Sample& first = data[members[c].front()];
    MosseAccumulator acc(static_cast<int>(first.image.cols()), static_cast<int>(first.image.rows()));
    for (std::size_t s : members[c]) acc.add(data[s].image, data[s].eyes, manifest.sigma);
    const double eps = manifest.epsilon.absolute ? *manifest.epsilon.absolute
                                                 : default_epsilon(acc, manifest.epsilon.relative);
    MosseFilter f = finalize(acc, eps, cell_id(c));
    f.freq = single_precision(f.freq);
    f.spatial = single_precision(f.spatial);
    bank.templates[c] = crop_template(f.spatial, face_extent(std::exp2(f.id.octave), manifest.crop));
    bank.cell_counts[c] = acc.count();
    bank.filters[c] = std::move(f);
  });
  return bank;
}

}  // namespace cfad
