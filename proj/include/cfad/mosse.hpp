#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "cfad/dft.hpp"
#include "cfad/image.hpp"
#include "cfad/pgm.hpp"

namespace cfad {

/// Yaw bins: LEFT < -12 deg, FRONTAL in [-12, +12], RIGHT > +12 deg.
enum class PoseBin : std::uint8_t { Left = 0, Frontal = 1, Right = 2 };

PoseBin pose_bin_for(double degrees);
std::string_view pose_name(PoseBin pose);
PoseBin parse_pose(std::string_view name);

/// Identifies a filter by its grid cell. Ordered by octave, then pose.
struct FilterId {
  double octave = 0.0;
  PoseBin pose = PoseBin::Frontal;

  friend auto operator<=>(const FilterId&, const FilterId&) = default;
};

std::string to_string(const FilterId& id);

/// Running MOSSE sums: numerator = sum G .* conj(F), denominator = sum F .* conj(F).
class MosseAccumulator {
 public:
  MosseAccumulator(int width, int height);
  MosseAccumulator(FrequencyGrid numerator, FrequencyGrid denominator, int count);

  /// Adds one frame: F = DFT(preprocess(frame)), G = DFT(goal at the eye midpoint).
  void add(const Image& frame, const EyeAnnotation& ann, double sigma);

  /// Element-wise sum of two accumulators of equal dims.
  void merge(const MosseAccumulator& other);

  int width() const { return static_cast<int>(numerator_.cols()); }
  int height() const { return static_cast<int>(numerator_.rows()); }
  int count() const { return count_; }
  const FrequencyGrid& numerator() const { return numerator_; }
  const FrequencyGrid& denominator() const { return denominator_; }

 private:
  FrequencyGrid numerator_;
  FrequencyGrid denominator_;
  int count_ = 0;
};

/// Functional form of MosseAccumulator::add.
MosseAccumulator accumulate(MosseAccumulator acc, const Image& frame, const EyeAnnotation& ann, double sigma);

struct MosseFilter {
  FrequencyGrid freq;  // H*, applied as DFT(preprocessed image) .* freq
  Image spatial;       // kernel k with response(p) = sum_t k(t) image(p + t), offsets wrapped
  FilterId id;
  int train_count = 0;

  int width() const { return static_cast<int>(freq.cols()); }
  int height() const { return static_cast<int>(freq.rows()); }

  /// Builds a filter from a spatial kernel in the wrapped-offset convention.
  static MosseFilter from_spatial(const Image& kernel, FilterId id = {});
};

/// Spatial kernel for a frequency filter: real(IDFT(conj(H*))).
Image spatial_kernel(const FrequencyGrid& freq);

/// Default regularization: 1e-2 times the mean of the denominator's real part.
double default_epsilon(const MosseAccumulator& acc, double relative = 1e-2);

/// H* = numerator / (denominator + epsilon).
MosseFilter finalize(const MosseAccumulator& acc, double epsilon, FilterId id = {});

/// Per-frame exact filter H* = G / F.
MosseFilter exact_filter(const Image& frame, const EyeAnnotation& ann, double sigma);

/// Wrapped-offset signed index: i in [0, n) maps to i or i - n, split at ceil(n/2).
inline int signed_offset(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

/// Re-embeds a wrapped-offset kernel into a larger grid, keeping offsets intact.
Image pad_kernel(const Image& kernel, int width, int height);

// ---------------------------------------------------------------------------
// Filter banks

struct ScaleGrid {
  std::vector<double> octaves;  // ascending
  std::vector<PoseBin> poses;   // subset of {Left, Frontal, Right}, in that order

  /// Quarter-octave scales from `lo` to `hi` inclusive, all three poses.
  static ScaleGrid quarter_octaves(double lo = 4.0, double hi = 7.0);

  std::size_t cell_count() const { return octaves.size() * poses.size(); }
  /// Nearest scale index for an octave (ties go to the lower scale), or nullopt
  /// when the octave lies more than half a grid spacing outside the grid.
  std::optional<std::size_t> scale_index(double octave) const;
};

/// Regularization policy: absolute epsilon if set, else relative * mean(denominator).
struct Regularization {
  double relative = 1e-2;
  std::optional<double> absolute;
};

struct BankManifest {
  ScaleGrid grid = ScaleGrid::quarter_octaves();
  double sigma = 2.0;
  Regularization epsilon;
  CropGeometry crop;
  std::string corpus_hash;  // hash of the corpus the bank was trained on, if known
};

struct FilterBank {
  BankManifest manifest;
  std::vector<MosseFilter> filters;
  std::vector<Image> templates;  // face crops of the spatial filters, one per filter
  std::vector<int> cell_counts;  // training samples per filter

  std::size_t size() const { return filters.size(); }
};

/// Face template cropped from a spatial kernel: the window of offsets
/// [-w/2, w - w/2) x [-h/2, h - h/2) around the filter origin.
Image crop_template(const Image& spatial, Pixel extent);

/// Grid cell for a sample, or nullopt if its scale is off the grid or its pose bin is not in it.
std::optional<FilterId> cell_for(const ScaleGrid& grid, const EyeAnnotation& eyes, std::optional<double> pose_degrees);

/// Trains one filter per grid cell (octave-major, poses in grid order).
/// Filter and template values are rounded to single precision so the bank
/// survives a save/load round trip bit for bit.
FilterBank build_bank(const Dataset& data, const BankManifest& manifest, unsigned workers = 0);

}  // namespace cfad
