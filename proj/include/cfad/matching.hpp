#pragma once

#include "cfad/dft.hpp"
#include "cfad/image.hpp"
#include "cfad/mosse.hpp"

namespace cfad {

/// A response map. Surface pixel (x, y) corresponds to source pixel
/// (x + origin_offset.x, y + origin_offset.y).
struct CorrelationSurface {
  Image values;
  Pixel origin_offset;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

struct Peak {
  Pixel xy;
  double value = 0.0;
};

struct PsrScore {
  double peak_value = 0.0;
  Pixel peak_xy;  // surface coordinates
  double mean = 0.0;
  double sigma = 0.0;
  double psr = 0.0;
};

enum class NccMode {
  Literal,         // sum(I T) / (|I_window| |T|)
  MeanSubtracted,  // correlation coefficient: window and template means removed
};

inline constexpr int kDefaultMaxCorrelationDim = 4096;

/// Preprocessed image, zero-padded at the bottom/right to (width, height), transformed.
FrequencyGrid image_spectrum(const Image& preprocessed, int width, int height);

/// The filter's H* on a (width, height) grid; re-embeds the spatial kernel when
/// the grid is larger than the filter.
FrequencyGrid filter_spectrum(const MosseFilter& filt, int width, int height);

/// Circular correlation of preprocess(img) with the filter on the common grid
/// max(image, filter) per dimension. The image sits at the grid origin, so
/// origin_offset is (0, 0); rows and columns past the image are padding.
CorrelationSurface freq_correlate(const Image& img, const MosseFilter& filt,
                                  int max_dim = kDefaultMaxCorrelationDim);

/// Same, starting from a spectrum produced by image_spectrum().
CorrelationSurface correlate_spectrum(const FrequencyGrid& spectrum, const MosseFilter& filt);

/// Image-side terms of the NCC shared by every template: the image spectrum
/// and summed-area tables of I and I^2.
struct NccImage {
  explicit NccImage(const Image& img);

  int width = 0;
  int height = 0;
  FrequencyGrid spectrum;
  Eigen::ArrayXXd sum;     // (h+1) x (w+1), zero first row/column
  Eigen::ArrayXXd sum_sq;
};

/// Valid-mode normalized cross-correlation. Surface (x, y) is the template's
/// top-left in the image; windows with zero energy score 0.
CorrelationSurface spatial_ncc(const Image& img, const Image& tmpl, NccMode mode = NccMode::Literal);
CorrelationSurface spatial_ncc(const NccImage& img, const Image& tmpl, NccMode mode = NccMode::Literal);

/// Global maximum; ties go to the first pixel in row-major order.
Peak find_peak(const Image& values);
inline Peak find_peak(const CorrelationSurface& s) { return find_peak(s.values); }

/// Peak-to-sidelobe ratio. The sidelobe is the whole surface minus the 5x5
/// window centered on the global peak (clipped at the borders).
PsrScore psr(const CorrelationSurface& surface);

/// Sub-window of a surface; origin_offset is updated so coordinates still map to the source.
CorrelationSurface crop_surface(const CorrelationSurface& s, int x0, int y0, int width, int height);

}  // namespace cfad
