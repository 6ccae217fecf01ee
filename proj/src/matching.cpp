#include "cfad/matching.hpp"

#include <algorithm>
#include <cmath>

namespace cfad {
namespace {

constexpr int kPsrExclusionRadius = 2;  // 5x5 window

// Zero-padded summed-area table: sat(y, x) = sum of a(0..y-1, 0..x-1).
Eigen::ArrayXXd summed_area(const Image& a) {
  Eigen::ArrayXXd sat = Eigen::ArrayXXd::Zero(a.rows() + 1, a.cols() + 1);
  for (Eigen::Index y = 0; y < a.rows(); ++y) {
    double row = 0.0;
    for (Eigen::Index x = 0; x < a.cols(); ++x) {
      row += a(y, x);
      sat(y + 1, x + 1) = sat(y, x + 1) + row;
    }
  }
  return sat;
}

double box_sum(const Eigen::ArrayXXd& sat, int x, int y, int w, int h) {
  return sat(y + h, x + w) - sat(y, x + w) - sat(y + h, x) + sat(y, x);
}

}  // namespace

FrequencyGrid image_spectrum(const Image& preprocessed, int width, int height) {
  if (preprocessed.cols() == width && preprocessed.rows() == height) return forward_dft(preprocessed);
  Image padded = Image::Zero(height, width);
  padded.topLeftCorner(preprocessed.rows(), preprocessed.cols()) = preprocessed;
  return forward_dft(padded);
}

FrequencyGrid filter_spectrum(const MosseFilter& filt, int width, int height) {
  if (filt.width() == width && filt.height() == height) return filt.freq;
  return forward_dft(pad_kernel(filt.spatial, width, height)).conjugate();
}

CorrelationSurface correlate_spectrum(const FrequencyGrid& spectrum, const MosseFilter& filt) {
  const int w = static_cast<int>(spectrum.cols());
  const int h = static_cast<int>(spectrum.rows());
  if (filt.width() > w || filt.height() > h) {
    throw Error(ErrorKind::DimensionMismatch, "correlate: filter larger than padded image");
  }
  CorrelationSurface s;
  if (filt.width() == w && filt.height() == h) {
    s.values = inverse_dft<double>(spectrum * filt.freq);
  } else {
    s.values = inverse_dft<double>(spectrum * filter_spectrum(filt, w, h));
  }
  return s;
}

CorrelationSurface freq_correlate(const Image& img, const MosseFilter& filt, int max_dim) {
  const int w = std::max(static_cast<int>(img.cols()), filt.width());
  const int h = std::max(static_cast<int>(img.rows()), filt.height());
  if (w > max_dim || h > max_dim) {
    throw Error(ErrorKind::SizeLimit, "freq_correlate: " + std::to_string(w) + "x" + std::to_string(h) +
                                          " exceeds the maximum of " + std::to_string(max_dim));
  }
  return correlate_spectrum(image_spectrum(preprocess(img), w, h), filt);
}

NccImage::NccImage(const Image& img)
    : width(static_cast<int>(img.cols())),
      height(static_cast<int>(img.rows())),
      spectrum(forward_dft(img)),
      sum(summed_area(img)),
      sum_sq(summed_area(img.square())) {}

CorrelationSurface spatial_ncc(const Image& img, const Image& tmpl, NccMode mode) {
  if (tmpl.cols() > img.cols() || tmpl.rows() > img.rows() || tmpl.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "spatial_ncc: template larger than image");
  }
  return spatial_ncc(NccImage(img), tmpl, mode);
}

CorrelationSurface spatial_ncc(const NccImage& img, const Image& tmpl, NccMode mode) {
  const int iw = img.width;
  const int ih = img.height;
  const int tw = static_cast<int>(tmpl.cols());
  const int th = static_cast<int>(tmpl.rows());
  if (tw > iw || th > ih || tw <= 0 || th <= 0) {
    throw Error(ErrorKind::DimensionMismatch, "spatial_ncc: template larger than image");
  }
  if ((tmpl == 0.0).all()) throw Error(ErrorKind::DegenerateInput, "spatial_ncc: all-zero template");

  const double n = static_cast<double>(tw) * th;
  Image t = tmpl;
  if (mode == NccMode::MeanSubtracted) t -= t.mean();
  const double t_norm = std::sqrt(t.square().sum());
  if (!(t_norm > 0.0)) throw Error(ErrorKind::DegenerateInput, "spatial_ncc: constant template in mean-subtracted mode");

  // Numerator as a linear correlation via the DFT: with the template at the
  // grid origin, valid positions never wrap.
  Image t_pad = Image::Zero(ih, iw);
  t_pad.topLeftCorner(th, tw) = t;
  const Image num_full = inverse_dft<double>(img.spectrum * forward_dft(t_pad).conjugate());

  const auto& sat = img.sum;
  const auto& sat2 = img.sum_sq;
  const int ow = iw - tw + 1;
  const int oh = ih - th + 1;
  Image energy(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double e = box_sum(sat2, x, y, tw, th);
      if (mode == NccMode::MeanSubtracted) {
        const double s = box_sum(sat, x, y, tw, th);
        e -= s * s / n;
      }
      energy(y, x) = std::max(e, 0.0);
    }
  }
  const double floor = 1e-10 * energy.maxCoeff();

  CorrelationSurface out;
  out.values.resize(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const double e = energy(y, x);
      out.values(y, x) = (e > floor && e > 0.0) ? std::clamp(num_full(y, x) / (std::sqrt(e) * t_norm), -1.0, 1.0) : 0.0;
    }
  }
  return out;
}

Peak find_peak(const Image& values) {
  if (values.size() == 0) throw Error(ErrorKind::InvalidArgument, "find_peak: empty surface");
  Peak best{{0, 0}, values(0, 0)};
  for (int y = 0; y < values.rows(); ++y) {
    for (int x = 0; x < values.cols(); ++x) {
      if (values(y, x) > best.value) best = {{x, y}, values(y, x)};
    }
  }
  return best;
}

PsrScore psr(const CorrelationSurface& surface) {
  const Image& v = surface.values;
  if (v.size() <= 25) throw Error(ErrorKind::DegenerateSurface, "psr: surface needs more than 25 values");
  const Peak peak = find_peak(v);
  const int x0 = std::max(0, peak.xy.x - kPsrExclusionRadius);
  const int x1 = std::min(static_cast<int>(v.cols()) - 1, peak.xy.x + kPsrExclusionRadius);
  const int y0 = std::max(0, peak.xy.y - kPsrExclusionRadius);
  const int y1 = std::min(static_cast<int>(v.rows()) - 1, peak.xy.y + kPsrExclusionRadius);
  auto outside = [&](int x, int y) { return x < x0 || x > x1 || y < y0 || y > y1; };

  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < v.rows(); ++y) {
    for (int x = 0; x < v.cols(); ++x) {
      if (outside(x, y)) {
        sum += v(y, x);
        ++count;
      }
    }
  }
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (int y = 0; y < v.rows(); ++y) {
    for (int x = 0; x < v.cols(); ++x) {
      if (outside(x, y)) sq += (v(y, x) - mean) * (v(y, x) - mean);
    }
  }
  const double sigma = std::sqrt(sq / static_cast<double>(count));
  if (!(sigma > 1e-12 * (std::abs(mean) + std::abs(peak.value)))) {
    throw Error(ErrorKind::DegenerateSurface, "psr: sidelobe has zero variance");
  }
  return {peak.value, peak.xy, mean, sigma, (peak.value - mean) / sigma};
}

CorrelationSurface crop_surface(const CorrelationSurface& s, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 || x0 + width > s.width() || y0 + height > s.height()) {
    throw Error(ErrorKind::OutOfBounds, "crop_surface: window outside surface");
  }
  return {s.values.block(y0, x0, height, width), {s.origin_offset.x + x0, s.origin_offset.y + y0}};
}

}  // namespace cfad
