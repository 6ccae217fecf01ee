#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "cfad/error.hpp"

namespace cfad {

// Images are row-major Eigen arrays: rows() is the height, cols() the width,
// and a pixel is addressed as img(y, x).
template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Image = ImageT<double>;
using ImageF = ImageT<float>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Eye centers in pixel coordinates. "Left" is the eye with the smaller x in the image.
struct EyeAnnotation {
  Point2 left_eye;
  Point2 right_eye;

  double interocular() const { return std::hypot(right_eye.x - left_eye.x, right_eye.y - left_eye.y); }
  double octave() const { return std::log2(interocular()); }
  Point2 center() const { return {0.5 * (left_eye.x + right_eye.x), 0.5 * (left_eye.y + right_eye.y)}; }
};

/// Throws InvalidArgument unless the eyes are distinct points.
void validate(const EyeAnnotation& ann);

struct FaceRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const FaceRect&, const FaceRect&) = default;
};

/// Face extent around the eye midpoint, in interocular widths.
struct CropGeometry {
  double half_width_iod = 1.0;
  double half_height_iod = 1.25;
};

/// Template dimensions for a face of the given interocular width.
inline Pixel face_extent(double iod, const CropGeometry& crop) {
  return {std::max(1, static_cast<int>(std::lround(2.0 * crop.half_width_iod * iod))),
          std::max(1, static_cast<int>(std::lround(2.0 * crop.half_height_iod * iod)))};
}

/// Rectangle of the given extent whose center pixel (x + w/2, y + h/2) is `center`.
inline FaceRect rect_around(Pixel center, Pixel extent) {
  return {center.x - extent.x / 2, center.y - extent.y / 2, extent.x, extent.y};
}

inline Pixel round_point(Point2 p) {
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
}

/// Ground-truth face rectangle for an annotation.
inline FaceRect face_rect(const EyeAnnotation& ann, const CropGeometry& crop = {}) {
  return rect_around(round_point(ann.center()), face_extent(ann.interocular(), crop));
}

// ---------------------------------------------------------------------------
// Preprocessing. Each stage is usable on its own; preprocess() chains them.

/// ln(1 + p). Input pixels must be non-negative.
template <typename Derived>
ImageT<typename Derived::Scalar> log_transform(const Eigen::ArrayBase<Derived>& img) {
  if ((img < typename Derived::Scalar(0)).any()) {
    throw Error(ErrorKind::InvalidArgument, "log_transform: negative pixel value");
  }
  return img.log1p();
}

/// Shift to zero mean and scale to unit L2 norm.
template <typename Derived>
ImageT<typename Derived::Scalar> normalize_unit(const Eigen::ArrayBase<Derived>& img) {
  using Scalar = typename Derived::Scalar;
  ImageT<Scalar> out = img - img.mean();
  const Scalar norm = std::sqrt(out.square().sum());
  const Scalar floor = Scalar(1e-12) * (std::abs(img.mean()) + Scalar(1)) *
                       std::sqrt(static_cast<Scalar>(img.size()));
  if (!(norm > floor)) {
    throw Error(ErrorKind::DegenerateInput, "preprocess: image has zero variance");
  }
  out /= norm;
  return out;
}

/// Separable raised-cosine (Hann) window; endpoints are exactly zero.
template <typename Scalar = double>
ImageT<Scalar> hann_window(int width, int height) {
  auto taper = [](int n) {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> w(n);
    if (n == 1) {
      w(0) = Scalar(1);
      return w;
    }
    for (int i = 0; i < n; ++i) {
      w(i) = Scalar(0.5) * (Scalar(1) - std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * i / (n - 1)));
    }
    w(0) = w(n - 1) = Scalar(0);
    return w;
  };
  const auto wx = taper(width);
  const auto wy = taper(height);
  return (wy.matrix() * wx.matrix().transpose()).array();
}

template <typename Derived>
ImageT<typename Derived::Scalar> apply_window(const Eigen::ArrayBase<Derived>& img) {
  return img * hann_window<typename Derived::Scalar>(static_cast<int>(img.cols()), static_cast<int>(img.rows()));
}

/// Log transform, zero-mean/unit-norm normalization, then Hann windowing.
template <typename Derived>
ImageT<typename Derived::Scalar> preprocess(const Eigen::ArrayBase<Derived>& img) {
  return apply_window(normalize_unit(log_transform(img)));
}

/// Zero image with a unit Gaussian impulse at `center`.
template <typename Scalar = double>
ImageT<Scalar> gaussian_goal(int width, int height, Point2 center, Scalar sigma) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "gaussian_goal: empty image");
  if (!(sigma > 0)) throw Error(ErrorKind::InvalidArgument, "gaussian_goal: sigma must be positive");
  if (!(center.x >= 0 && center.y >= 0 && center.x <= width - 1 && center.y <= height - 1)) {
    throw Error(ErrorKind::OutOfBounds, "gaussian_goal: center outside image");
  }
  ImageT<Scalar> g(height, width);
  const Scalar inv = Scalar(1) / (Scalar(2) * sigma * sigma);
  for (int y = 0; y < height; ++y) {
    const Scalar dy2 = Scalar((y - center.y) * (y - center.y));
    for (int x = 0; x < width; ++x) {
      const Scalar dx = Scalar(x - center.x);
      g(y, x) = std::exp(-(dx * dx + dy2) * inv);
    }
  }
  return g;
}

/// Circular translation: out(y, x) = img(y - dy, x - dx) with wrap-around.
template <typename Derived>
ImageT<typename Derived::Scalar> circular_shift(const Eigen::ArrayBase<Derived>& img, int dx, int dy) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  ImageT<typename Derived::Scalar> out(h, w);
  for (int y = 0; y < h; ++y) {
    const int sy = ((y - dy) % h + h) % h;
    for (int x = 0; x < w; ++x) out(y, x) = img(sy, ((x - dx) % w + w) % w);
  }
  return out;
}

/// Bilinear downscale by `factor` in (0, 1]. Output pixel centers map back as
/// src = (dst + 0.5) / factor - 0.5, so a point p maps to (p + 0.5) * factor - 0.5.
Image resample_bilinear(const Image& img, double factor);

/// Map a source-image coordinate through resample_bilinear(.., factor).
inline Point2 resampled_point(Point2 p, double factor) {
  return {(p.x + 0.5) * factor - 0.5, (p.y + 0.5) * factor - 0.5};
}

/// Throws DegenerateInput if any pixel is NaN or infinite.
void check_finite(const Image& img, const char* what);

}  // namespace cfad
