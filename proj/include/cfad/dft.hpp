#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "cfad/image.hpp"

namespace cfad {

template <typename Scalar>
using FrequencyGridT = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FrequencyGrid = FrequencyGridT<double>;

namespace detail {

// Row-then-column 1-D transforms. Eigen's FFT (kissfft backend) handles any
// length, so no padding to powers of two is needed. The inverse carries the
// 1/N scale, making forward followed by inverse the identity.
template <typename Scalar>
void transform_2d(FrequencyGridT<Scalar>& grid, bool inverse) {
  using Complex = std::complex<Scalar>;
  thread_local Eigen::FFT<Scalar> fft;
  const Eigen::Index h = grid.rows();
  const Eigen::Index w = grid.cols();
  std::vector<Complex> in(static_cast<std::size_t>(std::max(w, h)));
  std::vector<Complex> out(in.size());

  for (Eigen::Index y = 0; y < h; ++y) {
    Complex* row = grid.data() + y * w;
    std::copy(row, row + w, in.begin());
    if (inverse) {
      fft.inv(out.data(), in.data(), static_cast<int>(w));
    } else {
      fft.fwd(out.data(), in.data(), static_cast<int>(w));
    }
    std::copy(out.begin(), out.begin() + w, row);
  }
  for (Eigen::Index x = 0; x < w; ++x) {
    for (Eigen::Index y = 0; y < h; ++y) in[static_cast<std::size_t>(y)] = grid(y, x);
    if (inverse) {
      fft.inv(out.data(), in.data(), static_cast<int>(h));
    } else {
      fft.fwd(out.data(), in.data(), static_cast<int>(h));
    }
    for (Eigen::Index y = 0; y < h; ++y) grid(y, x) = out[static_cast<std::size_t>(y)];
  }
}

}  // namespace detail

template <typename Derived>
FrequencyGridT<typename Derived::Scalar> forward_dft(const Eigen::ArrayBase<Derived>& img) {
  using Scalar = typename Derived::Scalar;
  if (img.size() == 0) throw Error(ErrorKind::InvalidArgument, "forward_dft: empty image");
  FrequencyGridT<Scalar> grid = img.template cast<std::complex<Scalar>>();
  detail::transform_2d(grid, false);
  return grid;
}

/// Complex inverse transform.
template <typename Scalar>
FrequencyGridT<Scalar> inverse_dft_complex(FrequencyGridT<Scalar> grid) {
  if (grid.size() == 0) throw Error(ErrorKind::InvalidArgument, "inverse_dft: empty grid");
  detail::transform_2d(grid, true);
  return grid;
}

/// Inverse transform, keeping the real part.
template <typename Scalar>
ImageT<Scalar> inverse_dft(const FrequencyGridT<Scalar>& grid) {
  return inverse_dft_complex(grid).real();
}

}  // namespace cfad
