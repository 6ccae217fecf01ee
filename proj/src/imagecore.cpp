#include <cmath>
#include <string>

#include "cfad/image.hpp"

namespace cfad {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::FileNotFound: return "file_not_found";
    case ErrorKind::MalformedHeader: return "malformed_header";
    case ErrorKind::UnsupportedBitDepth: return "unsupported_bit_depth";
    case ErrorKind::DegenerateInput: return "degenerate_input";
    case ErrorKind::OutOfBounds: return "out_of_bounds";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::DivisionDegenerate: return "division_degenerate";
    case ErrorKind::EmptyCell: return "empty_cell";
    case ErrorKind::FormatVersion: return "format_version";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::Checksum: return "checksum";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::DegenerateSurface: return "degenerate_surface";
    case ErrorKind::SizeLimit: return "size_limit";
    case ErrorKind::EmptyTestSet: return "empty_test_set";
    case ErrorKind::IdentityOverlap: return "identity_overlap";
    case ErrorKind::ConfigConflict: return "config_conflict";
    case ErrorKind::HashMismatch: return "hash_mismatch";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void validate(const EyeAnnotation& ann) {
  if (!(ann.interocular() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "eye annotation: eyes coincide");
  }
}

void check_finite(const Image& img, const char* what) {
  if (!img.allFinite()) throw Error(ErrorKind::DegenerateInput, std::string(what) + ": non-finite pixel");
}

Image resample_bilinear(const Image& img, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "resample: factor must be positive");
  if (factor > 1.0 + 1e-12) throw Error(ErrorKind::ConfigConflict, "resample: upsampling is not supported");
  if (factor >= 1.0) return img;

  const int src_w = static_cast<int>(img.cols());
  const int src_h = static_cast<int>(img.rows());
  const int w = std::max(1, static_cast<int>(std::floor(src_w * factor)));
  const int h = std::max(1, static_cast<int>(std::floor(src_h * factor)));
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    const double sy = std::clamp((y + 0.5) / factor - 0.5, 0.0, src_h - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = std::clamp((x + 0.5) / factor - 0.5, 0.0, src_w - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - x0;
      out(y, x) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x1)) +
                  fy * ((1 - fx) * img(y1, x0) + fx * img(y1, x1));
    }
  }
  return out;
}

}  // namespace cfad
