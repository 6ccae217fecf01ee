#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfad/image.hpp"

namespace cfad {

/// Reads a binary 8-bit PGM (P5), scaling pixels to [0, 1] by the header maxval.
Image load_image(const std::filesystem::path& path);

/// Writes a binary 8-bit PGM. Pixels are clamped to [0, 1] and rounded to k/255.
void save_pgm(const Image& img, const std::filesystem::path& path);

/// One row of an annotation CSV.
struct AnnotationRow {
  std::string path;  // as written in the CSV
  EyeAnnotation eyes;
  std::optional<double> pose_degrees;
};

/// `path,left_x,left_y,right_x,right_y[,pose_degrees]` with a single header line.
std::vector<AnnotationRow> read_annotations(const std::filesystem::path& csv);
void write_annotations(const std::vector<AnnotationRow>& rows, const std::filesystem::path& csv);

/// An image with its ground truth, as consumed by training and evaluation.
struct Sample {
  std::string path;
  Image image;
  EyeAnnotation eyes;
  std::optional<double> pose_degrees;
};

using Dataset = std::vector<Sample>;

/// Loads every image listed in an annotation CSV; relative paths resolve
/// against the CSV's directory.
Dataset load_dataset(const std::filesystem::path& csv);

}  // namespace cfad
