#include "cfad/pgm.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace cfad {
namespace {

// Header tokens are separated by whitespace; '#' starts a comment running to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#') {
      ++pos_;
    }
    if (start == pos_) throw Error(ErrorKind::MalformedHeader, "pgm: unexpected end of header");
    return bytes_.substr(start, pos_ - start);
  }

  long number() {
    const std::string t = token();
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v <= 0) {
      throw Error(ErrorKind::MalformedHeader, "pgm: bad header field '" + t + "'");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorKind::MalformedHeader, "pgm: missing separator before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::MalformedHeader,
                "annotations line " + std::to_string(line) + ": bad number '" + t + "'");
  }
  return v;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open image: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  HeaderReader header(bytes);
  if (bytes.size() < 2 || header.token() != "P5") {
    throw Error(ErrorKind::MalformedHeader, "not a binary PGM (P5): " + path.string());
  }
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (maxval > 255) {
    throw Error(ErrorKind::UnsupportedBitDepth,
                "pgm maxval " + std::to_string(maxval) + " not supported (8-bit only): " + path.string());
  }
  const std::size_t offset = header.raster_offset();
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + count) throw Error(ErrorKind::Truncated, "pgm raster truncated: " + path.string());

  Image img(height, width);
  const double scale = static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    img.data()[i] = static_cast<unsigned char>(bytes[offset + i]) / scale;
  }
  return img;
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write image: " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string raster(static_cast<std::size_t>(img.size()), '\0');
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.data()[i], 0.0, 1.0);
    raster[static_cast<std::size_t>(i)] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<AnnotationRow> read_annotations(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open annotations: " + csv.string());
  std::vector<AnnotationRow> rows;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedHeader, "annotations: missing header line");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5 && fields.size() != 6) {
      throw Error(ErrorKind::MalformedHeader, "annotations line " + std::to_string(lineno) + ": expected 5 or 6 fields");
    }
    AnnotationRow row;
    row.path = trim(fields[0]);
    row.eyes.left_eye = {parse_double(fields[1], lineno), parse_double(fields[2], lineno)};
    row.eyes.right_eye = {parse_double(fields[3], lineno), parse_double(fields[4], lineno)};
    if (fields.size() == 6 && !trim(fields[5]).empty()) row.pose_degrees = parse_double(fields[5], lineno);
    validate(row.eyes);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_annotations(const std::vector<AnnotationRow>& rows, const std::filesystem::path& csv) {
  std::ofstream out(csv);
  if (!out) throw Error(ErrorKind::Io, "cannot write annotations: " + csv.string());
  out << "path,left_x,left_y,right_x,right_y,pose_degrees\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.path << ',' << r.eyes.left_eye.x << ',' << r.eyes.left_eye.y << ',' << r.eyes.right_eye.x << ','
        << r.eyes.right_eye.y << ',';
    if (r.pose_degrees) out << *r.pose_degrees;
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + csv.string());
}

Dataset load_dataset(const std::filesystem::path& csv) {
  const auto base = csv.parent_path();
  Dataset data;
  for (auto& row : read_annotations(csv)) {
    std::filesystem::path p(row.path);
    if (p.is_relative()) p = base / p;
    data.push_back({row.path, load_image(p), row.eyes, row.pose_degrees});
  }
  return data;
}

}  // namespace cfad
