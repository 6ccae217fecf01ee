#include "cfad/bank_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "cfad/json_io.hpp"

namespace cfad {
namespace {

static_assert(std::endian::native == std::endian::little, "bank I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'F', 'A', 'D'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes.append(buf, sizeof(T));
  }
  void put_floats(const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) put(static_cast<float>(data[i]));
  }
  std::string bytes;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t begin, std::size_t end) : bytes_(bytes), pos_(begin), end_(end) {}

  template <typename T>
  T get() {
    if (end_ - pos_ < sizeof(T)) throw Error(ErrorKind::Truncated, "bank: unexpected end of data");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_floats(double* out, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<double>(get<float>());
  }
  std::string get_bytes(std::size_t n) {
    if (end_ - pos_ < n) throw Error(ErrorKind::Truncated, "bank: unexpected end of data");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

std::uint32_t crc32_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n));
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t checked_dim(std::uint32_t v) {
  if (v == 0 || v > 1u << 16) throw Error(ErrorKind::Integrity, "bank: implausible grid dimension");
  return v;
}

}  // namespace

std::string serialize_bank(const FilterBank& bank) {
  nlohmann::json manifest = to_json(bank.manifest);
  manifest["filter_count"] = bank.filters.size();
  auto& entries = manifest["filters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    nlohmann::json e = to_json(bank.filters[i].id);
    e["train_count"] = bank.filters[i].train_count;
    e["cell_count"] = i < bank.cell_counts.size() ? bank.cell_counts[i] : bank.filters[i].train_count;
    entries.push_back(e);
  }

  Writer payload;
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    const MosseFilter& f = bank.filters[i];
    payload.put(static_cast<std::uint32_t>(f.width()));
    payload.put(static_cast<std::uint32_t>(f.height()));
    payload.put_floats(reinterpret_cast<const double*>(f.freq.data()), 2 * f.freq.size());
    payload.put_floats(f.spatial.data(), f.spatial.size());
    const Image& t = bank.templates.at(i);
    payload.put(static_cast<std::uint32_t>(t.cols()));
    payload.put(static_cast<std::uint32_t>(t.rows()));
    payload.put_floats(t.data(), t.size());
  }

  const std::string manifest_text = manifest.dump();
  Writer out;
  out.bytes.append(kMagic, 4);
  out.put(kBankFormatVersion);
  out.put(static_cast<std::uint32_t>(manifest_text.size()));
  out.bytes += manifest_text;
  out.put(static_cast<std::uint32_t>(payload.bytes.size()));
  out.bytes += payload.bytes;
  out.put(crc32_of(payload.bytes.data(), payload.bytes.size()));
  return std::move(out.bytes);
}

FilterBank deserialize_bank(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::FormatVersion, "bank: bad magic bytes (not a CFAD file)");
  }
  Reader in(bytes, 4, bytes.size());
  const auto version = in.get<std::uint16_t>();
  if (version != kBankFormatVersion) {
    throw Error(ErrorKind::FormatVersion, "bank: unsupported format version " + std::to_string(version));
  }
  const auto manifest_len = in.get<std::uint32_t>();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in.get_bytes(manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Integrity, std::string("bank: unreadable manifest: ") + e.what());
  }
  const auto payload_len = in.get<std::uint32_t>();
  const std::size_t payload_begin = in.pos();
  if (bytes.size() - payload_begin < static_cast<std::size_t>(payload_len) + 4) {
    throw Error(ErrorKind::Truncated, "bank: payload truncated");
  }
  Reader crc_reader(bytes, payload_begin + payload_len, bytes.size());
  const auto stored_crc = crc_reader.get<std::uint32_t>();
  if (stored_crc != crc32_of(bytes.data() + payload_begin, payload_len)) {
    throw Error(ErrorKind::Checksum, "bank: payload CRC32 mismatch");
  }

  FilterBank bank;
  std::size_t declared = 0;
  try {
    bank.manifest = manifest_from_json(manifest);
    declared = manifest.at("filter_count").get<std::size_t>();
    if (manifest.at("filters").size() != declared) throw Error(ErrorKind::Integrity, "bank: manifest filter list size");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Integrity, std::string("bank: malformed manifest: ") + e.what());
  }

  Reader payload(bytes, payload_begin, payload_begin + payload_len);
  while (!payload.done()) {
    const std::size_t i = bank.filters.size();
    if (i >= declared) throw Error(ErrorKind::Integrity, "bank: payload holds more filters than the manifest declares");
    MosseFilter f;
    const auto w = checked_dim(payload.get<std::uint32_t>());
    const auto h = checked_dim(payload.get<std::uint32_t>());
    f.freq.resize(h, w);
    payload.get_floats(reinterpret_cast<double*>(f.freq.data()), 2 * f.freq.size());
    f.spatial.resize(h, w);
    payload.get_floats(f.spatial.data(), f.spatial.size());
    const auto tw = checked_dim(payload.get<std::uint32_t>());
    const auto th = checked_dim(payload.get<std::uint32_t>());
    Image t(th, tw);
    payload.get_floats(t.data(), t.size());

    const auto& entry = manifest["filters"][i];
    f.id = {entry.at("octave").get<double>(), parse_pose(entry.at("pose").get<std::string>())};
    f.train_count = entry.at("train_count").get<int>();
    bank.cell_counts.push_back(entry.at("cell_count").get<int>());
    bank.filters.push_back(std::move(f));
    bank.templates.push_back(std::move(t));
  }
  if (bank.filters.size() != declared) {
    throw Error(ErrorKind::Integrity, "bank: manifest declares " + std::to_string(declared) + " filters, payload holds " +
                                          std::to_string(bank.filters.size()));
  }
  return bank;
}

void save_bank(const FilterBank& bank, const std::filesystem::path& path) {
  const std::string bytes = serialize_bank(bank);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write bank: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

FilterBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open bank: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bank(bytes);
}

bool banks_identical(const FilterBank& a, const FilterBank& b) {
  if (a.filters.size() != b.filters.size() || a.templates.size() != b.templates.size()) return false;
  if (to_json(a.manifest) != to_json(b.manifest) || a.cell_counts != b.cell_counts) return false;
  auto same_bits = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(*x.data()) * static_cast<std::size_t>(x.size())) == 0;
  };
  for (std::size_t i = 0; i < a.filters.size(); ++i) {
    const auto& fa = a.filters[i];
    const auto& fb = b.filters[i];
    if (fa.id != fb.id || fa.train_count != fb.train_count) return false;
    if (!same_bits(fa.freq, fb.freq) || !same_bits(fa.spatial, fb.spatial)) return false;
    if (!same_bits(a.templates[i], b.templates[i])) return false;
  }
  return true;
}

}  // namespace cfad
