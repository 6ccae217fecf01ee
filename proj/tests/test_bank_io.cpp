#include <doctest.h>

#include <cstring>
#include <functional>
#include <filesystem>

#include <json.hpp>

#include "cfad/bank_io.hpp"
#include "cfad/synth.hpp"

using namespace cfad;

namespace {

const FilterBank& grid_bank() {
  static const FilterBank bank = [] {
    CorpusSpec spec = bank_grid_spec();
    return build_bank(to_dataset(generate_corpus(spec, 39, 0, 21, 1).train), {});
  }();
  return bank;
}

ErrorKind load_error(const std::string& bytes) {
  try {
    deserialize_bank(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::uint32_t read_u32(const std::string& s, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, s.data() + at, 4);
  return v;
}

// Rewrites the manifest section, leaving the payload and its checksum alone.
std::string with_manifest(const std::string& bytes, const std::function<void(nlohmann::json&)>& edit) {
  const std::uint32_t len = read_u32(bytes, 6);
  nlohmann::json m = nlohmann::json::parse(bytes.substr(10, len));
  edit(m);
  const std::string text = m.dump();
  std::string out = bytes.substr(0, 6);
  const std::uint32_t n = static_cast<std::uint32_t>(text.size());
  out.append(reinterpret_cast<const char*>(&n), 4);
  out += text;
  out += bytes.substr(10 + len);
  return out;
}

}  // namespace

TEST_CASE("bank io: 39-filter round trip is bit-identical") {
  const FilterBank& bank = grid_bank();
  REQUIRE(bank.size() == 39);
  const std::string bytes = serialize_bank(bank);
  const FilterBank back = deserialize_bank(bytes);
  CHECK(banks_identical(bank, back));
  CHECK(serialize_bank(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "cfad_test_bank.cfad";
  save_bank(bank, path);
  CHECK(banks_identical(bank, load_bank(path)));
  CHECK(bytes.substr(0, 4) == "CFAD");
}

TEST_CASE("bank io: layout header") {
  const std::string bytes = serialize_bank(grid_bank());
  std::uint16_t version;
  std::memcpy(&version, bytes.data() + 4, 2);
  CHECK(version == kBankFormatVersion);
  const std::uint32_t mlen = read_u32(bytes, 6);
  const nlohmann::json m = nlohmann::json::parse(bytes.substr(10, mlen));
  CHECK(m.at("filter_count") == 39);
  CHECK(m.at("grid").at("octaves").size() == 13);
  const std::uint32_t plen = read_u32(bytes, 10 + mlen);
  CHECK(bytes.size() == 10 + mlen + 4 + plen + 4);
}

TEST_CASE("bank io: corrupted magic is a format error") {
  std::string bytes = serialize_bank(grid_bank());
  bytes[1] = 'X';
  CHECK(load_error(bytes) == ErrorKind::FormatVersion);
}

TEST_CASE("bank io: unknown version is a format error") {
  std::string bytes = serialize_bank(grid_bank());
  bytes[4] = 9;
  CHECK(load_error(bytes) == ErrorKind::FormatVersion);
}

TEST_CASE("bank io: truncation is detected") {
  const std::string bytes = serialize_bank(grid_bank());
  CHECK(load_error(bytes.substr(0, 3)) == ErrorKind::FormatVersion);
  CHECK(load_error(bytes.substr(0, 8)) == ErrorKind::Truncated);
  CHECK(load_error(bytes.substr(0, bytes.size() / 2)) == ErrorKind::Truncated);
  CHECK(load_error(bytes.substr(0, bytes.size() - 2)) == ErrorKind::Truncated);
}

TEST_CASE("bank io: flipped payload bit fails the checksum") {
  std::string bytes = serialize_bank(grid_bank());
  bytes[bytes.size() - 100] ^= 0x10;
  CHECK(load_error(bytes) == ErrorKind::Checksum);
}

TEST_CASE("bank io: manifest count disagreeing with the payload is an integrity error") {
  const std::string bytes = serialize_bank(grid_bank());
  CHECK(load_error(with_manifest(bytes, [](nlohmann::json& m) {
          m["filter_count"] = 38;
          m["filters"].erase(m["filters"].size() - 1);
        })) == ErrorKind::Integrity);
  CHECK(load_error(with_manifest(bytes, [](nlohmann::json& m) {
          m["filter_count"] = 40;
          m["filters"].push_back(m["filters"][0]);
        })) == ErrorKind::Integrity);
}

TEST_CASE("bank io: missing file") {
  try {
    load_bank("/nonexistent/bank.cfad");
    FAIL("expected file_not_found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FileNotFound);
  }
}
