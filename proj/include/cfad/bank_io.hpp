#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cfad/mosse.hpp"

namespace cfad {

// CFAD bank file, all integers little-endian:
//   "CFAD" | u16 version | u32 manifest_len | manifest JSON
//   | u32 payload_len | payload | u32 CRC32(payload)
// payload = per filter: u32 w, u32 h, w*h interleaved (re, im) f32 of H*,
//           w*h f32 spatial kernel, u32 tw, u32 th, tw*th f32 template.
inline constexpr std::uint16_t kBankFormatVersion = 1;

std::string serialize_bank(const FilterBank& bank);
FilterBank deserialize_bank(const std::string& bytes);

void save_bank(const FilterBank& bank, const std::filesystem::path& path);
FilterBank load_bank(const std::filesystem::path& path);

/// Bit-level equality of two banks (grids, metadata, manifest).
bool banks_identical(const FilterBank& a, const FilterBank& b);

}  // namespace cfad
