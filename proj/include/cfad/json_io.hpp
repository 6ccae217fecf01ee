#pragma once

#include <string>

#include <json.hpp>

#include "cfad/mosse.hpp"

namespace cfad {

nlohmann::json to_json(const BankManifest& manifest);
BankManifest manifest_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FilterId& id);
nlohmann::json to_json(const FaceRect& rect);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace cfad
