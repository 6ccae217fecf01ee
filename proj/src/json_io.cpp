#include "cfad/json_io.hpp"

#include <cstdio>

namespace cfad {

nlohmann::json to_json(const BankManifest& m) {
  nlohmann::json poses = nlohmann::json::array();
  for (PoseBin p : m.grid.poses) poses.push_back(pose_name(p));
  nlohmann::json eps = {{"relative", m.epsilon.relative}};
  eps["absolute"] = m.epsilon.absolute ? nlohmann::json(*m.epsilon.absolute) : nlohmann::json(nullptr);
  return {
      {"grid", {{"octaves", m.grid.octaves}, {"poses", poses}}},
      {"sigma", m.sigma},
      {"epsilon", eps},
      {"crop", {{"half_width_iod", m.crop.half_width_iod}, {"half_height_iod", m.crop.half_height_iod}}},
      {"corpus_hash", m.corpus_hash},
  };
}

BankManifest manifest_from_json(const nlohmann::json& j) {
  BankManifest m;
  m.grid.octaves = j.at("grid").at("octaves").get<std::vector<double>>();
  m.grid.poses.clear();
  for (const auto& p : j.at("grid").at("poses")) m.grid.poses.push_back(parse_pose(p.get<std::string>()));
  m.sigma = j.at("sigma").get<double>();
  m.epsilon.relative = j.at("epsilon").at("relative").get<double>();
  if (!j.at("epsilon").at("absolute").is_null()) m.epsilon.absolute = j["epsilon"]["absolute"].get<double>();
  m.crop.half_width_iod = j.at("crop").at("half_width_iod").get<double>();
  m.crop.half_height_iod = j.at("crop").at("half_height_iod").get<double>();
  m.corpus_hash = j.value("corpus_hash", "");
  return m;
}

nlohmann::json to_json(const FilterId& id) { return {{"octave", id.octave}, {"pose", pose_name(id.pose)}}; }

nlohmann::json to_json(const FaceRect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cfad
