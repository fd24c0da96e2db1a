#include <json.hpp>

#include <cstdio>
#include <ostream>

#include "recoil/cli.hpp"

namespace recoil {

std::string params_digest(const SystemParams& params) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_config_string(params)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_manifest(std::ostream& os, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["params_digest"] = manifest.params_digest;
  j["seed"] = manifest.seed;
  auto& paths = j["output_paths"] = nlohmann::ordered_json::array();
  for (const auto& p : manifest.output_paths) paths.push_back(p.generic_string());
  j["wall_time_s"] = manifest.wall_time;
  os << j.dump(2) << '\n';
}

}  // namespace recoil
