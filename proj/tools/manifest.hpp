#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace supermarket::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> argv;
  std::string seed;  // empty when the command uses no randomness
  std::string artifact_version;
  std::map<std::string, std::string> checksums;  // file name -> sha256

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace supermarket::cli
