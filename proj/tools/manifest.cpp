#include "manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "supermarket/error.hpp"

namespace supermarket::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["argv"] = argv;
  j["seed"] = seed.empty() ? nlohmann::json() : nlohmann::json(seed);
  j["artifact_version"] = artifact_version;
  j["checksums"] = checksums;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::string>();
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace supermarket::cli
