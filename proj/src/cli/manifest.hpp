#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace isgns::cli {

/// Hex SHA-256 of a file. Throws std::runtime_error when it cannot be read.
std::string file_sha256(const std::string& path);

/// Record of one command invocation, written next to its outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::string> inputs;

  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace isgns::cli
