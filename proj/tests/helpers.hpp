#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "rdmc/config.hpp"

namespace rdmc::test {

inline std::string fixture(const std::string& name) { return std::string(RDMC_FIXTURES_DIR) + "/" + name + ".json"; }

inline nlohmann::json fixture_json(const std::string& name) {
  std::ifstream in(fixture(name));
  return nlohmann::json::parse(in);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rdmc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream(path) << doc.dump(2);
  return path;
}

}  // namespace rdmc::test
