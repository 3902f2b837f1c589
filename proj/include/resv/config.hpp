#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "resv/harness.hpp"

namespace resv {

inline constexpr int kSchemaVersion = 1;

/// Invalid experiment configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Instance instance;
  std::vector<PolicySpec> policies;
  Scenario scenario;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "runs";
};

/// Validates and resolves a config document. A run manifest is accepted too;
/// its embedded "config" object is used.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, every default spelled out. parse_config accepts
/// the result and yields an equivalent config.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace resv
