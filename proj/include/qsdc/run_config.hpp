#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsdc/protocol_engine.hpp"
#include "qsdc/security_analysis.hpp"

namespace qsdc {

inline constexpr int kConfigSchemaVersion = 1;

/// Bad or unknown config key. key() is the dotted path, e.g. "channel.check_fraction".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  BlockConfig block;
  std::string message = "QSDC";
  std::size_t max_retries = 8;
  std::vector<double> mu_list = default_mu_list();
  double l1_start_km = 0.0;
  double l1_stop_km = 50.0;
  double l1_step_km = 0.5;
  double photons_per_block = 80.0;  // N in the security condition
  std::string out_dir = "out";

  LinkBudget link_budget() const;
};

/// Parses and validates. Every key is optional except schema_version; unknown keys throw.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// The config document equivalent to a default RunConfig (the reference operating point).
nlohmann::json default_config_json();

}  // namespace qsdc
