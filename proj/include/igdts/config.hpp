#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "igdts/tracker.hpp"

namespace igdts {

// Environment variable naming a config file used when --config is absent.
inline constexpr const char* kConfigEnvVar = "IGDTS_CONFIG";

struct ConfigKey {
  std::string name;
  std::string description;
  std::string default_value;
  bool heuristic;  // no published value; chosen for this implementation
};

// Every key accepted in a config file, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Sets one key; throws DomainError naming the key when it is unknown or the
// value does not parse.
void set_config_value(TrackerConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const TrackerConfig& config, std::string_view key);

// Flat "key = value" lines, '#' starts a comment. Values are applied on top
// of `base`. Errors carry the file name and line.
TrackerConfig load_config(const std::filesystem::path& path, TrackerConfig base = {});

// --config if given, else $IGDTS_CONFIG if set and non-empty.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& flag);

}  // namespace igdts
