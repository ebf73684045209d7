#pragma once

#include "eegcap/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace eegcap::config {

/// Fully resolved config as JSON, every key present.
nlohmann::ordered_json to_json(const experiments::ExperimentConfig& cfg);

/// Builds a config from a (possibly partial) JSON object. Keys absent from
/// the object keep their defaults; unknown keys and type mismatches throw
/// ConfigError naming the dotted key. The result is validated.
experiments::ExperimentConfig from_json(const nlohmann::json& j);

/// Parses text as a JSON object; malformed input throws ConfigError with
/// the line and column of the problem.
nlohmann::json parse_object(const std::string& text, const std::string& origin);

/// Sets `key.path=value` inside `j`. The value is read as JSON when it
/// parses as JSON, otherwise as a plain string.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads and parses a config file (FileError when unreadable).
experiments::ExperimentConfig load_config(const std::filesystem::path& path);

/// defaults ← file (when given) ← overrides.
experiments::ExperimentConfig resolve(const std::filesystem::path* path,
                                      const std::vector<std::string>& overrides);

}  // namespace eegcap::config
