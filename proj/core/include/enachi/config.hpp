#pragma once

#include <filesystem>
#include <string>

#include "enachi/model_profile.hpp"
#include "enachi/sim_engine.hpp"

namespace enachi {

/// Parses a JSON configuration tree. Missing keys keep the SimConfig defaults;
/// unknown keys are rejected so typos do not pass silently.
/// Throws std::invalid_argument with the offending key on errors.
[[nodiscard]] SimConfig parse_config(const std::string& json_text);

/// Reads and parses a file. Throws std::runtime_error if it cannot be opened.
[[nodiscard]] SimConfig load_config(const std::filesystem::path& path);

/// Profile section on its own (the value of the "profile" key).
[[nodiscard]] DnnProfile parse_profile(const std::string& json_text);

/// Canonical JSON dump of the scalar fields, with sorted keys.
[[nodiscard]] std::string dump_config(const SimConfig& config);

}  // namespace enachi
