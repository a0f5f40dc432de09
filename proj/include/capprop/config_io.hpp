#ifndef CAPPROP_CONFIG_IO_HPP
#define CAPPROP_CONFIG_IO_HPP

#include <filesystem>
#include <string>

#include "capprop/experiments.hpp"

namespace capprop {

/// Parses and validates a JSON experiment config (schema documented in the
/// README). Throws std::invalid_argument naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON echo of a resolved config; embedded in reports.
std::string config_to_json(const ExperimentConfig& config);

} // namespace capprop

#endif
