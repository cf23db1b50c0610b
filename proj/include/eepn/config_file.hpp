// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/experiment.hpp"

#include <filesystem>
#include <string_view>

namespace eepn {

/// Flat `key = value` text; `#` starts a comment, keys use dotted sections (fiber.length_km).
/// Keys not present keep their value from `base`. Unknown or repeated keys and malformed values
/// throw ConfigurationError naming the line.
[[nodiscard]] RunConfig parse_config(std::string_view text, const RunConfig& base = RunConfig::paper());

[[nodiscard]] RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = RunConfig::paper());

} // namespace eepn
