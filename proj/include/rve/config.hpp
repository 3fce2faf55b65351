#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rve/macsim.hpp"

/// Flat KEY=VALUE simulation config files.
namespace rve::config {

struct SimConfig {
  mac::EngineConfig engine;
  /// Directory of per-node trace CSVs.
  std::filesystem::path scenario;
};

/// Applies one KEY=VALUE setting. Throws mac::ConfigError for unknown keys
/// and malformed values.
void apply(SimConfig& cfg, std::string_view key, std::string_view value);

/// Parses config text. Blank lines and `#` comments are ignored. A relative
/// SCENARIO is resolved against `base_dir`. The engine invariants are not
/// checked here so overrides can still be applied; call validate().
SimConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
SimConfig load(const std::filesystem::path& path);

/// Splits `KEY=VALUE` as given on the command line.
std::pair<std::string, std::string> split_assignment(std::string_view text);

void validate(const SimConfig& cfg);

/// Renders every key with its effective value; parse() of the output yields
/// the same config.
std::string to_text(const SimConfig& cfg);

}  // namespace rve::config
