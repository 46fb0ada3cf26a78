#pragma once

// TOML configuration: the model action and experiment defaults.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "pingpong/action.hpp"

namespace pingpong {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Values of the [experiment] table; unset keys stay empty.
struct ExperimentDefaults {
    std::optional<std::size_t> n;
    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<double> eta;
    std::optional<std::size_t> depth;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
};

struct Config {
    int version = kConfigVersion;
    ActionConfig action;
    ExperimentDefaults experiment;
};

/// Throws ConfigError on unreadable files, unknown keys or bad types.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& source = "<string>");

std::string toml_library_version();

}  // namespace pingpong
