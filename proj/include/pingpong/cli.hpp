#pragma once

// Experiment orchestration behind the `pingpong` tool.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pingpong/config.hpp"

namespace pingpong {

enum class Pipeline { verify_model, approximant, pseudo, shadow, realize, semiconj };

std::string pipeline_name(Pipeline p);

inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
    Pipeline pipeline = Pipeline::verify_model;
    std::string config_path;  // empty: built-in defaults
    ActionConfig action;
    // Unset values take per-pipeline defaults.
    std::size_t n = 3;
    std::optional<double> delta;    // 1e-4; semiconj: epsilon / 2
    std::optional<double> epsilon;  // 1e-2; semiconj: alpha / 10
    std::optional<double> eta;      // realize: 1e-3; shadow: min(1e-3, epsilon / 10)
    std::size_t depth = 6;
    std::optional<std::size_t> samples;  // verify-model: action samples; else 10000
    std::optional<std::uint64_t> seed;
    std::string out = "run";
    std::string mode = "direct";  // shadow: direct | realize

    /// Throws UsageError.
    void validate() const;
};

struct RunResult {
    int exit_code = kExitOk;
    nlohmann::ordered_json report;
    std::vector<std::string> artifacts;  // file names inside spec.out
};

/// Runs one pipeline and writes its report, tables, figures and the
/// manifest under spec.out.  Invalid specs raise UsageError before any
/// file is written.
RunResult run(const ExperimentSpec& spec);

/// Command-line entry point; returns the process exit status.
int cli_main(int argc, char** argv);

}  // namespace pingpong
