#pragma once

#include <optional>
#include <string>

#include "xva/config.hpp"

namespace xva {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitParse = 2, kExitValidation = 3, kExitConvergence = 4 };

struct RunOptions {
    unsigned workers = 1;
    bool wall_clock = true;
};

/// Command-line values that take precedence over the document.
struct Overrides {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<std::string> output;
    std::optional<Format> format;
};

struct RunOutcome {
    int exit_code = kExitOk;
    /// Report, or a structured error record when exit_code != 0.
    std::string body;
    Format format = Format::Json;
    std::string output_path;
};

void apply(const Overrides& overrides, RunConfig& config);

/// Validates and runs a parsed configuration.
RunOutcome run(const RunConfig& config, const RunOptions& options = {});

/// Parses, applies overrides, validates and runs.
RunOutcome run_document(const std::string& text, const Overrides& overrides = {},
                        const RunOptions& options = {});

}  // namespace xva
