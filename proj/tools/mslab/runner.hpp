// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace mslab::cli {

enum ExitCode : int { kPass = 0, kChecksFailed = 1, kUsageError = 2 };

const std::vector<std::string>& subcommands();

/// Command-line values that take precedence over the config file.
struct FlagOverrides {
  std::optional<double> beta;      // [calibration] beta
  std::optional<double> delta;     // [evolution] delta
  std::optional<std::string> out;  // [output] directory
  std::optional<int> workers;      // [solver] workers (and verifier sampling)
};

void apply_flags(RunConfig& cfg, const FlagOverrides& flags);

/// Reads the config, applies the flags and runs one pipeline. Diagnostics go
/// to `err`, a one-line summary to `out`. Never throws.
int run(const std::string& subcommand, const std::string& config_path, const FlagOverrides& flags,
        std::ostream& out, std::ostream& err);

/// Runs a pipeline on an already validated configuration.
int run_config(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
               std::ostream& err);

}  // namespace mslab::cli
