// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mslab/calibration.hpp"
#include "mslab/geometry.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/solver.hpp"
#include "mslab/verifier.hpp"

namespace mslab::cli {

/// Schema or syntax problem in a config file. `line` is 1-based, 0 when the
/// problem is not tied to a line (a missing section, say).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct RawValue {
  std::string text;
  int line = 0;
};

struct RawSection {
  int line = 0;
  std::map<std::string, RawValue> keys;
};

/// Sections in file order are not needed; lookups go by name.
struct RawConfig {
  std::string source;
  std::map<std::string, RawSection> sections;
};

/// Grammar: `[section]` headers, `key = value` lines, `#` or `;` comments
/// (whole line or trailing after whitespace), blank lines ignored. Keys and
/// section names are [A-Za-z0-9_]+. Duplicate sections or keys are errors.
RawConfig parse_ini(const std::string& text, const std::string& source);
RawConfig read_ini(const std::string& path);

struct RunConfig {
  geometry::Domain domain;
  std::optional<geometry::Interface> iface;
  fields::Preset preset = fields::Preset::constant;
  double amplitude = 1.0;
  int mode = 1;
  double smooth = 0.0;
  int cells = 256;
  fields::SolverOptions solver;
  // [calibration]
  double beta = 100.0;
  calibration::Overrides overrides;
  calibration::Options cal_options;
  // [verify]; sampling.workers follows solver.workers
  verifier::Sampling sampling;
  // [scan]
  double scan_lo = 0.01;
  double scan_hi = 1e4;
  int scan_bisections = 10;
  // [scaling]
  std::vector<double> scaling_betas{1e2, 1e3, 1e4, 1e5};
  double scaling_sup_slope_max = -0.4;
  double scaling_grad_ratio_max = 2.0;
  double scaling_hess_slope_max = 0.6;
  // [evolution]
  double delta = 1e-3;
  double horizon = 0.1;
  int snapshot_every = 0;
  int probe_every = 1;
  double evolution_tol = 1e-13;
  // [probe]
  std::vector<double> probe_ts{0.25, 0.5, 0.75};
  // [output]
  std::string out_dir = "out";
  bool emit_fields = false;

  fields::InputDatum datum() const;
  fields::GridSpec grid() const;
};

/// Validates the schema and builds the typed configuration. Every error
/// names the line of the offending key.
RunConfig build_config(const RawConfig& raw);

/// Re-emits a configuration that parses back to the same RunConfig.
std::string effective_config(const RunConfig& cfg);

}  // namespace mslab::cli
