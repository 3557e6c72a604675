// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "runner.hpp"

namespace mslab::cli {
namespace {

namespace fs = std::filesystem;

const char* kCosine = R"(# whole-domain cosine
[domain]
dim = 1
lower = 0
upper = 1

[input]
preset = cosine_mode
amplitude = 1
mode = 1

[solver]
N = 128

[calibration]
beta = 100
)";

const char* kJump = R"([domain]
dim = 1
lower = -1
upper = 1

[interface]
type = point
x0 = 0

[input]
preset = jump_constant

[solver]
N = 256

[calibration]
beta = 10000   ; trailing comment
policy = compact

[verify]
tube_columns = 61
domain_columns = 21
log_columns_per_side = 8
z_nodes = 65
)";

RunConfig parse(const std::string& text) { return build_config(parse_ini(text, "test.cfg")); }

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mslab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& report) {
  std::istringstream in(report);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("timestamp =", 0) != 0) out += line + "\n";
  }
  return out;
}

TEST(ParseIni, ReadsSectionsKeysAndComments) {
  const auto raw = parse_ini(kJump, "x.cfg");
  EXPECT_EQ(raw.sections.at("calibration").keys.at("beta").text, "10000");
  EXPECT_EQ(raw.sections.at("calibration").keys.at("beta").line, 17);
  const auto cfg = build_config(raw);
  EXPECT_EQ(cfg.beta, 1e4);
  EXPECT_EQ(cfg.overrides.policy, calibration::Policy::compact);
  EXPECT_EQ(cfg.cells, 256);
  ASSERT_TRUE(cfg.iface.has_value());
}

TEST(ParseIni, ErrorsCarryTheOffendingLine) {
  EXPECT_EQ(error_line(std::string(kCosine) + "colour = blue\n"), 17);
  EXPECT_EQ(error_line(std::string(kCosine) + "beta = 5\n"), 17);
  EXPECT_EQ(error_line(std::string(kCosine) + "[solver]\n"), 17);
  EXPECT_EQ(error_line("[domain]\ndim = one\n[input]\npreset = constant\n"), 2);
  EXPECT_EQ(error_line("[domain]\ndim = 1\nnot a key value line\n"), 3);
  EXPECT_EQ(error_line("[mystery]\n"), 1);
}

TEST(BuildConfig, JumpPresetNeedsAnInterface) {
  const std::string text = "[domain]\ndim = 1\n\n[input]\npreset = jump_constant\n";
  EXPECT_EQ(error_line(text), 5);
}

TEST(BuildConfig, InterfaceMustSitOnACellFace) {
  std::string text = kJump;
  text.replace(text.find("x0 = 0"), 6, "x0 = 0.001");
  EXPECT_EQ(error_line(text), 8);
}

TEST(BuildConfig, MissingRequiredSectionHasNoLine) {
  EXPECT_EQ(error_line("[domain]\ndim = 1\n"), 0);
}

TEST(EffectiveConfig, RoundTripsExactly) {
  const auto cfg = parse(kJump);
  const std::string once = effective_config(cfg);
  const std::string twice = effective_config(parse(once));
  EXPECT_EQ(once, twice);
  const auto back = parse(once);
  EXPECT_EQ(back.beta, cfg.beta);
  EXPECT_EQ(back.sampling.tube_columns, 61);
  EXPECT_EQ(back.iface->x0(), 0.0);
}

TEST(Flags, OverrideFileValues) {
  auto cfg = parse(kJump);
  FlagOverrides f;
  f.beta = 250.0;
  f.delta = 0.01;
  f.out = "elsewhere";
  f.workers = 3;
  apply_flags(cfg, f);
  EXPECT_EQ(cfg.beta, 250.0);
  EXPECT_EQ(cfg.delta, 0.01);
  EXPECT_EQ(cfg.out_dir, "elsewhere");
  EXPECT_EQ(cfg.solver.workers, 3);
  EXPECT_EQ(cfg.sampling.workers, 3);
  auto untouched = parse(kJump);
  apply_flags(untouched, {});
  EXPECT_EQ(untouched.beta, 1e4);
}

TEST(Run, ExitCodesFollowTheChecks) {
  auto cfg = parse(kJump);
  cfg.out_dir = scratch("pass").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_config("verify", cfg, out, err), kPass) << err.str();
  EXPECT_EQ(out.str().rfind("PASS", 0), 0u);

  cfg.beta = 0.1;
  cfg.overrides.allow_small_beta = true;
  cfg.out_dir = scratch("fail").string();
  EXPECT_EQ(run_config("verify", cfg, out, err), kChecksFailed);
  const std::string report = slurp(fs::path(cfg.out_dir) / "report.txt");
  EXPECT_NE(report.find("c_inequality"), std::string::npos);
  EXPECT_NE(report.find("exit_code = 1"), std::string::npos);
}

TEST(Run, InfeasibleCalibrationIsAUsageError) {
  auto cfg = parse(kJump);
  cfg.beta = 0.5;  // below 1 without allow_small_beta
  cfg.out_dir = scratch("infeasible").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_config("calibrate", cfg, out, err), kUsageError);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "report.txt"));
}

TEST(Run, UnwritableOutputIsAUsageError) {
  const auto base = scratch("blocked");
  fs::create_directories(base);
  std::ofstream(base / "file") << "x";
  auto cfg = parse(kCosine);
  cfg.out_dir = (base / "file" / "sub").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_config("solve", cfg, out, err), kUsageError);
}

TEST(Run, UnknownSubcommandAndMissingFile) {
  std::ostringstream out, err;
  EXPECT_EQ(run("frobnicate", "nowhere.cfg", {}, out, err), kUsageError);
  EXPECT_EQ(run("solve", "/nonexistent/mslab.cfg", {}, out, err), kUsageError);
}

TEST(Run, ReportsAreDeterministicApartFromTheTimestamp) {
  auto cfg = parse(kJump);
  cfg.solver.workers = 1;
  cfg.sampling.workers = 1;
  std::ostringstream out, err;
  cfg.out_dir = scratch("det_a").string();
  run_config("verify", cfg, out, err);
  const auto a = fs::path(cfg.out_dir);
  cfg.out_dir = scratch("det_b").string();
  run_config("verify", cfg, out, err);
  const auto b = fs::path(cfg.out_dir);
  EXPECT_EQ(slurp(a / "margins.csv"), slurp(b / "margins.csv"));
  // The report names its own directory nowhere, so only the timestamp differs.
  EXPECT_EQ(without_timestamp(slurp(a / "report.txt")), without_timestamp(slurp(b / "report.txt")));
  EXPECT_TRUE(fs::exists(a / "config_effective.cfg"));
  EXPECT_TRUE(fs::exists(a / "timings.txt"));
}

TEST(Run, SolveWritesFieldDumpWhenAsked) {
  auto cfg = parse(kCosine);
  cfg.emit_fields = true;
  cfg.out_dir = scratch("fields").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_config("solve", cfg, out, err), kPass) << err.str();
  const std::string csv = slurp(fs::path(cfg.out_dir) / "u.csv");
  EXPECT_EQ(csv.rfind("x,value\n", 0), 0u);
}

}  // namespace
}  // namespace mslab::cli
