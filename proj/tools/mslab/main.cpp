// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "runner.hpp"

namespace {

const std::map<std::string, std::string> kDescriptions = {
    {"solve", "Solve the screened Poisson problem (per side when an interface is given)"},
    {"energy", "Energy of u_beta and of its competitors"},
    {"calibrate", "Choose calibration parameters and dump the structure fields"},
    {"verify", "Check every calibration condition on sampled columns"},
    {"scan", "Bisect for the smallest verified beta and the energy crossover"},
    {"scaling", "Fit the beta-exponents of the solution error and derivative norms"},
    {"evolve", "Minimizing-movement chain with the crack frozen"},
    {"probe", "Compare one fixed-crack step against its competitors"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mslab: calibration and minimizing-movement laboratory"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", MSLAB_VERSION);

  std::string config;
  double beta = 0.0, delta = 0.0;
  std::string out;
  int workers = 1;

  for (const auto& name : mslab::cli::subcommands()) {
    auto* sc = app.add_subcommand(name, kDescriptions.at(name));
    sc->add_option("--config", config, "Config file (sections documented in README)")->required();
    sc->add_option("--beta", beta, "Override [calibration] beta");
    sc->add_option("--delta", delta, "Override [evolution] delta");
    sc->add_option("--out", out, "Override [output] directory");
    sc->add_option("--workers", workers, "Override [solver] workers (default 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mslab::cli::kUsageError;
  }

  const CLI::App* sc = app.get_subcommands().front();
  mslab::cli::FlagOverrides flags;
  if (sc->count("--beta")) flags.beta = beta;
  if (sc->count("--delta")) flags.delta = delta;
  if (sc->count("--out")) flags.out = out;
  if (sc->count("--workers")) flags.workers = workers;
  return mslab::cli::run(sc->get_name(), config, flags, std::cout, std::cerr);
}
