// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mslab/functional.hpp"
#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/solver.hpp"

namespace mslab::minmov {

using State = functional::Candidate;

struct EvolutionConfig {
  fields::GridSpec grid;
  /// Frozen crack. Without one the chain runs on the whole domain and F0 has
  /// no jump term.
  std::optional<geometry::Interface> iface;
  fields::InputDatum u0;
  double delta = 1e-3;
  double horizon = 0.1;
  /// Tighter than the solver default: the jump amplitude must survive a
  /// hundred steps to 1e-10.
  fields::SolverOptions solver{1e-13, 0, false, 1};
  /// Keep every k-th field (and always the first and last); 0 keeps only those two.
  int snapshot_every = 1;
  /// Run step_equivalence_probe every k-th step; 0 disables it.
  int probe_every = 0;
  std::vector<double> probe_ts{0.25, 0.5, 0.75};
};

/// Initial field: u0 sampled at cell centers, per side when a crack is given.
State initial_state(const EvolutionConfig& cfg);

/// One implicit Euler step: per piece, (1/delta - Lap_h) v = v_prev / delta.
State mm_step(const State& v_prev, double delta, const fields::SolverOptions& solver = {});

struct StepMonitor {
  int i = 0;
  double t = 0.0;
  double F0 = 0.0;         // Dirichlet + jump measure
  double dirichlet = 0.0;
  double sup_norm = 0.0;
  double lap_sup = 0.0;    // ||Lap_h v||_inf
  double jump_min = std::numeric_limits<double>::quiet_NaN();  // min over Gamma of |v+ - v-|
  double increment = 0.0;  // ||v_i - v_{i-1}||_inf
};

struct StepProbe {
  int i = 0;
  functional::EnergyBreakdown reference;  // incremental energy of the fixed-crack step
  std::vector<functional::ProbeEntry> entries;
  bool equivalent = false;  // fixed-crack step strictly minimal (ties only for identical fields)
};

struct EvolutionTrace {
  std::vector<StepMonitor> monitors;  // i = 0 .. n
  std::vector<int> snapshot_steps;
  std::vector<State> snapshots;
  std::vector<StepProbe> probes;
  double jump_floor = 0.0;  // S of u0 (0 without a jump preset)
  /// First time the jump amplitude drops below S/2; +inf if it never does.
  double T_c = std::numeric_limits<double>::infinity();
  bool max_principle_ok = true;
  bool laplacian_ok = true;
  bool dirichlet_ok = true;
  bool lipschitz_ok = true;
  bool probes_ok = true;
  std::vector<std::string> violations;

  bool flagged() const { return !violations.empty(); }
  const State& final_state() const { return snapshots.back(); }
};

EvolutionTrace mm_evolve(const EvolutionConfig& cfg);

/// Minimum over Gamma of the one-sided trace gap |v_side1 - v_side2|.
double jump_amplitude(const fields::PiecewiseField& v, int gamma_points = 64);

struct HeatReference {
  State field;
  bool exact = false;
  double dt_ref = 0.0;  // Crank-Nicolson step when not exact
  std::string label;
};

/// Heat flow from u0 with Neumann conditions on the boundary and on both
/// sides of the crack, at time t, sampled at cell centers. Exact per-side
/// cosine / Bessel series when available; otherwise Crank-Nicolson at dt_ref.
HeatReference heat_reference(const EvolutionConfig& cfg, double t, double dt_ref = 0.0);

/// Crank-Nicolson reference regardless of closed-form availability.
State crank_nicolson(const EvolutionConfig& cfg, double t, double dt_ref);

/// Compares the fixed-crack step from v_prev with the crack-free step,
/// v_prev itself, and jump-scaled blends in the incremental energy.
StepProbe step_equivalence_probe(const fields::PiecewiseField& v_prev, double delta,
                                 const fields::SolverOptions& solver = {},
                                 const std::vector<double>& ts = {0.25, 0.5, 0.75});

/// sup over cells of |a - b| (both on the same grid).
double sup_distance(const State& a, const State& b);

/// i,t,F0,sup_norm,lap_sup,jump_min
void write_trace_csv(std::ostream& os, const EvolutionTrace& tr);

}  // namespace mslab::minmov
