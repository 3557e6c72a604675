// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/solver.hpp"

namespace mslab::functional {

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double jump = 0.0;
  double fidelity = 0.0;
  double total = 0.0;
};

/// A piecewise field pays for its jump set Gamma; a single whole-domain field
/// pays nothing for jumps.
using Candidate = std::variant<fields::PiecewiseField, fields::ScalarField>;

/// Discrete energy: squared differences across faces joining two cells of the
/// same piece (so Gamma-adjacent cells use one-sided gradients), midpoint
/// fidelity, and the interface measure for piecewise candidates. This is the
/// energy whose Euler equation is exactly the solver's discrete equation.
EnergyBreakdown ms_energy(const Candidate& u, const fields::InputDatum& g, double beta);

/// Energy with g given cell by cell (index into the grid).
EnergyBreakdown ms_energy(const Candidate& u, const std::function<double(int)>& g_at_cell,
                          double beta);

/// Dirichlet + jump + (1/delta) * squared distance to v_prev.
EnergyBreakdown incremental_energy(const Candidate& z, const fields::PiecewiseField& v_prev,
                                   double delta);

enum class CompetitorKind { crack_free, input_datum, jump_scaled, shifted_interface };

struct CompetitorContext {
  fields::GridSpec grid;
  fields::InputDatum g;
  double beta = 1.0;
  fields::SolverOptions solver;
  fields::PiecewiseField u_beta;  // the fixed-crack minimizer
};

/// crack_free: solve on the whole grid ignoring Gamma. input_datum: g itself.
/// jump_scaled(t): t u_beta + (1 - t) crack_free (t = 0 gives the crack-free
/// field). shifted_interface(delta): re-solve with the crack moved by delta.
Candidate make_competitor(CompetitorKind kind, double param, const CompetitorContext& ctx);

/// Same-grid blend t a + (1 - t) b restricted to the pieces of a.
fields::PiecewiseField blend(const fields::PiecewiseField& a, const fields::ScalarField& b,
                             double t);

/// True when two candidates hold the same values on the same cells (to tol).
bool coincident(const Candidate& a, const Candidate& b, double tol = 1e-12);

struct ProbeEntry {
  std::string name;
  EnergyBreakdown energy;
  double margin = 0.0;     // energy(candidate) - energy(reference)
  bool identical = false;  // candidate coincides with the reference field
};

struct MinimalityProbe {
  EnergyBreakdown reference;
  std::vector<ProbeEntry> entries;
  /// Every non-identical competitor has strictly larger energy and every
  /// identical one has equal energy to rounding.
  bool strict_minimizer = false;
};

/// Compares u_beta against crack_free, input_datum and jump_scaled(t) for the
/// given t values.
MinimalityProbe minimality_probe(const CompetitorContext& ctx, const std::vector<double>& ts);

void write_energy_csv(std::ostream& os, double beta, const MinimalityProbe& probe);

}  // namespace mslab::functional
