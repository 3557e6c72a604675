// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

// Reference problems shared by the unit tests, the acceptance suite and the
// benchmarks.

#pragma once

#include <cmath>

#include "mslab/calibration.hpp"
#include "mslab/geometry.hpp"
#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/solver.hpp"
#include "mslab/verifier.hpp"

namespace mslab::testing {

inline geometry::Domain interval(double a, double b) {
  geometry::Domain d;
  d.dim = 1;
  d.lower = {a, 0.0};
  d.upper = {b, 0.0};
  return d;
}

inline geometry::Domain square(double a, double b) {
  geometry::Domain d;
  d.dim = 2;
  d.lower = {a, a};
  d.upper = {b, b};
  return d;
}

/// (-1, 1), crack at x0, g = +a on the left and -a on the right (plus an
/// optional c cos(k pi x) ripple).
struct JumpProblem1D {
  geometry::Domain domain = interval(-1.0, 1.0);
  geometry::Interface iface;
  fields::InputDatum g;
  fields::GridSpec grid;

  explicit JumpProblem1D(int cells = 512, double x0 = 0.0, double a = 1.0, double c = 0.0,
                         int k = 1)
      : iface(geometry::Interface::point(domain, x0)),
        g(c == 0.0 ? fields::Preset::jump_constant : fields::Preset::jump_plus_smooth, a, k, c,
          domain, iface),
        grid(fields::GridSpec::make(domain, cells)) {}

  fields::PiecewiseField solve(double beta, const fields::SolverOptions& opts = {}) const {
    return fields::solve_piecewise(grid, iface, g, beta, opts);
  }
};

/// (-1, 1)^2 with a circle of radius r at the origin and a radial datum
/// a + c J0(j11 rho / r) inside, -a outside.
struct RadialProblem2D {
  geometry::Domain domain = square(-1.0, 1.0);
  geometry::Interface iface;
  fields::InputDatum g;
  fields::GridSpec grid;

  explicit RadialProblem2D(int cells = 128, double r = 0.5, double a = 1.0, double c = 0.3)
      : iface(geometry::Interface::circle(domain, Vec2{0.0, 0.0}, r)),
        g(fields::Preset::radial_jump, a, 1, c, domain, iface),
        grid(fields::GridSpec::make(domain, cells)) {}

  fields::PiecewiseField solve(double beta, const fields::SolverOptions& opts = {}) const {
    return fields::solve_piecewise(grid, iface, g, beta, opts);
  }
};

/// g sampled per cell with the side of the piece (whole-domain value for an
/// unrestricted field).
inline std::vector<double> cell_data(const fields::ScalarField& piece, const fields::InputDatum& g) {
  std::vector<double> out(piece.grid.size(), std::nan(""));
  for (int k = 0; k < piece.grid.size(); ++k) {
    if (!piece.mask[k]) continue;
    const Vec2 x = piece.grid.center(k);
    out[k] = piece.side == geometry::Side::on_interface ? g.value(x) : g.value(x, piece.side);
  }
  return out;
}

}  // namespace mslab::testing
