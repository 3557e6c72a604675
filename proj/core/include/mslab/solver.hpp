// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"

namespace mslab::fields {

struct SolverOptions {
  double tol = 1e-10;
  /// 0 selects the default cap of 50 iterations per cell along the longest axis.
  int max_iter = 0;
  bool jacobi = false;
  int workers = 1;
};

struct SolveStats {
  int iterations = 0;
  /// Final true residual ||(beta - Lap_h) u - beta g||_inf.
  double residual = 0.0;
  /// The requested tolerance was below the rounding floor
  /// 2 eps (beta + 4 dim / h^2) ||g||_inf, which was used instead.
  bool floor_limited = false;
};

/// Solves (beta I - Lap_h) u = beta g on the masked cells with homogeneous
/// Neumann reflection on every mask boundary. `rhs_g` holds g on all cells of
/// the grid; only masked entries are read. Throws NonConvergenceError when the
/// iteration cap is reached.
ScalarField solve_screened_poisson(const GridSpec& grid, const Mask& mask,
                                   const std::vector<double>& rhs_g, double beta,
                                   const SolverOptions& opts = {}, SolveStats* stats = nullptr);

/// Solve with g sampled from an analytic datum at cell centers (side taken
/// from the mask's interface when given).
ScalarField solve_screened_poisson(const GridSpec& grid, const Mask& mask, const InputDatum& g,
                                   double beta, const SolverOptions& opts = {},
                                   SolveStats* stats = nullptr);

/// Solve with g given by a field on (at least) the same mask.
ScalarField solve_screened_poisson(const ScalarField& g, double beta,
                                   const SolverOptions& opts = {}, SolveStats* stats = nullptr);

/// Per-side solve for a jump datum: two independent Neumann problems.
PiecewiseField solve_piecewise(const GridSpec& grid, const geometry::Interface& iface,
                               const InputDatum& g, double beta, const SolverOptions& opts = {},
                               SolveStats* stats = nullptr);

/// Samples an analytic datum into a piecewise field (one piece per side).
PiecewiseField sample_piecewise(const GridSpec& grid, const geometry::Interface& iface,
                                const InputDatum& g);

/// Post-solve invariants of one piece.
struct SolveCheck {
  double compat = 0.0;      // |sum over the mask of (u - g) h^dim|
  double compat_tol = 0.0;  // 1e-10 ||g||_inf |mask volume|
  double overshoot = 0.0;   // max(u - max g, min g - u, 0) over the mask
  bool compat_ok = false;
  bool max_principle_ok = false;  // overshoot <= 1e-12 max(1, ||g||_inf)
  bool pass() const { return compat_ok && max_principle_ok; }
};
/// Checks discrete compatibility and the maximum principle for a solution u
/// against the cell data g it was solved with (g indexed like the grid).
SolveCheck check_solve(const ScalarField& u, const std::vector<double>& g);

/// Masked Neumann Laplacian Lap_h u (3-point in 1D, 5-point in 2D).
std::vector<double> discrete_laplacian(const ScalarField& u);

/// Residual (beta I - Lap_h) u - beta g on masked cells (NaN elsewhere).
std::vector<double> screened_residual(const ScalarField& u, const std::vector<double>& g,
                                      double beta);

struct Derivatives {
  std::vector<Vec2> grad;  // indexed like the grid; meaningful on masked cells
  std::vector<Sym2> hess;
};

/// Second-order finite differences: centered inside the mask, one-sided at
/// its edges. Throws PreconditionError when some masked cell has fewer than
/// three cells of the mask along an axis.
Derivatives differentiate(const ScalarField& u);

/// Interpolates the field at x using only cells of its own mask: multilinear
/// where the enclosing stencil is fully masked, else a local second-order
/// one-sided fit. Throws SideMismatchError when x lies on the other side.
double sample(const ScalarField& u, const Vec2& x);

/// One-sided trace of a piece at a point p of Gamma.
double trace(const ScalarField& piece, const Vec2& p);

/// Writes `x[,y],value` rows over masked cells in index order.
void write_field_csv(std::ostream& os, const ScalarField& u);

/// Radial reduction: solves U'' + U'/rho = beta (U - G) on (0, r) with
/// regularity at 0 and U'(r) = 0, finite volumes on m cells. Returns the
/// cell values at rho_j = (j + 1/2) r / m.
std::vector<double> solve_radial(const std::function<double(double)>& g_of_rho, double beta,
                                 double r, int m);

}  // namespace mslab::fields
