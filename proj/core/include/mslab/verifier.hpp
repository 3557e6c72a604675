// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mslab/calibration.hpp"
#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/solver.hpp"

namespace mslab::verifier {

enum class ConditionId { a_b_divergence, c_inequality, d_graph, e_jump, f_pair_sup, g_boundary };
inline constexpr std::array<ConditionId, 6> kAllConditions = {
    ConditionId::a_b_divergence, ConditionId::c_inequality, ConditionId::d_graph,
    ConditionId::e_jump,         ConditionId::f_pair_sup,   ConditionId::g_boundary};

std::string condition_name(ConditionId id);

struct Location {
  Vec2 x;
  double z = 0.0;
};

struct ConditionReport {
  ConditionId id = ConditionId::a_b_divergence;
  double tolerance = 0.0;
  /// Worst value of the checked quantity. For c_inequality this is the
  /// smallest margin (pass needs it non-negative, and positive off the band);
  /// for the others it is the largest residual.
  double worst_residual = 0.0;
  Location worst_location;
  bool pass = false;
  double margin_min = 0.0;
  double margin_mean = 0.0;
  std::size_t samples = 0;
  std::string detail;
};

/// Tolerances and lattice sizes. Defaults reproduce the 1D reference run;
/// 2D runs relax the e/f tolerances.
struct Sampling {
  int tube_columns = 401;        // uniform in d over (-R, R)
  int log_columns_per_side = 64; // log-spaced |d| in [1e-6 R, R/2]
  int domain_columns = 101;      // uniform over the whole domain
  int rays = 4;                  // 2D: angles of the sampling rays through the center
  int z_nodes = 257;             // uniform over the column window
  int slab_nodes = 33;           // extra interior nodes per slab
  int gamma_points = 16;         // 2D: points of Gamma for e_jump / f_pair_sup
  int boundary_points = 64;      // 2D: points per side of the box boundary
  int e_quad = 1025;             // Simpson nodes for e_jump (per slab piece: e_quad / 4)
  int f_nodes = 2049;            // nodes of the cumulative integral in f_pair_sup
  int f_columns = 41;            // columns for f_pair_sup besides Gamma
  int box_columns = 6;           // column positions per side for the flux boxes
  int midpoint_nodes = 8;        // midpoint nodes per smooth face piece
  int workers = 1;
  // Tolerances.
  double d_tol = 1e-12;
  double e_tol = 1e-8;
  double f_tol = 1e-9;
  double g_tol = 1e-10;
  double smooth_order = 1.8;
  double straddle_order = 1.0;
  double flux_floor = 1e-9;  // relative to the face-integral scale
};

/// Sampling defaults for 2D runs (relaxed e/f tolerances, fewer columns).
Sampling sampling_2d();

/// A margin sample of condition (c).
struct MarginSample {
  Vec2 x;
  double z = 0.0;
  int side = 0;
  calibration::Region region = calibration::Region::own_slab;
  bool in_band = false;  // |z - u_own| < h_beta / 2
  double margin = 0.0;
};

struct BoxResult {
  Vec2 x;                // column position of the box center
  double z = 0.0;
  bool straddling = false;
  std::array<double, 3> half{};  // b0, b0/2, b0/4
  std::array<double, 3> flux{};  // normalized net outward flux
  double scale = 0.0;            // face-integral scale at the finest size
  double order = 0.0;            // log2(flux(b0/2) / flux(b0/4))
  bool pass = false;
};

struct CalibrationReport {
  calibration::CalibrationParams params;
  std::vector<ConditionReport> conditions;
  std::vector<MarginSample> margins;
  std::vector<BoxResult> boxes;
  std::size_t columns = 0;
  std::size_t samples = 0;
  double c_min_off_band = std::numeric_limits<double>::infinity();
  bool pass = false;

  const ConditionReport& condition(ConditionId id) const;
  /// Names of the failed conditions, comma separated.
  std::string failed() const;
};

/// Net outward flux of (phi^x, phi^z) through the box [s - b, s + b] x
/// [z - b, z + b] of the (s, z) plane, divided by the box volume. In 1D s is
/// x. In 2D the box lives in the half plane through the center along the ray
/// `dir`, with weight rho (axisymmetric data); s is rho. Faces are integrated
/// with a composite midpoint rule split at the points where phi is not smooth.
struct FluxBox {
  Vec2 origin;        // 1D: (0,0); 2D: the circle center
  Vec2 dir{1.0, 0.0}; // unit ray direction
  double s = 0.0;
  double z = 0.0;
  double half = 0.0;
};
double divergence_flux(const calibration::CalibrationField& calib, const FluxBox& box,
                       int midpoint_nodes = 8, double* scale = nullptr);

/// Simpson integral of phi^x(x, .) over [u~_2(x), u~_1(x)] for x on Gamma.
Vec2 jump_integral_e(const calibration::CalibrationField& calib, const Vec2& x, int n_quad);

/// max over pairs t, s of |Phi(t) - Phi(s)|, Phi the cumulative z-integral
/// of phi^x(x, .) over the window.
double pair_sup_f(const calibration::CalibrationField& calib, const Vec2& x, double z_lo,
                  double z_hi, int n_nodes);

/// Default z window for a column: [u~_2 - h - J/2, u~_1 + h + J/2].
std::pair<double, double> z_window(const calibration::CalibrationField& calib,
                                   const calibration::Column& c);

CalibrationReport verify_all(const calibration::CalibrationField& calib,
                             const Sampling& sampling = {});

/// Structured text report: one block per condition.
void write_report(std::ostream& os, const CalibrationReport& r);
/// Flat margin CSV: x,y,z,side,region,in_band,margin.
void write_margins_csv(std::ostream& os, const CalibrationReport& r);

// ---------------------------------------------------------------------------
// Threshold scan

struct Problem {
  fields::GridSpec grid;
  geometry::Interface iface;
  fields::InputDatum g;
  fields::SolverOptions solver;
  calibration::Overrides overrides;
  calibration::Options options;
  Sampling sampling;
};

struct ScanStep {
  double beta = 0.0;
  bool pass = false;
  std::string detail;  // failed conditions or the infeasibility message
};

struct ScanResult {
  /// Smallest passing beta found, or +inf when nothing in range passes.
  double threshold = std::numeric_limits<double>::infinity();
  /// beta where F(u_beta) = F(crack_free) (NaN when there is no sign change).
  double energy_crossover = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScanStep> steps;
};

/// Log-bisection for the smallest beta in [lo, hi] at which verify_all
/// passes, plus the energy crossover by bisection on the discrete energies.
ScanResult scan_beta_threshold(const Problem& problem, double lo, double hi, int bisections = 10);

/// Energy crossover alone. Returns NaN when F(u_beta) - F(crack_free) does
/// not change sign on [lo, hi].
double energy_crossover(const Problem& problem, double lo, double hi, double rel_tol = 1e-6);

// ---------------------------------------------------------------------------
// Scaling study

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log residuals
};
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingRow {
  double beta = 0.0;
  double sup_err = 0.0;
  double l2_err = 0.0;
  double grad_sup = 0.0;
  double hess_sup = 0.0;  // on cells within R/2 of Gamma
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  LinearFit sup_fit;
  LinearFit l2_fit;
  LinearFit grad_fit;
  LinearFit hess_fit;
};

ScalingReport scaling_study(const fields::GridSpec& grid, const std::optional<geometry::Interface>& iface,
                            const fields::InputDatum& g, const std::vector<double>& betas,
                            const fields::SolverOptions& solver = {});

/// beta,sup_err,l2_err,grad_sup,hess_sup
void write_scaling_csv(std::ostream& os, const ScalingReport& r);

}  // namespace mslab::verifier
