// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mslab/geometry.hpp"
#include "mslab/grid.hpp"
#include "mslab/input_datum.hpp"
#include "mslab/profile.hpp"
#include "mslab/vec.hpp"

namespace mslab::calibration {

// ---------------------------------------------------------------------------
// Profiles

struct WValue {
  double w = 0.0;
  double dw = 0.0;
  double d2w = 0.0;
};

/// Solution of w'' = 16 lambda w with w(0) = 1/2 and w'(R/2) = 0, in a form
/// that never forms exp(+large).
WValue w_profile(double t, double lambda, double R);

/// Quintic smoothstep cutoff: 1 on [0, R/4], 0 on [R/2, inf), C2 in between.
struct Cutoff {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
Cutoff cutoff(double s, double R);

// ---------------------------------------------------------------------------
// Parameters

enum class Policy {
  /// The default rule set: lambda from the gradient/jump inequality, gamma = 0.2,
  /// gamma1 = 0.35.
  standard,
  /// Smallest lambda that keeps the slabs S/2 apart, gamma = 0.01, gamma1 = 0.02.
  compact,
};

std::string policy_name(Policy p);
std::optional<Policy> parse_policy(const std::string& s);

struct Overrides {
  Policy policy = Policy::standard;
  std::optional<double> lambda;
  std::optional<double> eps;
  std::optional<double> gamma;
  std::optional<double> gamma1;
  std::optional<double> D;
  /// Build the field even for beta < 1 (negative controls). The construction
  /// is then not expected to calibrate anything.
  bool allow_small_beta = false;
};

enum class DivergenceMode { analytic, finite_difference };

struct Options {
  DivergenceMode divergence = DivergenceMode::analytic;
  /// Finite-difference step for DivergenceMode::finite_difference; 0 selects
  /// half the grid spacing.
  double fd_step = 0.0;
  int radial_cells = 4096;  // radial reduction grid for 2D radial data
  /// Use the closed-form continuous minimizer on each side when the datum
  /// admits one (all 1D jump presets and radial data). Otherwise the sides are
  /// splines through the discrete solution, whose Laplacian matches
  /// beta (u - g) only up to the discretization error.
  bool exact_sides = true;
};

struct CalibrationParams {
  double beta = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  double gamma = 0.0;
  double gamma1 = 0.0;
  double D = 0.0;
  double S = 0.0;
  double R = 0.0;
  Policy policy = Policy::standard;
  // Derived quantities.
  double h_tilde = 0.0;     // on Gamma
  double decay_rate = 0.0;  // beta^(1/2 + gamma1)
  double d_kink = 0.0;      // |d| where h_beta reaches eps
  bool h_continuous = true; // d_kink <= D
  // Measured norms.
  double grad_u_sup = 0.0;
  double grad_v_sup = 0.0;
  double jump_J = 0.0;         // u_1 - u_2 on Gamma
  double u_minus_g_sup = 0.0;  // ||u_beta - g||_inf on the grid
  double slab_separation = 0.0;
};

// ---------------------------------------------------------------------------
// Structure fields

struct VField {
  std::array<double, 2> v{};
  std::array<Vec2, 2> grad{};
  std::array<double, 2> lap{};
  std::array<double, 2> mu{};
};

class Structure {
 public:
  Structure(double lambda, double R, const geometry::Interface& iface);

  double lambda() const { return lambda_; }
  double R() const { return R_; }
  /// p(s) = theta(s) w(s) and its first two derivatives.
  WValue p(double s) const;
  /// z_i on Omega_i as a function of |d|.
  double z(double s) const { return 0.5 + p(s).w; }
  /// v_1, v_2 with gradients, Laplacians and mu_i = Lap v_i / v_i.
  VField v_at(const Vec2& x) const;
  /// |grad v_1| on Gamma.
  double grad_v_on_gamma() const { return std::abs(p(0.0).dw); }
  /// (1/sqrt 2) |grad v_1|^(-1/2) on Gamma.
  double h_tilde() const;
  /// sup over s of |p'(s)|.
  double grad_v_sup() const;

 private:
  double lambda_;
  double R_;
  geometry::Interface iface_;
};

/// h_beta = max(h_tilde - rate |d|, eps) on |d| <= D, eps beyond.
struct HValue {
  double h = 0.0;
  Vec2 grad;
  bool decaying = false;
};
HValue h_beta(const CalibrationParams& p, const geometry::GeometryPack& geo);

// ---------------------------------------------------------------------------
// Side evaluators and extensions

struct SideEval {
  double value = 0.0;
  Vec2 grad;
  double lap = 0.0;
};

/// Smooth evaluator of u_beta restricted to one side.
class SideFunction {
 public:
  virtual ~SideFunction() = default;
  virtual SideEval eval(const Vec2& x) const = 0;
};

/// 1D side: Neumann-reflected spline through the cell values of one piece.
class ProfileSide : public SideFunction {
 public:
  explicit ProfileSide(fields::NeumannProfile prof) : prof_(std::move(prof)) {}
  SideEval eval(const Vec2& x) const override;

 private:
  fields::NeumannProfile prof_;
};

/// 2D radial side: profile in rho around a center.
class RadialSide : public SideFunction {
 public:
  RadialSide(fields::NeumannProfile prof, Vec2 center) : prof_(std::move(prof)), c_(center) {}
  SideEval eval(const Vec2& x) const override;

 private:
  fields::NeumannProfile prof_;
  Vec2 c_;
};

/// Exact 1D solution of u'' = beta (u - g) on [l, r] with u'(l) = u'(r) = 0
/// for g = s + c cos(k pi x).
class ScreenedCosineSide : public SideFunction {
 public:
  ScreenedCosineSide(double s, double c, int k, double beta, double l, double r);
  SideEval eval(const Vec2& x) const override;

 private:
  double s_, c_, kpi_, beta_, l_, r_, sb_;
  double amp_;    // c beta / (beta + k^2 pi^2)
  double coef_l_; // multiplies cosh(sb (x - l)) / sinh(sb (r - l))
  double coef_r_; // multiplies cosh(sb (r - x)) / sinh(sb (r - l))
};

/// Exact radial solution a + c beta / (beta + k^2) J0(k rho) inside a circle
/// with k = j11 / r.
class BesselSide : public SideFunction {
 public:
  BesselSide(double a, double c, double k, double beta, Vec2 center);
  SideEval eval(const Vec2& x) const override;

 private:
  double a_, amp_, k_;
  Vec2 c_;
};

class ConstantSide : public SideFunction {
 public:
  explicit ConstantSide(double c) : c_(c) {}
  SideEval eval(const Vec2&) const override { return {c_, {}, 0.0}; }

 private:
  double c_;
};

/// The pair of extensions u~_1, u~_2 defined on all of Omega. On its own side
/// u~_i = u_i. Across Gamma the other side's solution is shifted by the
/// interface jump J = u_1 - u_2 (constant on Gamma for the supported data):
/// u~_1 = u_2 + J on Omega_2 and u~_2 = u_1 - J on Omega_1. Both sides have
/// zero normal derivative on Gamma, so the extensions are C1 across it, and
/// u~_1 - u~_2 = J everywhere.
class ExtendedPair {
 public:
  ExtendedPair(std::shared_ptr<const SideFunction> u1, std::shared_ptr<const SideFunction> u2,
               geometry::Interface iface, double jump);
  /// u~_i at x; i = 0 for u~_1, 1 for u~_2.
  SideEval eval(int i, const Vec2& x) const;
  SideEval own(int side, const Vec2& x) const;
  double jump() const { return J_; }

 private:
  std::array<std::shared_ptr<const SideFunction>, 2> u_;
  geometry::Interface iface_;
  double J_;
};

// ---------------------------------------------------------------------------
// The assembled field

enum class Region { below, own_slab, gap, foreign_slab, above };
std::string region_name(Region r);

struct PhiValue {
  Vec2 x;          // horizontal component
  double z = 0.0;  // vertical component
  Region region = Region::own_slab;
  int slab = -1;          // index of the slab containing the point, or -1
  bool boundary = false;  // on a slab boundary surface (one-sided value)
};

struct FdTerm;

/// Everything phi needs at one horizontal position x.
struct Column {
  Vec2 x;
  int side = 0;  // 0 for Omega_1, 1 for Omega_2
  bool on_gamma = false;
  geometry::GeometryPack geo;
  std::array<SideEval, 2> u;  // u~_1, u~_2
  VField v;
  HValue h;
  double g = 0.0;
  double beta = 0.0;
  // Cached vertical values at slab edges.
  double own_lo = 0.0;       // phi^z at z = u~_own - h from inside the own slab
  double own_hi = 0.0;       // phi^z at z = u~_own + h from inside the own slab
  double gap = 0.0;          // phi^z between the slabs
  double foreign_in = 0.0;   // phi^z just inside the foreign slab, gap side
  double foreign_out = 0.0;  // phi^z just inside the foreign slab, far side
  std::vector<FdTerm> fd;    // stencil for finite-difference divergence
};

struct FdTerm {
  int axis = 0;
  double coef = 0.0;
  Column col;
};

class CalibrationField {
 public:
  CalibrationField(CalibrationParams params, Structure structure, ExtendedPair ext,
                   fields::InputDatum g, geometry::Interface iface, Options opts,
                   double grid_spacing);

  const CalibrationParams& params() const { return params_; }
  const Structure& structure() const { return structure_; }
  const ExtendedPair& extension() const { return ext_; }
  const fields::InputDatum& datum() const { return g_; }
  const geometry::Interface& interface() const { return iface_; }
  const Options& options() const { return opts_; }
  double grid_spacing() const { return grid_h_; }

  Column column(const Vec2& x) const;
  PhiValue phi(const Column& c, double z) const;
  PhiValue phi_at(const Vec2& x, double z) const { return phi(column(x), z); }

  /// Slab formula of A_i evaluated regardless of membership.
  Vec2 slab_phi_x(const Column& c, int i, double z) const;
  /// div_x of the slab formula of A_i at height z.
  double slab_div(const Column& c, int i, double z) const;
  /// div_x of the kink term (16/h)(sigma_i (z - u~_i) - h/2)^+ grad u~_i.
  double kink_div(const Column& c, int i, double z) const;
  /// Vertical component inside the own slab (before Psi), plus Psi.
  double own_vertical(const Column& c, double z) const;
  double psi(const Column& c, double z) const;
  /// Integral of div_x phi^x over [z, top edge] (Omega_1) or [z, bottom edge]
  /// (Omega_2) of the foreign slab.
  double chi(const Column& c, double z) const;

  /// Heights where phi is not smooth in z at this column (slab edges, kinks).
  std::vector<double> z_breakpoints(const Column& c) const;

 private:
  Column shallow_column(const Vec2& x) const;
  void attach_fd(Column& c) const;
  void fill_edges(Column& c) const;

  CalibrationParams params_;
  Structure structure_;
  ExtendedPair ext_;
  fields::InputDatum g_;
  geometry::Interface iface_;
  Options opts_;
  double grid_h_;
};

/// sigma_i = (-1)^i with i = 1, 2: -1 for slab A_1, +1 for A_2.
inline double slab_sign(int i) { return i == 0 ? -1.0 : 1.0; }

/// Builds smooth side evaluators from the discrete solution (1D) or from the
/// radial reduction (2D radial data).
std::pair<std::shared_ptr<const SideFunction>, std::shared_ptr<const SideFunction>>
side_functions(const fields::PiecewiseField& u_beta, const fields::InputDatum& g, double beta,
               const Options& opts);

/// Chooses parameters, builds structure and extensions, and assembles phi.
/// Throws InfeasibleParametersError naming the violated inequality.
CalibrationField calibrate(const fields::PiecewiseField& u_beta, const fields::InputDatum& g,
                           double beta, const Overrides& overrides = {},
                           const Options& opts = {});

/// Structured text record of the parameters (key = value lines).
std::string describe(const CalibrationParams& p);

// ---------------------------------------------------------------------------
// Quadrature

/// Integral of f over [a, b] (signed, so reversed limits give the negative),
/// split at the given breakpoints with a 15-point Gauss-Legendre rule on each
/// piece. Nodes are interior, so a jump of f at a breakpoint is never sampled.
/// Exact for piecewise polynomials of degree <= 29.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breaks);

}  // namespace mslab::calibration
