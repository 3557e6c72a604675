// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "mslab/geometry.hpp"
#include "mslab/vec.hpp"

namespace mslab::fields {

enum class Preset { constant, cosine_mode, jump_constant, jump_plus_smooth, radial_jump };

std::string preset_name(Preset p);
std::optional<Preset> parse_preset(const std::string& name);

/// First positive zero of J1, so that J0(j11 * rho / r) has zero radial
/// derivative on the circle of radius r.
inline constexpr double kBesselJ1Zero = 3.8317059702075125;

/// Analytic datum g built from a preset.
///
///   constant          g = a
///   cosine_mode       g = a cos(k pi x)
///   jump_constant     g = +a on side1, -a on side2
///   jump_plus_smooth  g = +-a + c cos(k pi x)
///   radial_jump       g = a + c J0(j11 rho / r) inside the circle, -a outside
///
/// x is the first coordinate; rho is the distance to the circle center.
/// A positive amplitude puts the larger value on side1.
class InputDatum {
 public:
  InputDatum(Preset preset, double amplitude, int mode, double smooth,
             const geometry::Domain& domain, std::optional<geometry::Interface> iface);

  Preset preset() const { return preset_; }
  double amplitude() const { return a_; }
  int mode() const { return k_; }
  double smooth() const { return c_; }
  const geometry::Domain& domain() const { return domain_; }
  const std::optional<geometry::Interface>& interface() const { return iface_; }

  bool has_jump() const;
  /// inf over Gamma of |g+ - g-|; zero without a jump.
  double jump_inf() const;
  /// True when side1 carries the larger trace everywhere on Gamma.
  bool positively_oriented() const;

  /// Value at x, with the side taken from the interface (side1 on Gamma).
  double value(const Vec2& x) const;
  double value(const Vec2& x, geometry::Side side) const;
  Vec2 gradient(const Vec2& x, geometry::Side side) const;
  double sup_norm() const;
  double gradient_sup() const;

  /// True when every smooth component is a Neumann eigenfunction of each
  /// subdomain, so the heat flow from this datum has a closed form.
  bool heat_closed_form() const;
  /// Exact Neumann heat flow at time t. Requires heat_closed_form().
  double heat_value(const Vec2& x, geometry::Side side, double t) const;

 private:
  double smooth_part(const Vec2& x) const;
  Vec2 smooth_gradient(const Vec2& x) const;
  double eigenvalue() const;

  Preset preset_;
  double a_;
  int k_;
  double c_;
  geometry::Domain domain_;
  std::optional<geometry::Interface> iface_;
};

}  // namespace mslab::fields
