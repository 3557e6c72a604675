// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "mslab/vec.hpp"

namespace mslab::geometry {

/// Axis-aligned box Omega in one or two dimensions.
struct Domain {
  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 0.0};

  /// Throws PreconditionError unless dim is 1 or 2 and every axis is nondegenerate.
  void validate() const;
  double extent(int axis) const { return upper[axis] - lower[axis]; }
  double diameter() const;
  bool contains(const Vec2& x, double tol = 0.0) const;
  /// Distance from x to the boundary of the box (positive inside).
  double boundary_distance(const Vec2& x) const;
};

enum class Side { side1, side2, on_interface };

inline int side_index(Side s) { return s == Side::side2 ? 1 : 0; }

/// The crack Gamma: an interior point (dim 1) or a circle (dim 2).
class Interface {
 public:
  enum class Kind { point, circle };

  static Interface point(const Domain& domain, double x0);
  static Interface circle(const Domain& domain, Vec2 center, double radius);

  Kind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  double x0() const { return x0_; }
  Vec2 center() const { return center_; }
  double radius() const { return radius_; }
  /// Two-sided rolling-ball radius that also clears the boundary of Omega.
  double reach() const { return reach_; }
  /// Classification tolerance 1e-12 * diam(Omega).
  double tolerance() const { return tol_; }

  /// Signed distance, negative on side1. Valid everywhere.
  double signed_distance(const Vec2& x) const;

  /// The same interface with its level set moved outward by delta
  /// (point moves right, circle grows).
  Interface shifted(double delta) const;

 private:
  Interface() = default;
  Kind kind_ = Kind::point;
  Domain domain_;
  double x0_ = 0.0;
  Vec2 center_;
  double radius_ = 0.0;
  double reach_ = 0.0;
  double tol_ = 0.0;
};

struct GeometryPack {
  double d = 0.0;
  Vec2 proj;
  Vec2 normal;
  double lap_d = 0.0;
  /// False outside the tube |d| < R; proj and normal are then still computed
  /// from the closed form but carry no guarantee.
  bool in_tube = true;
};

/// Signed distance, projection, normal and Laplacian of d at x.
/// Throws DegenerateGeometryError at the circle center.
GeometryPack geometry_pack(const Vec2& x, const Interface& iface);

/// Counting measure of the point, or the circle length.
double interface_measure(const Interface& iface);

Side classify(const Vec2& x, const Interface& iface);

}  // namespace mslab::geometry
