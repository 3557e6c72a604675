// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mslab/errors.hpp"

namespace mslab::geometry {

void Domain::validate() const {
  if (dim != 1 && dim != 2) {
    throw PreconditionError("domain dimension must be 1 or 2, got " + std::to_string(dim));
  }
  for (int a = 0; a < dim; ++a) {
    if (!(lower[a] < upper[a])) {
      throw PreconditionError("domain bounds must satisfy lower < upper on axis " +
                              std::to_string(a));
    }
  }
}

double Domain::diameter() const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += extent(a) * extent(a);
  return std::sqrt(s);
}

bool Domain::contains(const Vec2& x, double tol) const {
  for (int a = 0; a < dim; ++a) {
    if (x[a] < lower[a] - tol || x[a] > upper[a] + tol) return false;
  }
  return true;
}

double Domain::boundary_distance(const Vec2& x) const {
  double best = x[0] - lower[0];
  best = std::min(best, upper[0] - x[0]);
  if (dim == 2) {
    best = std::min(best, x[1] - lower[1]);
    best = std::min(best, upper[1] - x[1]);
  }
  return best;
}

Interface Interface::point(const Domain& domain, double x0) {
  domain.validate();
  if (domain.dim != 1) throw PreconditionError("a point interface needs a 1D domain");
  if (!(x0 > domain.lower[0] && x0 < domain.upper[0])) {
    throw PreconditionError("point interface x0 must lie strictly inside the domain");
  }
  Interface out;
  out.kind_ = Kind::point;
  out.domain_ = domain;
  out.x0_ = x0;
  out.reach_ = std::min(x0 - domain.lower[0], domain.upper[0] - x0);
  out.tol_ = 1e-12 * domain.diameter();
  return out;
}

Interface Interface::circle(const Domain& domain, Vec2 center, double radius) {
  domain.validate();
  if (domain.dim != 2) throw PreconditionError("a circle interface needs a 2D domain");
  if (!(radius > 0.0)) throw PreconditionError("circle radius must be positive");
  const double clearance = domain.boundary_distance(center) - radius;
  if (!(clearance > 0.0)) {
    throw PreconditionError("circle interface must lie strictly inside the domain");
  }
  Interface out;
  out.kind_ = Kind::circle;
  out.domain_ = domain;
  out.center_ = center;
  out.radius_ = radius;
  out.reach_ = std::min(radius, clearance);
  out.tol_ = 1e-12 * domain.diameter();
  return out;
}

double Interface::signed_distance(const Vec2& x) const {
  if (kind_ == Kind::point) return x.x - x0_;
  return norm(x - center_) - radius_;
}

Interface Interface::shifted(double delta) const {
  if (kind_ == Kind::point) return point(domain_, x0_ + delta);
  return circle(domain_, center_, radius_ + delta);
}

GeometryPack geometry_pack(const Vec2& x, const Interface& iface) {
  GeometryPack p;
  if (iface.kind() == Interface::Kind::point) {
    p.d = x.x - iface.x0();
    p.normal = Vec2{1.0, 0.0};
    p.proj = Vec2{iface.x0(), 0.0};
    p.lap_d = 0.0;
  } else {
    const Vec2 rel = x - iface.center();
    const double rho = norm(rel);
    if (rho <= iface.tolerance()) {
      throw DegenerateGeometryError("projection onto the circle is undefined at its center");
    }
    p.d = rho - iface.radius();
    p.normal = rel / rho;
    p.proj = iface.center() + iface.radius() * p.normal;
    p.lap_d = 1.0 / rho;
  }
  p.in_tube = std::abs(p.d) < iface.reach();
  return p;
}

double interface_measure(const Interface& iface) {
  if (iface.kind() == Interface::Kind::point) return 1.0;
  return 2.0 * std::numbers::pi * iface.radius();
}

Side classify(const Vec2& x, const Interface& iface) {
  const double d = iface.signed_distance(x);
  if (std::abs(d) <= iface.tolerance()) return Side::on_interface;
  return d < 0.0 ? Side::side1 : Side::side2;
}

}  // namespace mslab::geometry
