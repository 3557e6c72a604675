// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/input_datum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mslab/errors.hpp"

namespace mslab::fields {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_jump(Preset p) {
  return p == Preset::jump_constant || p == Preset::jump_plus_smooth || p == Preset::radial_jump;
}

bool has_cosine(Preset p) { return p == Preset::cosine_mode || p == Preset::jump_plus_smooth; }

}  // namespace

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::constant:
      return "constant";
    case Preset::cosine_mode:
      return "cosine_mode";
    case Preset::jump_constant:
      return "jump_constant";
    case Preset::jump_plus_smooth:
      return "jump_plus_smooth";
    case Preset::radial_jump:
      return "radial_jump";
  }
  return "unknown";
}

std::optional<Preset> parse_preset(const std::string& name) {
  for (Preset p : {Preset::constant, Preset::cosine_mode, Preset::jump_constant,
                   Preset::jump_plus_smooth, Preset::radial_jump}) {
    if (preset_name(p) == name) return p;
  }
  return std::nullopt;
}

InputDatum::InputDatum(Preset preset, double amplitude, int mode, double smooth,
                       const geometry::Domain& domain, std::optional<geometry::Interface> iface)
    : preset_(preset),
      a_(amplitude),
      k_(mode),
      c_(smooth),
      domain_(domain),
      iface_(std::move(iface)) {
  domain_.validate();
  if (is_jump(preset_) && !iface_) {
    throw PreconditionError("preset " + preset_name(preset_) + " needs an interface");
  }
  if (preset_ == Preset::radial_jump &&
      iface_->kind() != geometry::Interface::Kind::circle) {
    throw PreconditionError("preset radial_jump needs a circle interface");
  }
  if (has_cosine(preset_) && k_ < 0) throw PreconditionError("cosine mode must be >= 0");
  if (is_jump(preset_) && !(jump_inf() > 0.0)) {
    throw PreconditionError("jump preset has zero jump on the interface");
  }
}

bool InputDatum::has_jump() const { return is_jump(preset_); }

double InputDatum::jump_inf() const {
  switch (preset_) {
    case Preset::jump_constant:
    case Preset::jump_plus_smooth:
      return std::abs(2.0 * a_);
    case Preset::radial_jump:
      return std::abs(2.0 * a_ + c_ * std::cyl_bessel_j(0.0, kBesselJ1Zero));
    default:
      return 0.0;
  }
}

bool InputDatum::positively_oriented() const {
  if (!has_jump()) return false;
  if (preset_ == Preset::radial_jump) {
    return 2.0 * a_ + c_ * std::cyl_bessel_j(0.0, kBesselJ1Zero) > 0.0;
  }
  return a_ > 0.0;
}

double InputDatum::smooth_part(const Vec2& x) const {
  if (preset_ == Preset::radial_jump) {
    const double rho = norm(x - iface_->center());
    return c_ * std::cyl_bessel_j(0.0, kBesselJ1Zero * rho / iface_->radius());
  }
  const double amp = preset_ == Preset::cosine_mode ? a_ : c_;
  return amp * std::cos(k_ * kPi * x.x);
}

Vec2 InputDatum::smooth_gradient(const Vec2& x) const {
  if (preset_ == Preset::radial_jump) {
    const Vec2 rel = x - iface_->center();
    const double rho = norm(rel);
    if (rho == 0.0) return {};
    const double kr = kBesselJ1Zero / iface_->radius();
    // d/drho J0(kr rho) = -kr J1(kr rho)
    const double dr = -c_ * kr * std::cyl_bessel_j(1.0, kr * rho);
    return (dr / rho) * rel;
  }
  const double amp = preset_ == Preset::cosine_mode ? a_ : c_;
  return {-amp * k_ * kPi * std::sin(k_ * kPi * x.x), 0.0};
}

double InputDatum::value(const Vec2& x) const {
  geometry::Side s = geometry::Side::side1;
  if (iface_) {
    s = geometry::classify(x, *iface_);
    if (s == geometry::Side::on_interface) s = geometry::Side::side1;
  }
  return value(x, s);
}

double InputDatum::value(const Vec2& x, geometry::Side side) const {
  const bool first = side != geometry::Side::side2;
  switch (preset_) {
    case Preset::constant:
      return a_;
    case Preset::cosine_mode:
      return smooth_part(x);
    case Preset::jump_constant:
      return first ? a_ : -a_;
    case Preset::jump_plus_smooth:
      return (first ? a_ : -a_) + smooth_part(x);
    case Preset::radial_jump:
      return first ? a_ + smooth_part(x) : -a_;
  }
  return 0.0;
}

Vec2 InputDatum::gradient(const Vec2& x, geometry::Side side) const {
  switch (preset_) {
    case Preset::constant:
    case Preset::jump_constant:
      return {};
    case Preset::cosine_mode:
    case Preset::jump_plus_smooth:
      return smooth_gradient(x);
    case Preset::radial_jump:
      return side == geometry::Side::side2 ? Vec2{} : smooth_gradient(x);
  }
  return {};
}

double InputDatum::sup_norm() const {
  switch (preset_) {
    case Preset::constant:
    case Preset::jump_constant:
      return std::abs(a_);
    case Preset::cosine_mode:
      return std::abs(a_);
    case Preset::jump_plus_smooth:
      return k_ == 0 ? std::abs(a_ + c_) : std::abs(a_) + std::abs(c_);
    case Preset::radial_jump: {
      // J0 attains 1 at the center and its minimum on [0, j11] at j11.
      const double lo = a_ + c_ * std::cyl_bessel_j(0.0, kBesselJ1Zero);
      const double hi = a_ + c_;
      return std::max({std::abs(lo), std::abs(hi), std::abs(a_)});
    }
  }
  return 0.0;
}

double InputDatum::gradient_sup() const {
  switch (preset_) {
    case Preset::constant:
    case Preset::jump_constant:
      return 0.0;
    case Preset::cosine_mode:
      return std::abs(a_) * k_ * kPi;
    case Preset::jump_plus_smooth:
      return std::abs(c_) * k_ * kPi;
    case Preset::radial_jump: {
      // max of J1 on [0, j11] is attained near 1.8412.
      const double kr = kBesselJ1Zero / iface_->radius();
      return std::abs(c_) * kr * std::cyl_bessel_j(1.0, 1.8411837813406593);
    }
  }
  return 0.0;
}

double InputDatum::eigenvalue() const {
  if (preset_ == Preset::radial_jump) {
    const double kr = kBesselJ1Zero / iface_->radius();
    return kr * kr;
  }
  return (k_ * kPi) * (k_ * kPi);
}

bool InputDatum::heat_closed_form() const {
  switch (preset_) {
    case Preset::constant:
    case Preset::jump_constant:
    case Preset::radial_jump:
      return true;
    case Preset::cosine_mode:
    case Preset::jump_plus_smooth: {
      if (iface_ && iface_->kind() == geometry::Interface::Kind::circle) return false;
      std::vector<double> pts{domain_.lower[0], domain_.upper[0]};
      if (iface_) pts.push_back(iface_->x0());
      for (double b : pts) {
        if (std::abs(std::sin(k_ * kPi * b)) > 1e-12) return false;
      }
      return true;
    }
  }
  return false;
}

double InputDatum::heat_value(const Vec2& x, geometry::Side side, double t) const {
  if (!heat_closed_form()) {
    throw PreconditionError("no closed-form heat flow for preset " + preset_name(preset_));
  }
  const double decay = std::exp(-eigenvalue() * t);
  const bool first = side != geometry::Side::side2;
  switch (preset_) {
    case Preset::constant:
      return a_;
    case Preset::cosine_mode:
      return decay * smooth_part(x);
    case Preset::jump_constant:
      return first ? a_ : -a_;
    case Preset::jump_plus_smooth:
      return (first ? a_ : -a_) + decay * smooth_part(x);
    case Preset::radial_jump:
      return first ? a_ + decay * smooth_part(x) : -a_;
  }
  return 0.0;
}

}  // namespace mslab::fields
