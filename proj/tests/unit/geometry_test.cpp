// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mslab/errors.hpp"
#include "problems.hpp"

namespace mslab::geometry {
namespace {

using mslab::testing::interval;
using mslab::testing::square;

TEST(Domain, RejectsBadDimensionAndDegenerateAxes) {
  Domain d;
  d.dim = 3;
  EXPECT_THROW(d.validate(), PreconditionError);
  Domain e = interval(1.0, 1.0);
  EXPECT_THROW(e.validate(), PreconditionError);
  EXPECT_NO_THROW(square(-1.0, 1.0).validate());
}

TEST(PointInterface, PackMatchesClosedForm) {
  const auto iface = Interface::point(interval(-1.0, 1.0), 0.0);
  const auto g = geometry_pack(Vec2{-0.25}, iface);
  EXPECT_DOUBLE_EQ(g.d, -0.25);
  EXPECT_DOUBLE_EQ(g.normal.x, 1.0);
  EXPECT_DOUBLE_EQ(g.lap_d, 0.0);
  EXPECT_DOUBLE_EQ(g.proj.x, 0.0);
  EXPECT_DOUBLE_EQ(iface.reach(), 1.0);
  EXPECT_DOUBLE_EQ(interface_measure(iface), 1.0);
}

TEST(PointInterface, ReachIsDistanceToNearerEnd) {
  EXPECT_DOUBLE_EQ(Interface::point(interval(-1.0, 1.0), 0.25).reach(), 0.75);
  EXPECT_THROW(Interface::point(interval(-1.0, 1.0), 1.0), PreconditionError);
  EXPECT_THROW(Interface::point(square(-1.0, 1.0), 0.0), PreconditionError);
}

TEST(CircleInterface, PackMatchesClosedForm) {
  const auto iface = Interface::circle(square(-1.0, 1.0), Vec2{0.0, 0.0}, 0.5);
  const auto g = geometry_pack(Vec2{1.0, 0.0}, iface);
  EXPECT_DOUBLE_EQ(g.d, 0.5);
  EXPECT_DOUBLE_EQ(g.proj.x, 0.5);
  EXPECT_DOUBLE_EQ(g.proj.y, 0.0);
  EXPECT_DOUBLE_EQ(g.normal.x, 1.0);
  EXPECT_DOUBLE_EQ(g.lap_d, 1.0);
  EXPECT_NEAR(interface_measure(iface), std::numbers::pi, 1e-15);
  EXPECT_NEAR(interface_measure(Interface::circle(square(-2.0, 2.0), Vec2{}, 1.0)),
              2.0 * std::numbers::pi, 1e-15);
}

TEST(CircleInterface, CenterIsDegenerate) {
  const auto iface = Interface::circle(square(-1.0, 1.0), Vec2{0.0, 0.0}, 0.5);
  EXPECT_THROW(geometry_pack(Vec2{0.0, 0.0}, iface), DegenerateGeometryError);
}

TEST(CircleInterface, ReachIsMinOfRadiusAndClearance) {
  EXPECT_DOUBLE_EQ(Interface::circle(square(-1.0, 1.0), Vec2{}, 0.5).reach(), 0.5);
  EXPECT_NEAR(Interface::circle(square(-1.0, 1.0), Vec2{}, 0.8).reach(), 0.2, 1e-15);
  EXPECT_THROW(Interface::circle(square(-1.0, 1.0), Vec2{}, 1.0), PreconditionError);
  EXPECT_THROW(Interface::circle(square(-1.0, 1.0), Vec2{}, -0.1), PreconditionError);
}

TEST(Classify, SidesAndTolerance) {
  const auto pt = Interface::point(interval(-1.0, 1.0), 0.0);
  EXPECT_EQ(classify(Vec2{-0.1}, pt), Side::side1);
  EXPECT_EQ(classify(Vec2{0.1}, pt), Side::side2);
  EXPECT_EQ(classify(Vec2{0.0}, pt), Side::on_interface);
  EXPECT_EQ(classify(Vec2{1e-13}, pt), Side::on_interface);
  const auto c = Interface::circle(square(-1.0, 1.0), Vec2{}, 0.5);
  EXPECT_EQ(classify(Vec2{0.7, 0.0}, c), Side::side2);
  EXPECT_EQ(classify(Vec2{0.2, 0.1}, c), Side::side1);
}

TEST(CircleInterface, RandomTubePointsProjectConsistently) {
  const auto iface = Interface::circle(square(-1.0, 1.0), Vec2{0.1, -0.05}, 0.45);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> off(-0.99, 0.99);
  double worst_proj = 0.0, worst_on = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double t = ang(rng);
    const double rho = iface.radius() + off(rng) * iface.reach();
    const Vec2 x{iface.center().x + rho * std::cos(t), iface.center().y + rho * std::sin(t)};
    const auto g = geometry_pack(x, iface);
    const Vec2 r = g.proj - (x - g.d * g.normal);
    worst_proj = std::max(worst_proj, std::hypot(r.x, r.y));
    worst_on = std::max(worst_on, std::abs(iface.signed_distance(g.proj)));
  }
  EXPECT_LE(worst_proj, 1e-12);
  EXPECT_LE(worst_on, 1e-12);
}

TEST(CircleInterface, DistanceIsOneLipschitzWithNormalGradient) {
  const auto iface = Interface::circle(square(-1.0, 1.0), Vec2{}, 0.5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 x{u(rng), u(rng)};
    const Vec2 y{u(rng), u(rng)};
    EXPECT_LE(std::abs(iface.signed_distance(x) - iface.signed_distance(y)),
              std::hypot(x.x - y.x, x.y - y.y) + 1e-15);
  }
  // Centered differences of d against the normal: error shrinks as h^2.
  const Vec2 x{0.31, 0.42};
  const auto g = geometry_pack(x, iface);
  auto fd_err = [&](double h) {
    const double gx = (iface.signed_distance(Vec2{x.x + h, x.y}) -
                       iface.signed_distance(Vec2{x.x - h, x.y})) / (2 * h);
    const double gy = (iface.signed_distance(Vec2{x.x, x.y + h}) -
                       iface.signed_distance(Vec2{x.x, x.y - h})) / (2 * h);
    return std::hypot(gx - g.normal.x, gy - g.normal.y);
  };
  const double order = std::log2(fd_err(1e-2) / fd_err(5e-3));
  EXPECT_NEAR(order, 2.0, 0.1);
}

TEST(Interface, ShiftMovesLevelSetOutward) {
  const auto pt = Interface::point(interval(-1.0, 1.0), 0.0).shifted(0.25);
  EXPECT_DOUBLE_EQ(pt.x0(), 0.25);
  const auto c = Interface::circle(square(-1.0, 1.0), Vec2{}, 0.5).shifted(0.1);
  EXPECT_DOUBLE_EQ(c.radius(), 0.6);
}

}  // namespace
}  // namespace mslab::geometry
