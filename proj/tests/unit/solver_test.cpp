// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/solver.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mslab/errors.hpp"
#include "problems.hpp"

namespace mslab::fields {
namespace {

using mslab::testing::cell_data;
using mslab::testing::interval;
using mslab::testing::square;
constexpr double kPi = std::numbers::pi;

InputDatum cosine(const geometry::Domain& d, double a = 1.0, int k = 1) {
  return InputDatum(Preset::cosine_mode, a, k, 0.0, d, std::nullopt);
}

double eigen_error(int n, double beta) {
  const auto dom = interval(0.0, 1.0);
  const auto grid = GridSpec::make(dom, n);
  const auto u = solve_screened_poisson(grid, whole_mask(grid), cosine(dom), beta);
  double err = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double exact = beta / (beta + kPi * kPi) * std::cos(kPi * grid.center(k).x);
    err = std::max(err, std::abs(u.values[k] - exact));
  }
  return err;
}

TEST(ScreenedPoisson, ConstantDatumIsExact) {
  const auto dom = interval(0.0, 1.0);
  const auto grid = GridSpec::make(dom, 64);
  const InputDatum g(Preset::constant, 3.0, 0, 0.0, dom, std::nullopt);
  const auto u = solve_screened_poisson(grid, whole_mask(grid), g, 10.0);
  for (int k = 0; k < grid.size(); ++k) EXPECT_NEAR(u.values[k], 3.0, 1e-12);
}

TEST(ScreenedPoisson, EigenfunctionConvergesAtSecondOrder) {
  const double e256 = eigen_error(256, 100.0);
  const double e512 = eigen_error(512, 100.0);
  EXPECT_LE(e512, 1e-3);
  const double order = std::log2(e256 / e512);
  EXPECT_GE(order, 1.8);
  EXPECT_LE(order, 2.2);
}

TEST(ScreenedPoisson, PerSideConstantsAreExact) {
  const mslab::testing::JumpProblem1D p(128);
  const auto u = p.solve(100.0);
  for (int k = 0; k < p.grid.size(); ++k) {
    EXPECT_NEAR(u.at(k), p.grid.center(k).x < 0 ? 1.0 : -1.0, 1e-12);
  }
}

TEST(ScreenedPoisson, CompatibilityAndMaximumPrincipleForRandomBetas) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logb(-1.0, 5.0);
  const mslab::testing::JumpProblem1D p(1024, 0.25, 1.0, 0.3, 2);
  for (int trial = 0; trial < 8; ++trial) {
    const double beta = std::pow(10.0, logb(rng));
    const auto u = p.solve(beta);
    for (int i = 0; i < 2; ++i) {
      const auto c = check_solve(u.piece(i), cell_data(u.piece(i), p.g));
      EXPECT_TRUE(c.compat_ok) << "beta " << beta << " compat " << c.compat;
      EXPECT_TRUE(c.max_principle_ok) << "beta " << beta << " overshoot " << c.overshoot;
    }
  }
}

TEST(ScreenedPoisson, MirrorSymmetricDatumGivesSymmetricSolution) {
  const auto dom = interval(-1.0, 1.0);
  const auto grid = GridSpec::make(dom, 200);
  const auto u = solve_screened_poisson(grid, whole_mask(grid), cosine(dom, 1.0, 2), 37.0);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(u.values[i], u.values[199 - i], 1e-10);
}

TEST(ScreenedPoisson, SmallBetaOnFineGridConverges) {
  // At beta = 0.1 and h = 1/512 the requested tolerance sits near the
  // rounding floor of the residual; the solve must still terminate.
  const mslab::testing::JumpProblem1D p(1024, 0.25, 1.0, 0.3, 2);
  SolveStats st;
  const auto u = fields::solve_piecewise(p.grid, p.iface, p.g, 0.1, {}, &st);
  EXPECT_GT(st.iterations, 0);
  EXPECT_TRUE(std::isfinite(st.residual));
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(check_solve(u.piece(i), cell_data(u.piece(i), p.g)).pass());
  }
}

TEST(ScreenedPoisson, IterationCapRaisesWithResidual) {
  const auto dom = interval(0.0, 1.0);
  const auto grid = GridSpec::make(dom, 256);
  SolverOptions opts;
  opts.max_iter = 2;
  try {
    solve_screened_poisson(grid, whole_mask(grid), cosine(dom), 1.0, opts);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 2);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(ScreenedPoisson, WorkersReproduceSingleWorkerResult) {
  const auto dom = square(-1.0, 1.0);
  const auto grid = GridSpec::make(dom, 64);
  SolverOptions one, four;
  four.workers = 4;
  const auto a = solve_screened_poisson(grid, whole_mask(grid), cosine(dom, 1.0, 3), 50.0, one);
  const auto b = solve_screened_poisson(grid, whole_mask(grid), cosine(dom, 1.0, 3), 50.0, four);
  for (int k = 0; k < grid.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-13);
}

TEST(ScreenedPoisson, JacobiToggleAgrees) {
  const auto dom = interval(0.0, 1.0);
  const auto grid = GridSpec::make(dom, 128);
  SolverOptions jac;
  jac.jacobi = true;
  const auto a = solve_screened_poisson(grid, whole_mask(grid), cosine(dom), 100.0);
  const auto b = solve_screened_poisson(grid, whole_mask(grid), cosine(dom), 100.0, jac);
  for (int k = 0; k < grid.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-9);
}

TEST(RadialReduction, MatchesBesselClosedForm) {
  const double r = 0.5, beta = 100.0, a = 1.0, c = 0.3;
  const double k = kBesselJ1Zero / r;
  auto J0 = [](double x) { return boost::math::cyl_bessel_j(0, x); };
  const int m = 2048;
  const auto u = solve_radial([&](double rho) { return a + c * J0(k * rho); }, beta, r, m);
  double err = 0.0;
  for (int j = 0; j < m; ++j) {
    const double rho = (j + 0.5) * r / m;
    err = std::max(err, std::abs(u[j] - (a + c * beta / (beta + k * k) * J0(k * rho))));
  }
  EXPECT_LE(err, 1e-6);
}

TEST(Differentiate, LinearFieldIsExact) {
  const auto dom = interval(0.0, 1.0);
  const auto grid = GridSpec::make(dom, 32);
  const auto u = make_field(grid, whole_mask(grid), [](Vec2 x, int) { return 2.5 * x.x - 1.0; });
  const auto d = differentiate(u);
  for (int k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(d.grad[k].x, 2.5, 1e-12);
    EXPECT_NEAR(d.hess[k].xx, 0.0, 1e-9);
  }
}

TEST(Differentiate, ConstantFieldHasZeroGradient) {
  const auto grid = GridSpec::make(square(0.0, 1.0), 16);
  const auto u = make_field(grid, whole_mask(grid), [](Vec2, int) { return 4.0; });
  const auto d = differentiate(u);
  for (int k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(d.grad[k].x, 0.0);
    EXPECT_EQ(d.grad[k].y, 0.0);
  }
}

TEST(Differentiate, CosineGradientConvergesAtSecondOrder) {
  auto err = [](int n) {
    const auto grid = GridSpec::make(interval(0.0, 1.0), n);
    const auto u =
        make_field(grid, whole_mask(grid), [](Vec2 x, int) { return std::cos(kPi * x.x); });
    const auto d = differentiate(u);
    double e = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
      e = std::max(e, std::abs(d.grad[k].x + kPi * std::sin(kPi * grid.center(k).x)));
    }
    return e;
  };
  EXPECT_NEAR(std::log2(err(128) / err(256)), 2.0, 0.2);
}

TEST(Differentiate, ThinMaskIsRejected) {
  const auto dom = interval(0.0, 1.0);
  const auto iface = geometry::Interface::point(dom, 0.25);
  const auto grid = GridSpec::make(dom, 8);
  const auto u = make_field(grid, side_mask(grid, iface, geometry::Side::side1),
                            [](Vec2 x, int) { return x.x; });
  EXPECT_THROW(differentiate(u), PreconditionError);
}

TEST(Sample, CellCentersLinearAndCosine) {
  const auto dom = interval(0.0, 1.0);
  auto grid = GridSpec::make(dom, 256);
  const auto lin = make_field(grid, whole_mask(grid), [](Vec2 x, int) { return 3.0 * x.x + 1.0; });
  EXPECT_EQ(sample(lin, grid.center(17)), lin.values[17]);
  EXPECT_NEAR(sample(lin, Vec2{0.4321}), 3.0 * 0.4321 + 1.0, 1e-12);
  const auto c = make_field(grid, whole_mask(grid), [](Vec2 x, int) { return std::cos(kPi * x.x); });
  EXPECT_NEAR(sample(c, Vec2{0.123}), std::cos(kPi * 0.123), 1e-4);
}

TEST(Sample, RefusesTheOtherSide) {
  const mslab::testing::JumpProblem1D p(64);
  const auto u = p.solve(10.0);
  EXPECT_THROW(sample(u.inner, Vec2{0.5}), SideMismatchError);
  EXPECT_NEAR(sample(u.inner, Vec2{-0.5}), 1.0, 1e-12);
  EXPECT_NEAR(trace(u.outer, Vec2{0.0}), -1.0, 1e-12);
}

TEST(FieldCsv, HeaderAndRowCount) {
  const auto grid = GridSpec::make(square(0.0, 1.0), 8);
  const auto u = make_field(grid, whole_mask(grid), [](Vec2 x, int) { return x.x * x.y; });
  std::ostringstream os;
  write_field_csv(os, u);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("x,y,value\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 65);
}

}  // namespace
}  // namespace mslab::fields
