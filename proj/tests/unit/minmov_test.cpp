// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/minmov.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mslab/errors.hpp"
#include "problems.hpp"

namespace mslab::minmov {
namespace {

using mslab::testing::interval;
constexpr double kPi = std::numbers::pi;

EvolutionConfig cosine_config(int n, double delta, double horizon) {
  const auto dom = interval(0.0, 1.0);
  return EvolutionConfig{fields::GridSpec::make(dom, n),
                         std::nullopt,
                         fields::InputDatum(fields::Preset::cosine_mode, 1.0, 1, 0.0, dom, std::nullopt),
                         delta,
                         horizon};
}

EvolutionConfig jump_config(double a, double c, double delta, double horizon) {
  const auto dom = interval(-1.0, 1.0);
  const auto iface = geometry::Interface::point(dom, 0.0);
  return EvolutionConfig{fields::GridSpec::make(dom, 512), iface,
                         fields::InputDatum(c == 0.0 ? fields::Preset::jump_constant
                                                     : fields::Preset::jump_plus_smooth,
                                            a, 1, c, dom, iface),
                         delta, horizon};
}

const fields::ScalarField& whole(const State& s) { return std::get<fields::ScalarField>(s); }
const fields::PiecewiseField& pieces(const State& s) { return std::get<fields::PiecewiseField>(s); }

TEST(Step, ConstantStaysConstant) {
  const auto dom = interval(0.0, 1.0);
  auto cfg = cosine_config(64, 1e-2, 0.1);
  cfg.u0 = fields::InputDatum(fields::Preset::constant, 2.5, 0, 0.0, dom, std::nullopt);
  const auto v = mm_step(initial_state(cfg), 1e-2, cfg.solver);
  for (double x : whole(v).values) EXPECT_NEAR(x, 2.5, 1e-13);
}

TEST(Step, CosineModeDecaysByTheResolventFactor) {
  const int n = 256;
  const double delta = 1e-3;
  const auto cfg = cosine_config(n, delta, 0.1);
  const auto v0 = initial_state(cfg);
  const auto v1 = mm_step(v0, delta, cfg.solver);
  // Discrete Neumann eigenvalue of the cell-centered Laplacian for cos(pi x).
  const double h = 1.0 / n;
  const double mu = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  const double factor = 1.0 / (1.0 + delta * mu);
  for (int k = 0; k < n; ++k) EXPECT_NEAR(whole(v1).values[k], factor * whole(v0).values[k], 1e-12);
  // mu_h - pi^2 is about pi^4 h^2 / 12.
  EXPECT_NEAR(factor, 1.0 / (1.0 + delta * kPi * kPi), 1.5 * delta * std::pow(kPi, 4) * h * h / 12.0);
}

TEST(Step, PiecewiseConstantsAreStationary) {
  const auto cfg = jump_config(1.0, 0.0, 1e-3, 0.01);
  const auto v0 = initial_state(cfg);
  const auto v1 = mm_step(v0, 1e-3, cfg.solver);
  EXPECT_LE(sup_distance(v0, v1), 1e-13);
  EXPECT_NEAR(jump_amplitude(pieces(v1)), 2.0, 1e-13);
}

TEST(Evolve, FrozenCrackKeepsItsJump) {
  auto cfg = jump_config(-1.0, 0.5, 1e-3, 0.1);
  cfg.snapshot_every = 25;
  const auto tr = mm_evolve(cfg);
  ASSERT_EQ(tr.monitors.size(), 101u);
  for (const auto& m : tr.monitors) EXPECT_NEAR(m.jump_min, 2.0, 1e-10) << "step " << m.i;
  EXPECT_FALSE(tr.flagged());
  EXPECT_TRUE(std::isinf(tr.T_c));
  EXPECT_EQ(tr.snapshot_steps.front(), 0);
  EXPECT_EQ(tr.snapshot_steps.back(), 100);
  EXPECT_EQ(tr.snapshots.size(), tr.snapshot_steps.size());
  for (std::size_t i = 1; i < tr.monitors.size(); ++i) {
    EXPECT_LE(tr.monitors[i].F0, tr.monitors[i - 1].F0 + 1e-12);
    EXPECT_LE(tr.monitors[i].sup_norm, tr.monitors[0].sup_norm + 1e-12);
  }
}

TEST(Evolve, ChainTracksExactHeatFlow) {
  auto cfg = jump_config(1.0, 0.5, 1e-3, 0.1);
  cfg.snapshot_every = 0;
  const auto tr = mm_evolve(cfg);
  const auto ref = heat_reference(cfg, 0.1);
  ASSERT_TRUE(ref.exact);
  EXPECT_LE(sup_distance(tr.final_state(), ref.field), 2e-3);
}

TEST(HeatReference, ExactCosineMatchesClosedForm) {
  const auto cfg = cosine_config(128, 1e-3, 0.05);
  const auto ref = heat_reference(cfg, 0.05);
  ASSERT_TRUE(ref.exact);
  for (int k = 0; k < cfg.grid.size(); ++k) {
    const double x = cfg.grid.center(k).x;
    EXPECT_NEAR(whole(ref.field).values[k], std::exp(-kPi * kPi * 0.05) * std::cos(kPi * x), 1e-14);
  }
}

TEST(HeatReference, CrankNicolsonIsSecondOrderInTime) {
  const int n = 256;
  const double t = 0.05;
  const auto cfg = cosine_config(n, 1e-3, t);
  // Semi-discrete flow of cos(pi x): the grid Laplacian eigenvalue replaces pi^2.
  const double h = 1.0 / n;
  const double mu = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  auto err = [&](double dt) {
    const auto s = crank_nicolson(cfg, t, dt);
    double e = 0.0;
    for (int k = 0; k < n; ++k) {
      const double exact = std::exp(-mu * t) * std::cos(kPi * cfg.grid.center(k).x);
      e = std::max(e, std::abs(whole(s).values[k] - exact));
    }
    return e;
  };
  const double e1 = err(1e-3);
  const double e2 = err(5e-4);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
  EXPECT_LE(sup_distance(crank_nicolson(cfg, t, 5e-4), heat_reference(cfg, t).field), 1e-4);
}

TEST(Probe, SmallStepKeepsTheCrack) {
  const auto cfg = jump_config(1.0, 0.0, 1e-3, 0.01);
  const auto probe = step_equivalence_probe(pieces(initial_state(cfg)), 1e-3, cfg.solver);
  EXPECT_TRUE(probe.equivalent);
  EXPECT_NEAR(probe.reference.jump, 1.0, 1e-15);
}

TEST(Probe, HugeStepPrefersHealing) {
  const auto cfg = jump_config(1.0, 0.0, 1e3, 1e3);
  const auto probe = step_equivalence_probe(pieces(initial_state(cfg)), 1e3, cfg.solver);
  EXPECT_FALSE(probe.equivalent);
}

TEST(TraceCsv, HeaderAndRows) {
  auto cfg = jump_config(1.0, 0.0, 1e-2, 0.05);
  cfg.snapshot_every = 0;
  const auto tr = mm_evolve(cfg);
  std::ostringstream os;
  write_trace_csv(os, tr);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("i,t,F0,sup_norm,lap_sup,jump_min\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), static_cast<long>(tr.monitors.size()) + 1);
}

TEST(Evolve, RejectsNonPositiveStep) {
  auto cfg = jump_config(1.0, 0.0, 0.0, 0.05);
  EXPECT_THROW(mm_evolve(cfg), PreconditionError);
}

}  // namespace
}  // namespace mslab::minmov
