// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one line per criterion. Usage: mslab_acceptance [--criterion N]

#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "config.hpp"
#include "mslab/calibration.hpp"
#include "mslab/functional.hpp"
#include "mslab/minmov.hpp"
#include "mslab/solver.hpp"
#include "mslab/verifier.hpp"
#include "problems.hpp"
#include "runner.hpp"

namespace {

using namespace mslab;
using mslab::testing::JumpProblem1D;
using mslab::testing::RadialProblem2D;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mslab_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string config_path(const std::string& name) {
  return std::string(MSLAB_SOURCE_DIR) + "/configs/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Eigenfunction solve and grid convergence.

double eigen_error(int cells, double beta) {
  const auto dom = mslab::testing::interval(0.0, 1.0);
  const fields::InputDatum g(fields::Preset::cosine_mode, 1.0, 1, 0.0, dom, std::nullopt);
  const auto grid = fields::GridSpec::make(dom, cells);
  const auto u = fields::solve_screened_poisson(grid, fields::whole_mask(grid), g, beta);
  const double amp = beta / (beta + kPi * kPi);
  double err = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    err = std::max(err, std::abs(u.values[k] - amp * std::cos(kPi * grid.center(k).x)));
  }
  return err;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double e256 = eigen_error(256, 100.0);
  const double e512 = eigen_error(512, 100.0);
  const double order = std::log2(e256 / e512);
  const double secs = seconds_since(t0);
  const bool pass = e512 <= 1e-3 && order >= 1.8 && order <= 2.2 && secs < 1.0;
  return {pass, "sup error N=512 " + num(e512) + " (<= 1e-3), order " + num(order) +
                    " in [1.8, 2.2], " + num(secs, 3) + " s (< 1 s)"};
}

// ---------------------------------------------------------------------------
// 2. Compatibility and maximum principle on every solve of the suite.

struct CheckTally {
  int solves = 0;
  int failed = 0;
  double worst_compat_ratio = 0.0;
  double worst_overshoot = 0.0;

  void add(const fields::SolveCheck& c) {
    ++solves;
    if (!c.pass()) ++failed;
    if (c.compat_tol > 0.0) worst_compat_ratio = std::max(worst_compat_ratio, c.compat / c.compat_tol);
    worst_overshoot = std::max(worst_overshoot, c.overshoot);
  }
  void add(const fields::ScalarField& u, const std::vector<double>& g) {
    add(fields::check_solve(u, g));
  }
  void add(const fields::PiecewiseField& u, const fields::InputDatum& g) {
    for (int i = 0; i < 2; ++i) add(u.piece(i), mslab::testing::cell_data(u.piece(i), g));
  }
};

Outcome criterion2() {
  CheckTally tally;
  // Eigenfunction solves.
  {
    const auto dom = mslab::testing::interval(0.0, 1.0);
    const fields::InputDatum g(fields::Preset::cosine_mode, 1.0, 1, 0.0, dom, std::nullopt);
    for (int n : {256, 512}) {
      const auto grid = fields::GridSpec::make(dom, n);
      const auto u = fields::solve_screened_poisson(grid, fields::whole_mask(grid), g, 100.0);
      tally.add(u, mslab::testing::cell_data(u, g));
    }
  }
  // Jump datum at the verification and crossover betas, and its crack-free solve.
  {
    const JumpProblem1D p(512);
    for (double beta : {0.1, 0.595, 100.0, 1e4}) {
      tally.add(p.solve(beta), p.g);
      const auto cf = fields::solve_screened_poisson(p.grid, fields::whole_mask(p.grid), p.g, beta);
      tally.add(cf, mslab::testing::cell_data(cf, p.g));
    }
  }
  // L2-bound and scaling data.
  {
    const JumpProblem1D p(8192, 0.25, 1.0, 0.3, 2);
    for (double beta : {10.0, 1e2, 1e3, 1e4, 1e5}) tally.add(p.solve(beta), p.g);
  }
  // 2D radial datum.
  {
    const RadialProblem2D p(128);
    tally.add(p.solve(100.0), p.g);
  }
  // Every implicit step of the evolution chain (data = previous step).
  {
    const JumpProblem1D p(512, 0.0, -1.0, 0.5, 1);
    minmov::EvolutionConfig ec{p.grid, p.iface, p.g};
    auto v = std::get<fields::PiecewiseField>(minmov::initial_state(ec));
    for (int i = 0; i < 100; ++i) {
      auto next = std::get<fields::PiecewiseField>(minmov::mm_step(v, 1e-3, ec.solver));
      for (int s = 0; s < 2; ++s) tally.add(next.piece(s), v.piece(s).values);
      v = std::move(next);
    }
  }
  const bool pass = tally.failed == 0;
  return {pass, std::to_string(tally.solves) + " solves, " + std::to_string(tally.failed) +
                    " failing; worst compat/tol " + num(tally.worst_compat_ratio) +
                    " (1e-10 |g| |Omega|), worst overshoot " + num(tally.worst_overshoot) +
                    " (1e-12)"};
}

// ---------------------------------------------------------------------------
// 3. L2 bound ||u - g||^2 <= F(g) / beta.

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const JumpProblem1D p(4096, 0.25, 1.0, 0.3, 2);
  // Continuum F(g): int (0.6 pi sin(2 pi x))^2 over (-1, 1) plus one jump point.
  const double F_cont = 0.36 * kPi * kPi + 1.0;
  const auto g_sampled = fields::sample_piecewise(p.grid, p.iface, p.g);
  bool pass = true;
  double worst = 0.0;
  for (double beta : {10.0, 1e2, 1e3, 1e4}) {
    const auto u = p.solve(beta);
    const double F_disc = functional::ms_energy(g_sampled, p.g, beta).total;
    double l2 = 0.0;
    for (int k = 0; k < p.grid.size(); ++k) {
      const int side = u.inner.mask[k] ? 0 : 1;
      const double gk = p.g.value(p.grid.center(k), side == 0 ? geometry::Side::side1
                                                              : geometry::Side::side2);
      l2 += std::pow(u.at(k) - gk, 2) * p.grid.cell_volume();
    }
    const double bound = std::min(F_disc, F_cont) / beta;
    pass = pass && l2 <= bound;
    worst = std::max(worst, l2 / bound);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 5.0;
  return {pass, "max ||u-g||^2 / (F(g)/beta) = " + num(worst) + " (<= 1) over beta 1e1..1e4, " +
                    num(secs, 3) + " s (< 5 s)"};
}

// ---------------------------------------------------------------------------
// 4. Scaling fits.

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const JumpProblem1D p(8192, 0.25, 1.0, 0.3, 2);
  const auto rep = verifier::scaling_study(p.grid, p.iface, p.g, {1e2, 1e3, 1e4, 1e5});
  double gmin = 1e300, gmax = 0.0;
  for (const auto& r : rep.rows) {
    gmin = std::min(gmin, r.grad_sup);
    gmax = std::max(gmax, r.grad_sup);
  }
  const double secs = seconds_since(t0);
  const bool pass = rep.sup_fit.slope >= -0.6 && rep.sup_fit.slope <= -0.4 && gmax / gmin <= 2.0 &&
                    rep.hess_fit.slope <= 0.6 && secs < 30.0;
  return {pass, "sup slope " + num(rep.sup_fit.slope) + " in [-0.6, -0.4], grad ratio " +
                    num(gmax / gmin) + " (<= 2), hessian slope " + num(rep.hess_fit.slope) +
                    " (<= 0.6), " + num(secs, 3) + " s (< 30 s)"};
}

// ---------------------------------------------------------------------------
// 5. Calibration identities.

// Closed form of the w profile in extended precision.
long double w_oracle(long double t, long double lambda, long double R) {
  const long double a = 4.0L * std::sqrt(lambda);
  const long double L = R / 2.0L;
  // cosh(a (L - t)) / (2 cosh(a L)) without overflow.
  return std::exp(-a * t) * (1.0L + std::exp(-2.0L * a * (L - t))) /
         (2.0L * (1.0L + std::exp(-2.0L * a * L)));
}

double jump_integral_residual(const calibration::CalibrationField& calib, const Vec2& x) {
  const auto c = calib.column(x);
  const Vec2 I = verifier::jump_integral_e(calib, x, 1025);
  const double h2 = c.h.h * c.h.h;
  const Vec2 rhs = h2 * (c.v.grad[1] / c.v.v[1]) - h2 * (c.v.grad[0] / c.v.v[0]);
  return std::hypot(I.x - rhs.x, I.y - rhs.y);
}

Outcome criterion5() {
  const JumpProblem1D p(512);
  const auto calib = calibration::calibrate(p.solve(100.0), p.g, 100.0);
  const auto& par = calib.params();

  double w_res = 0.0, w_dev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.5 * par.R * k / 1000.0;
    const auto w = calibration::w_profile(t, par.lambda, par.R);
    w_res = std::max(w_res, std::abs(w.d2w - 16.0 * par.lambda * w.w));
    w_dev = std::max(w_dev, static_cast<double>(std::abs(
                                static_cast<long double>(w.w) - w_oracle(t, par.lambda, par.R))));
  }
  double v_sum = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const Vec2 x{-1.0 + 2.0 * k / 2000.0};
    const auto v = calib.structure().v_at(x);
    v_sum = std::max(v_sum, std::abs(v.v[0] + v.v[1] - 2.0));
  }
  double jump_res = jump_integral_residual(calib, Vec2{0.0});

  const RadialProblem2D q(128);
  const auto calib2 = calibration::calibrate(q.solve(100.0), q.g, 100.0);
  for (int k = 0; k < 8; ++k) {
    const double th = 2.0 * kPi * k / 8.0 + 0.1;
    jump_res = std::max(jump_res, jump_integral_residual(calib2, Vec2{0.5 * std::cos(th), 0.5 * std::sin(th)}));
  }
  const double sep_ratio = std::min(par.slab_separation / (par.S / 2.0),
                                    calib2.params().slab_separation / (calib2.params().S / 2.0));
  const bool pass = w_res <= 1e-8 * par.lambda && w_dev <= 1e-12 && v_sum <= 1e-12 &&
                    jump_res <= 1e-8 && sep_ratio >= 1.0;
  return {pass, "w residual " + num(w_res / par.lambda) + " lambda (<= 1e-8), |w - closed form| " +
                    num(w_dev) + ", |v1+v2-2| " + num(v_sum) + " (<= 1e-12), jump integral residual " +
                    num(jump_res) + " (<= 1e-8), separation / (S/2) " + num(sep_ratio) + " (>= 1)"};
}

// ---------------------------------------------------------------------------
// 6. Full verification.

std::string condition_summary(const verifier::CalibrationReport& r) {
  std::string s;
  for (const auto& c : r.conditions) {
    s += " " + verifier::condition_name(c.id) + "=" + (c.pass ? "ok" : "FAIL") + "(" +
         num(c.worst_residual, 3) + ")";
  }
  return s;
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const JumpProblem1D p(512);
  const auto calib = calibration::calibrate(p.solve(100.0), p.g, 100.0);
  const auto r1 = verifier::verify_all(calib);
  const double s1 = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const RadialProblem2D q(128);
  const auto calib2 = calibration::calibrate(q.solve(100.0), q.g, 100.0);
  const auto r2 = verifier::verify_all(calib2, verifier::sampling_2d());
  const double s2 = seconds_since(t1);

  const bool pass = r1.pass && r2.pass && s1 < 30.0 && s2 < 30.0;
  return {pass, "1D beta=100:" + condition_summary(r1) + ", " + std::to_string(r1.samples) +
                    " samples, " + num(s1, 3) + " s | 2D radial beta=100:" + condition_summary(r2) +
                    ", " + std::to_string(r2.samples) + " samples, " + num(s2, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 7. Negative control through the command line pipeline.

Outcome criterion7() {
  auto cfg = cli::build_config(cli::read_ini(config_path("verify_1d_negative.cfg")));
  const fs::path dir = scratch_dir("negative");
  cfg.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = cli::run_config("verify", cfg, out, err);
  const std::string report = slurp(dir / "report.txt");
  const bool names_c = report.find("failed = ") != std::string::npos &&
                       report.find("c_inequality", report.find("failed = ")) != std::string::npos;
  const bool pass = code == 1 && names_c;
  return {pass, "beta=" + num(cfg.beta) + ": exit code " + std::to_string(code) +
                    " (1), report names c_inequality: " + (names_c ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 8. Energy crossover and minimality probe.

Outcome criterion8() {
  // Oracle: root of 2 sqrt(b) tanh(sqrt(b)) = 1.
  auto f = [](double b) { return 2.0 * std::sqrt(b) * std::tanh(std::sqrt(b)) - 1.0; };
  auto bracket = boost::math::tools::bisect(
      f, 0.1, 2.0, boost::math::tools::eps_tolerance<double>(50));
  const double oracle = 0.5 * (bracket.first + bracket.second);

  const JumpProblem1D p(512);
  verifier::Problem prob{p.grid, p.iface, p.g, {}, {}, {}, {}};
  const double cross = verifier::energy_crossover(prob, 0.01, 100.0);
  const double rel_nominal = std::abs(cross - 0.595) / 0.595;
  const double rel_oracle = std::abs(cross - oracle) / oracle;

  functional::CompetitorContext ctx{p.grid, p.g, 100.0, {}, p.solve(100.0)};
  const auto probe = functional::minimality_probe(ctx, {0.25, 0.5, 0.75});
  double crack_free = 0.0;
  for (const auto& e : probe.entries) {
    if (e.name == "crack_free") crack_free = e.energy.total;
  }
  const bool pass = rel_nominal <= 0.05 && rel_oracle <= 0.05 &&
                    std::abs(probe.reference.total - 1.0) <= 1e-12 &&
                    std::abs(crack_free - 20.0) <= 0.05 && probe.strict_minimizer;
  return {pass, "beta* " + num(cross, 6) + " vs oracle " + num(oracle, 6) + " (rel " +
                    num(rel_oracle, 2) + " <= 0.05); beta=100: F(u)=" +
                    num(probe.reference.total, 12) + ", crack_free " + num(crack_free, 6) +
                    ", strict minimizer " + (probe.strict_minimizer ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Minimizing movements.

struct ChainResult {
  double err = 0.0;
  double jump_dev = 0.0;
  bool clean = false;
  std::size_t probes = 0;
  int steps = 0;
};

ChainResult run_chain(double delta) {
  const JumpProblem1D p(512, 0.0, -1.0, 0.5, 1);
  minmov::EvolutionConfig ec{p.grid, p.iface, p.g};
  ec.delta = delta;
  ec.horizon = 0.1;
  ec.snapshot_every = 0;
  ec.probe_every = 1;
  const auto tr = minmov::mm_evolve(ec);
  ChainResult out;
  out.steps = static_cast<int>(tr.monitors.size()) - 1;
  const double t = tr.monitors.back().t;
  // Exact Neumann heat flow on each side: sign(x) + 0.5 exp(-pi^2 t) cos(pi x).
  const auto& v = std::get<fields::PiecewiseField>(tr.final_state());
  for (int k = 0; k < p.grid.size(); ++k) {
    const double x = p.grid.center(k).x;
    const double exact = (x < 0 ? -1.0 : 1.0) + 0.5 * std::exp(-kPi * kPi * t) * std::cos(kPi * x);
    out.err = std::max(out.err, std::abs(v.at(k) - exact));
  }
  for (const auto& m : tr.monitors) out.jump_dev = std::max(out.jump_dev, std::abs(m.jump_min - 2.0));
  out.clean = !tr.flagged() && tr.probes_ok;
  out.probes = tr.probes.size();
  return out;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = run_chain(1e-3);
  const auto b = run_chain(5e-4);
  const double order = std::log2(a.err / b.err);
  const double secs = seconds_since(t0);
  const bool every_step = a.probes == static_cast<std::size_t>(a.steps) &&
                          b.probes == static_cast<std::size_t>(b.steps);
  const bool pass = a.err <= 2.0 * 1e-3 && order >= 0.8 && order <= 1.2 &&
                    std::max(a.jump_dev, b.jump_dev) <= 1e-10 && a.clean && b.clean && every_step &&
                    secs < 20.0;
  return {pass, "sup error " + num(a.err) + " (<= 2 delta), order " + num(order) +
                    " in [0.8, 1.2], jump deviation " + num(std::max(a.jump_dev, b.jump_dev)) +
                    " (<= 1e-10), monitors and probes clean " + (a.clean && b.clean ? "yes" : "no") +
                    " over " + std::to_string(a.probes + b.probes) + " steps, " + num(secs, 3) +
                    " s (< 20 s)"};
}

// ---------------------------------------------------------------------------
// 10. Determinism of verify at one worker.

Outcome criterion10() {
  auto cfg = cli::build_config(cli::read_ini(config_path("verify_1d.cfg")));
  cfg.solver.workers = 1;
  cfg.sampling.workers = 1;
  std::vector<std::string> margins, reports;
  for (const char* name : {"det_a", "det_b"}) {
    const fs::path dir = scratch_dir(name);
    cfg.out_dir = dir.string();
    std::ostringstream out, err;
    cli::run_config("verify", cfg, out, err);
    margins.push_back(slurp(dir / "margins.csv"));
    std::string r = slurp(dir / "report.txt");
    const auto ts = r.find("timestamp = ");
    if (ts != std::string::npos) r.erase(ts, r.find('\n', ts) - ts);
    reports.push_back(r);
  }
  const bool same_margins = !margins[0].empty() && margins[0] == margins[1];
  const bool same_reports = reports[0] == reports[1];
  return {same_margins && same_reports,
          "margins.csv " + std::to_string(margins[0].size()) + " bytes identical: " +
              (same_margins ? "yes" : "no") + ", report identical modulo timestamp: " +
              (same_reports ? "yes" : "no")};
}

// Compact parameter policy at a larger beta (informational).
std::string info_compact() {
  const JumpProblem1D p(512);
  calibration::Overrides ov;
  ov.policy = calibration::Policy::compact;
  const auto calib = calibration::calibrate(p.solve(1e4), p.g, 1e4, ov);
  const auto r = verifier::verify_all(calib);
  return std::string("1D compact policy beta=1e4: ") + (r.pass ? "pass" : "fail") +
         condition_summary(r) + ", c margin off band " + num(r.c_min_off_band);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  int only = 0;
  bool info = true;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      info = false;
    } else {
      std::cerr << "usage: mslab_acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }

  int failures = 0;
  for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) {
    if (only && n != only) continue;
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << std::setw(2) << n << ": " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail << std::endl;
  }
  if (info) {
    try {
      std::cout << "info: " << info_compact() << std::endl;
    } catch (const std::exception& e) {
      std::cout << "info: compact policy run raised " << e.what() << std::endl;
    }
  }
  fs::remove_all(fs::temp_directory_path() / ("mslab_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}
