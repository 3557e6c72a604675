// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "runner.hpp"

#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "mslab/calibration.hpp"
#include "mslab/errors.hpp"
#include "mslab/functional.hpp"
#include "mslab/minmov.hpp"
#include "mslab/solver.hpp"
#include "mslab/verifier.hpp"

#ifndef MSLAB_VERSION
#define MSLAB_VERSION "unknown"
#endif

namespace mslab::cli {

namespace fs = std::filesystem;

namespace {

// Raised for unwritable outputs; maps to exit code 2.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Timings {
 public:
  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, t0);
    } else {
      auto r = f();
      record(stage, t0);
      return r;
    }
  }

  void write(std::ostream& os) const {
    os << std::setprecision(6) << std::fixed;
    double total = 0.0;
    for (const auto& [stage, s] : stages_) {
      os << stage << " = " << s << '\n';
      total += s;
    }
    os << "total = " << total << '\n';
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    stages_.emplace_back(
        stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::vector<std::pair<std::string, double>> stages_;
};

// One pipeline run: writes its artifacts into the output directory.
struct Context {
  const RunConfig& cfg;
  std::string subcommand;
  fs::path dir;
  std::ostringstream body;
  Timings timings;
  bool pass = true;
  std::string summary;

  Context(const RunConfig& c, std::string sub) : cfg(c), subcommand(std::move(sub)), dir(c.out_dir) {
    body << std::setprecision(17);
  }

  template <class F>
  void write_file(const std::string& name, F&& fill) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw OutputError("cannot write " + (dir / name).string());
    fill(os);
    if (!os) throw OutputError("write failed for " + (dir / name).string());
  }
};

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

const geometry::Interface& need_interface(const RunConfig& cfg, const std::string& sub) {
  if (!cfg.iface) {
    throw ConfigError("config", 0, "subcommand '" + sub + "' needs an [interface] section");
  }
  return *cfg.iface;
}

fields::SolverOptions evolution_solver(const RunConfig& cfg) {
  fields::SolverOptions s = cfg.solver;
  s.tol = cfg.evolution_tol;
  return s;
}

std::vector<double> cell_data(const fields::ScalarField& piece, const fields::InputDatum& g) {
  std::vector<double> out(piece.grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < piece.grid.size(); ++k) {
    if (!piece.mask[k]) continue;
    const Vec2 x = piece.grid.center(k);
    out[k] = piece.side == geometry::Side::on_interface ? g.value(x) : g.value(x, piece.side);
  }
  return out;
}

void write_piecewise_csv(std::ostream& os, const fields::PiecewiseField& u) {
  const auto& grid = u.inner.grid;
  os << (grid.dim == 1 ? "x,value\n" : "x,y,value\n") << std::setprecision(17);
  for (int k = 0; k < grid.size(); ++k) {
    const Vec2 c = grid.center(k);
    os << c.x << ',';
    if (grid.dim == 2) os << c.y << ',';
    os << u.at(k) << '\n';
  }
}

void write_state_csv(std::ostream& os, const minmov::State& s) {
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&s)) {
    write_piecewise_csv(os, *pf);
  } else {
    fields::write_field_csv(os, std::get<fields::ScalarField>(s));
  }
}

fields::PiecewiseField solve_u_beta(Context& ctx, const geometry::Interface& iface,
                                    fields::SolveStats* stats = nullptr) {
  const auto& cfg = ctx.cfg;
  return ctx.timings.time("solve", [&] {
    return fields::solve_piecewise(cfg.grid(), iface, cfg.datum(), cfg.beta, cfg.solver, stats);
  });
}

void report_check(std::ostream& os, const std::string& name, const fields::SolveCheck& c) {
  os << "\n[" << name << "]\ncompat = " << c.compat << "\ncompat_tol = " << c.compat_tol
     << "\novershoot = " << c.overshoot << "\ncompat_ok = " << yes_no(c.compat_ok)
     << "\nmax_principle_ok = " << yes_no(c.max_principle_ok) << '\n';
}

// ---------------------------------------------------------------------------
// Pipelines

void do_solve(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto grid = cfg.grid();
  const auto g = cfg.datum();
  fields::SolveStats stats;
  ctx.body << "[solve]\nbeta = " << cfg.beta << "\ncells = " << cfg.cells << '\n';
  if (cfg.iface) {
    auto u = solve_u_beta(ctx, *cfg.iface, &stats);
    ctx.body << "pieces = 2\niterations = " << stats.iterations << "\nresidual = " << stats.residual
             << "\nfloor_limited = " << yes_no(stats.floor_limited) << '\n';
    for (int i = 0; i < 2; ++i) {
      const auto check = fields::check_solve(u.piece(i), cell_data(u.piece(i), g));
      report_check(ctx.body, i == 0 ? "side1" : "side2", check);
      ctx.pass = ctx.pass && check.pass();
    }
    if (cfg.emit_fields) ctx.write_file("u.csv", [&](std::ostream& os) { write_piecewise_csv(os, u); });
  } else {
    auto u = ctx.timings.time("solve", [&] {
      return fields::solve_screened_poisson(grid, fields::whole_mask(grid), g, cfg.beta, cfg.solver,
                                            &stats);
    });
    ctx.body << "pieces = 1\niterations = " << stats.iterations << "\nresidual = " << stats.residual
             << "\nfloor_limited = " << yes_no(stats.floor_limited) << '\n';
    const auto check = fields::check_solve(u, cell_data(u, g));
    report_check(ctx.body, "whole", check);
    ctx.pass = check.pass();
    if (cfg.emit_fields) ctx.write_file("u.csv", [&](std::ostream& os) { fields::write_field_csv(os, u); });
  }
  ctx.summary = "solve";
}

void do_energy(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& iface = need_interface(cfg, "energy");
  functional::CompetitorContext cc{cfg.grid(), cfg.datum(), cfg.beta, cfg.solver,
                                   solve_u_beta(ctx, iface)};
  auto probe = ctx.timings.time("probe", [&] { return functional::minimality_probe(cc, cfg.probe_ts); });
  ctx.write_file("energies.csv", [&](std::ostream& os) { functional::write_energy_csv(os, cfg.beta, probe); });
  const auto& r = probe.reference;
  ctx.body << "[energy]\nbeta = " << cfg.beta << "\ndirichlet = " << r.dirichlet
           << "\njump = " << r.jump << "\nfidelity = " << r.fidelity << "\ntotal = " << r.total
           << '\n';
  for (const auto& e : probe.entries) {
    ctx.body << "\n[competitor." << e.name << "]\ntotal = " << e.energy.total
             << "\nmargin = " << e.margin << "\nidentical = " << yes_no(e.identical) << '\n';
  }
  ctx.body << "\n[minimality]\nstrict_minimizer = " << yes_no(probe.strict_minimizer) << '\n';
  ctx.pass = probe.strict_minimizer;
  ctx.summary = "energy";
}

calibration::CalibrationField build_calibration(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& iface = need_interface(cfg, ctx.subcommand);
  auto u = solve_u_beta(ctx, iface);
  return ctx.timings.time("calibrate", [&] {
    return calibration::calibrate(u, cfg.datum(), cfg.beta, cfg.overrides, cfg.cal_options);
  });
}

void write_structure_csv(std::ostream& os, const calibration::CalibrationField& calib,
                         const geometry::Domain& dom, int n = 401) {
  os << "x,y,d,v1,v2,h_beta,u1_ext,u2_ext\n" << std::setprecision(17);
  const auto& iface = calib.interface();
  auto row = [&](const Vec2& x) {
    const auto c = calib.column(x);
    os << x.x << ',' << x.y << ',' << c.geo.d << ',' << c.v.v[0] << ',' << c.v.v[1] << ','
       << c.h.h << ',' << c.u[0].value << ',' << c.u[1].value << '\n';
  };
  if (dom.dim == 1) {
    for (int k = 0; k < n; ++k) row(Vec2{dom.lower[0] + dom.extent(0) * k / (n - 1)});
    return;
  }
  // Along one ray from the circle center to the box boundary.
  const Vec2 dir{std::cos(0.3), std::sin(0.3)};
  const Vec2 c = iface.center();
  double t_max = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    const double da = a == 0 ? dir.x : dir.y;
    const double ca = a == 0 ? c.x : c.y;
    if (da > 0) t_max = std::min(t_max, (dom.upper[a] - ca) / da);
    if (da < 0) t_max = std::min(t_max, (dom.lower[a] - ca) / da);
  }
  const double t0 = 1e-3 * iface.radius();
  for (int k = 0; k < n; ++k) {
    const double t = t0 + (t_max - t0) * k / (n - 1);
    row(Vec2{c.x + t * dir.x, c.y + t * dir.y});
  }
}

void do_calibrate(Context& ctx) {
  auto calib = build_calibration(ctx);
  ctx.body << "[parameters]\n" << calibration::describe(calib.params());
  ctx.write_file("structure.csv",
                 [&](std::ostream& os) { write_structure_csv(os, calib, ctx.cfg.domain); });
  ctx.summary = "calibrate";
}

void do_verify(Context& ctx) {
  auto calib = build_calibration(ctx);
  auto report =
      ctx.timings.time("verify", [&] { return verifier::verify_all(calib, ctx.cfg.sampling); });
  verifier::write_report(ctx.body, report);
  ctx.write_file("margins.csv", [&](std::ostream& os) { verifier::write_margins_csv(os, report); });
  ctx.pass = report.pass;
  ctx.summary = report.pass ? "verify" : "verify failed: " + report.failed();
}

void do_scan(Context& ctx) {
  const auto& cfg = ctx.cfg;
  verifier::Problem problem{cfg.grid(), need_interface(cfg, "scan"), cfg.datum(), cfg.solver,
                            cfg.overrides,  cfg.cal_options,            cfg.sampling};
  auto res = ctx.timings.time("scan", [&] {
    return verifier::scan_beta_threshold(problem, cfg.scan_lo, cfg.scan_hi, cfg.scan_bisections);
  });
  ctx.write_file("scan.csv", [&](std::ostream& os) {
    os << "beta,pass,detail\n" << std::setprecision(17);
    for (const auto& s : res.steps) {
      os << s.beta << ',' << yes_no(s.pass) << ",\"" << s.detail << "\"\n";
    }
  });
  const bool found = std::isfinite(res.threshold);
  const bool crossing = std::isfinite(res.energy_crossover);
  ctx.body << "[scan]\nbeta_lo = " << cfg.scan_lo << "\nbeta_hi = " << cfg.scan_hi
           << "\nsteps = " << res.steps.size() << "\nthreshold = " << res.threshold
           << "\nenergy_crossover = " << res.energy_crossover << '\n';
  // A verified calibration below the crossover would contradict minimality.
  const bool consistent = !found || !crossing || res.threshold >= res.energy_crossover;
  ctx.body << "consistent = " << yes_no(consistent) << '\n';
  ctx.pass = crossing && consistent;
  ctx.summary = "scan";
}

void do_scaling(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto rep = ctx.timings.time("scaling", [&] {
    return verifier::scaling_study(cfg.grid(), cfg.iface, cfg.datum(), cfg.scaling_betas,
                                   cfg.solver);
  });
  ctx.write_file("scaling.csv", [&](std::ostream& os) { verifier::write_scaling_csv(os, rep); });
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (const auto& r : rep.rows) {
    gmin = std::min(gmin, r.grad_sup);
    gmax = std::max(gmax, r.grad_sup);
  }
  const double ratio = gmax / gmin;
  const bool sup_ok = rep.sup_fit.slope <= cfg.scaling_sup_slope_max;
  const bool grad_ok = ratio <= cfg.scaling_grad_ratio_max;
  const bool hess_ok = rep.hess_fit.slope <= cfg.scaling_hess_slope_max;
  ctx.body << "[scaling]\nsup_slope = " << rep.sup_fit.slope
           << "\nsup_fit_residual = " << rep.sup_fit.residual << "\nl2_slope = " << rep.l2_fit.slope
           << "\ngrad_slope = " << rep.grad_fit.slope << "\ngrad_ratio = " << ratio
           << "\nhess_slope = " << rep.hess_fit.slope << "\nsup_ok = " << yes_no(sup_ok)
           << "\ngrad_ok = " << yes_no(grad_ok) << "\nhess_ok = " << yes_no(hess_ok) << '\n';
  ctx.pass = sup_ok && grad_ok && hess_ok;
  ctx.summary = "scaling";
}

minmov::EvolutionConfig evolution_config(const RunConfig& cfg) {
  minmov::EvolutionConfig ec{cfg.grid(), cfg.iface, cfg.datum()};
  ec.delta = cfg.delta;
  ec.horizon = cfg.horizon;
  ec.solver = evolution_solver(cfg);
  ec.snapshot_every = cfg.snapshot_every;
  ec.probe_every = cfg.probe_every;
  ec.probe_ts = cfg.probe_ts;
  return ec;
}

void do_evolve(Context& ctx) {
  const auto ec = evolution_config(ctx.cfg);
  auto tr = ctx.timings.time("evolve", [&] { return minmov::mm_evolve(ec); });
  ctx.write_file("trace.csv", [&](std::ostream& os) { minmov::write_trace_csv(os, tr); });
  const double t_final = tr.monitors.back().t;
  auto ref = ctx.timings.time("reference", [&] { return minmov::heat_reference(ec, t_final); });
  const double err = minmov::sup_distance(tr.final_state(), ref.field);
  if (ctx.cfg.emit_fields) {
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(5) << std::setfill('0') << tr.snapshot_steps[k] << ".csv";
      ctx.write_file(name.str(), [&](std::ostream& os) { write_state_csv(os, tr.snapshots[k]); });
    }
  }
  double jmin = std::numeric_limits<double>::infinity(), jmax = 0.0;
  for (const auto& m : tr.monitors) {
    if (std::isnan(m.jump_min)) continue;
    jmin = std::min(jmin, m.jump_min);
    jmax = std::max(jmax, m.jump_min);
  }
  ctx.body << "[evolution]\ndelta = " << ec.delta << "\nT = " << ec.horizon
           << "\nsteps = " << tr.monitors.size() - 1 << "\nt_final = " << t_final
           << "\njump_floor = " << tr.jump_floor << "\nT_c = " << tr.T_c
           << "\njump_min = " << jmin << "\njump_max = " << jmax
           << "\nF0_initial = " << tr.monitors.front().F0 << "\nF0_final = " << tr.monitors.back().F0
           << "\n\n[reference]\nlabel = " << ref.label << "\nexact = " << yes_no(ref.exact)
           << "\ndt_ref = " << ref.dt_ref << "\nsup_error = " << err
           << "\nsup_error_over_delta = " << err / ec.delta << "\n\n[checks]\nmax_principle = "
           << yes_no(tr.max_principle_ok) << "\nlaplacian = " << yes_no(tr.laplacian_ok)
           << "\ndirichlet = " << yes_no(tr.dirichlet_ok) << "\nlipschitz = "
           << yes_no(tr.lipschitz_ok) << "\nprobes = " << yes_no(tr.probes_ok)
           << "\nprobe_count = " << tr.probes.size() << "\nviolations = " << tr.violations.size()
           << '\n';
  const std::size_t shown = std::min<std::size_t>(tr.violations.size(), 20);
  for (std::size_t k = 0; k < shown; ++k) ctx.body << "violation = " << tr.violations[k] << '\n';
  ctx.pass = !tr.flagged();
  ctx.summary = tr.flagged() ? "evolve flagged: " + tr.violations.front() : "evolve";
}

void do_probe(Context& ctx) {
  const auto& cfg = ctx.cfg;
  need_interface(cfg, "probe");
  const auto ec = evolution_config(cfg);
  const auto v0 = std::get<fields::PiecewiseField>(minmov::initial_state(ec));
  auto probe = ctx.timings.time("probe", [&] {
    return minmov::step_equivalence_probe(v0, cfg.delta, ec.solver, cfg.probe_ts);
  });
  ctx.write_file("probe.csv", [&](std::ostream& os) {
    os << "candidate,dirichlet,jump,distance,total,margin\n" << std::setprecision(17);
    const auto& r = probe.reference;
    os << "\"fixed_crack_step\"," << r.dirichlet << ',' << r.jump << ',' << r.fidelity << ','
       << r.total << ",0\n";
    for (const auto& e : probe.entries) {
      os << '"' << e.name << "\"," << e.energy.dirichlet << ',' << e.energy.jump << ','
         << e.energy.fidelity << ',' << e.energy.total << ',' << e.margin << '\n';
    }
  });
  ctx.body << "[probe]\ndelta = " << cfg.delta << "\nreference_total = " << probe.reference.total
           << "\ncandidates = " << probe.entries.size() << '\n';
  for (const auto& e : probe.entries) {
    ctx.body << "\n[candidate." << e.name << "]\nmargin = " << e.margin
             << "\nidentical = " << yes_no(e.identical) << '\n';
  }
  ctx.body << "\n[equivalence]\nequivalent = " << yes_no(probe.equivalent) << '\n';
  ctx.pass = probe.equivalent;
  ctx.summary = "probe";
}

void write_report(Context& ctx, int code, const std::string& error) {
  ctx.write_file("report.txt", [&](std::ostream& os) {
    os << "[run]\ntool = mslab\nversion = " << MSLAB_VERSION << "\nsubcommand = " << ctx.subcommand
       << "\nconfig = config_effective.cfg\ntimings = timings.txt\ntimestamp = " << utc_timestamp()
       << "\ncompiler = " << __VERSION__ << "\nboost = " << BOOST_LIB_VERSION
       << "\nworkers = " << ctx.cfg.solver.workers << "\n\n";
    os << ctx.body.str();
    if (!error.empty()) os << "\n[error]\nmessage = " << error << '\n';
    os << "\n[result]\npass = " << yes_no(code == kPass) << "\nexit_code = " << code << '\n';
  });
  ctx.write_file("timings.txt", [&](std::ostream& os) { ctx.timings.write(os); });
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"solve",   "energy",  "calibrate", "verify",
                                                 "scan",    "scaling", "evolve",    "probe"};
  return names;
}

void apply_flags(RunConfig& cfg, const FlagOverrides& flags) {
  if (flags.beta) {
    if (!(*flags.beta > 0.0)) throw ConfigError("--beta", 0, "must be positive");
    cfg.beta = *flags.beta;
  }
  if (flags.delta) {
    if (!(*flags.delta > 0.0)) throw ConfigError("--delta", 0, "must be positive");
    cfg.delta = *flags.delta;
  }
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.workers) {
    if (*flags.workers < 1) throw ConfigError("--workers", 0, "must be at least 1");
    cfg.solver.workers = *flags.workers;
    cfg.sampling.workers = *flags.workers;
  }
}

int run_config(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
               std::ostream& err) {
  using Pipeline = void (*)(Context&);
  static const std::map<std::string, Pipeline> pipelines = {
      {"solve", do_solve}, {"energy", do_energy}, {"calibrate", do_calibrate},
      {"verify", do_verify}, {"scan", do_scan},   {"scaling", do_scaling},
      {"evolve", do_evolve}, {"probe", do_probe}};
  auto it = pipelines.find(subcommand);
  if (it == pipelines.end()) {
    err << "mslab: unknown subcommand '" << subcommand << "'\n";
    return kUsageError;
  }

  Context ctx(cfg, subcommand);
  try {
    fs::create_directories(ctx.dir);
    ctx.write_file("config_effective.cfg", [&](std::ostream& os) { os << effective_config(cfg); });
  } catch (const std::exception& e) {
    err << "mslab: output directory '" << cfg.out_dir << "': " << e.what() << '\n';
    return kUsageError;
  }

  int code = kPass;
  std::string error;
  try {
    it->second(ctx);
    code = ctx.pass ? kPass : kChecksFailed;
  } catch (const OutputError& e) {
    err << "mslab: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    error = e.what();
    code = kUsageError;
  } catch (const InfeasibleParametersError& e) {
    error = std::string("infeasible parameters: ") + e.what();
    code = kUsageError;
  } catch (const NonConvergenceError& e) {
    std::ostringstream m;
    m << std::setprecision(17) << "solver did not converge: " << e.what()
      << " (residual " << e.residual() << " after " << e.iterations() << " iterations)";
    error = m.str();
    code = kUsageError;
  } catch (const mslab::Error& e) {
    error = e.what();
    code = kUsageError;
  }

  try {
    write_report(ctx, code, error);
  } catch (const OutputError& e) {
    err << "mslab: " << e.what() << '\n';
    return kUsageError;
  }
  if (!error.empty()) err << "mslab " << subcommand << ": " << error << '\n';
  out << (code == kPass ? "PASS " : code == kChecksFailed ? "FAIL " : "ERROR ") << ctx.summary
      << (ctx.summary.empty() ? subcommand : "") << " -> " << (ctx.dir / "report.txt").string()
      << '\n';
  return code;
}

int run(const std::string& subcommand, const std::string& config_path, const FlagOverrides& flags,
        std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = build_config(read_ini(config_path));
    apply_flags(cfg, flags);
  } catch (const ConfigError& e) {
    err << "mslab: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "mslab: " << config_path << ": " << e.what() << '\n';
    return kUsageError;
  }
  return run_config(subcommand, cfg, out, err);
}

}  // namespace mslab::cli
