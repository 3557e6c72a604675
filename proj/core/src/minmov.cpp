// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/minmov.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mslab/errors.hpp"

namespace mslab::minmov {

namespace {

// Applies fn to every piece of a state, returning the rebuilt state.
template <class Fn>
State map_pieces(const State& s, Fn&& fn) {
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&s)) {
    return fields::PiecewiseField{fn(pf->inner), fn(pf->outer), pf->iface};
  }
  return fn(std::get<fields::ScalarField>(s));
}

std::vector<const fields::ScalarField*> pieces_of(const State& s) {
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&s)) return {&pf->inner, &pf->outer};
  return {&std::get<fields::ScalarField>(s)};
}

double lap_sup(const State& s) {
  double best = 0.0;
  for (const auto* p : pieces_of(s)) {
    const auto lap = fields::discrete_laplacian(*p);
    for (int k = 0; k < p->grid.size(); ++k) {
      if (p->mask[k]) best = std::max(best, std::abs(lap[k]));
    }
  }
  return best;
}

double sup_norm(const State& s) {
  double best = 0.0;
  for (const auto* p : pieces_of(s)) best = std::max(best, p->sup_norm());
  return best;
}

functional::EnergyBreakdown f0_energy(const State& s) {
  return functional::ms_energy(s, [](int) { return 0.0; }, 0.0);
}

fields::ScalarField sample_piece(const fields::GridSpec& grid, fields::Mask mask,
                                 const std::optional<geometry::Interface>& iface,
                                 geometry::Side side,
                                 const std::function<double(const Vec2&)>& f) {
  fields::ScalarField out =
      fields::make_field(grid, std::move(mask), [&](const Vec2& x, int) { return f(x); });
  out.iface = iface;
  out.side = side;
  return out;
}

State sample_state(const EvolutionConfig& cfg,
                   const std::function<double(const Vec2&, geometry::Side)>& f) {
  if (cfg.iface) {
    fields::PiecewiseField pf{{}, {}, *cfg.iface};
    for (int i = 0; i < 2; ++i) {
      const auto side = i == 0 ? geometry::Side::side1 : geometry::Side::side2;
      pf.piece(i) = sample_piece(cfg.grid, fields::side_mask(cfg.grid, *cfg.iface, side),
                                 cfg.iface, side, [&](const Vec2& x) { return f(x, side); });
    }
    return pf;
  }
  return sample_piece(cfg.grid, fields::whole_mask(cfg.grid), std::nullopt,
                      geometry::Side::on_interface,
                      [&](const Vec2& x) { return f(x, geometry::Side::side1); });
}

}  // namespace

State initial_state(const EvolutionConfig& cfg) {
  return sample_state(cfg, [&](const Vec2& x, geometry::Side side) {
    return cfg.iface ? cfg.u0.value(x, side) : cfg.u0.value(x);
  });
}

State mm_step(const State& v_prev, double delta, const fields::SolverOptions& solver) {
  if (!(delta > 0.0)) throw PreconditionError("time step delta must be positive");
  return map_pieces(v_prev, [&](const fields::ScalarField& p) {
    return fields::solve_screened_poisson(p, 1.0 / delta, solver);
  });
}

double jump_amplitude(const fields::PiecewiseField& v, int gamma_points) {
  const auto& iface = v.iface;
  if (iface.kind() == geometry::Interface::Kind::point) {
    const Vec2 p{iface.x0(), 0.0};
    return std::abs(fields::trace(v.inner, p) - fields::trace(v.outer, p));
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < gamma_points; ++k) {
    const double th = 2.0 * std::numbers::pi * k / gamma_points;
    const Vec2 p = iface.center() + iface.radius() * Vec2{std::cos(th), std::sin(th)};
    best = std::min(best, std::abs(fields::trace(v.inner, p) - fields::trace(v.outer, p)));
  }
  return best;
}

double sup_distance(const State& a, const State& b) {
  const auto pa = pieces_of(a);
  const auto pb = pieces_of(b);
  const auto& grid = pa.front()->grid;
  double best = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    double va = std::numeric_limits<double>::quiet_NaN();
    double vb = va;
    for (const auto* p : pa) {
      if (p->mask[k]) va = p->values[k];
    }
    for (const auto* p : pb) {
      if (p->mask[k]) vb = p->values[k];
    }
    if (std::isnan(va) || std::isnan(vb)) {
      if (std::isnan(va) != std::isnan(vb)) throw PreconditionError("states on different masks");
      continue;
    }
    best = std::max(best, std::abs(va - vb));
  }
  return best;
}

StepProbe step_equivalence_probe(const fields::PiecewiseField& v_prev, double delta,
                                 const fields::SolverOptions& solver,
                                 const std::vector<double>& ts) {
  StepProbe out;
  const auto fixed = std::get<fields::PiecewiseField>(mm_step(v_prev, delta, solver));
  const auto& grid = v_prev.inner.grid;
  std::vector<double> rhs(grid.size());
  for (int k = 0; k < grid.size(); ++k) rhs[k] = v_prev.at(k);
  const auto crack_free =
      fields::solve_screened_poisson(grid, fields::whole_mask(grid), rhs, 1.0 / delta, solver);

  const functional::Candidate ref = fixed;
  out.reference = functional::incremental_energy(ref, v_prev, delta);
  auto add = [&](const std::string& name, const functional::Candidate& c) {
    functional::ProbeEntry e;
    e.name = name;
    e.energy = functional::incremental_energy(c, v_prev, delta);
    e.margin = e.energy.total - out.reference.total;
    e.identical = functional::coincident(c, ref);
    out.entries.push_back(e);
  };
  add("crack_free_step", crack_free);
  add("v_prev", v_prev);
  for (double t : ts) {
    std::ostringstream name;
    name << "jump_scaled(" << t << ")";
    add(name.str(), functional::blend(fixed, crack_free, t));
  }
  const double round = 1e-12 * std::max(1.0, std::abs(out.reference.total));
  out.equivalent = true;
  for (const auto& e : out.entries) {
    const bool ok = e.identical ? std::abs(e.margin) <= round : e.margin > round;
    out.equivalent = out.equivalent && ok;
  }
  return out;
}

EvolutionTrace mm_evolve(const EvolutionConfig& cfg) {
  if (!(cfg.delta > 0.0) || !(cfg.horizon > 0.0)) {
    throw PreconditionError("evolution needs delta > 0 and T > 0");
  }
  if (cfg.delta > cfg.horizon) throw PreconditionError("evolution needs delta <= T");
  const int steps = static_cast<int>(std::ceil(cfg.horizon / cfg.delta - 1e-9));

  EvolutionTrace tr;
  if (cfg.iface && cfg.u0.has_jump()) tr.jump_floor = cfg.u0.jump_inf();

  auto monitor = [&](int i, const State& v, const State* prev) {
    StepMonitor m;
    m.i = i;
    m.t = i * cfg.delta;
    const auto e = f0_energy(v);
    m.F0 = e.total;
    m.dirichlet = e.dirichlet;
    m.sup_norm = sup_norm(v);
    m.lap_sup = lap_sup(v);
    if (const auto* pf = std::get_if<fields::PiecewiseField>(&v)) m.jump_min = jump_amplitude(*pf);
    if (prev) m.increment = sup_distance(v, *prev);
    return m;
  };
  auto keep = [&](int i, const State& v) {
    const bool wanted = i == 0 || i == steps || (cfg.snapshot_every > 0 && i % cfg.snapshot_every == 0);
    if (wanted) {
      tr.snapshot_steps.push_back(i);
      tr.snapshots.push_back(v);
    }
  };
  auto flag = [&](bool& ok, const std::string& what, int i, double lhs, double rhs) {
    if (ok) {
      std::ostringstream m;
      m << std::setprecision(17) << what << " violated at step " << i << ": " << lhs << " > "
        << rhs;
      tr.violations.push_back(m.str());
    }
    ok = false;
  };

  const State v0 = initial_state(cfg);
  State v = v0;
  tr.monitors.push_back(monitor(0, v, nullptr));
  keep(0, v);
  const double lap0 = tr.monitors.front().lap_sup;
  for (int i = 1; i <= steps; ++i) {
    if (cfg.probe_every > 0 && i % cfg.probe_every == 0) {
      if (const auto* pf = std::get_if<fields::PiecewiseField>(&v)) {
        StepProbe pr = step_equivalence_probe(*pf, cfg.delta, cfg.solver, cfg.probe_ts);
        pr.i = i;
        if (!pr.equivalent && tr.probes_ok) {
          tr.violations.push_back("step_equivalence_probe failed at step " + std::to_string(i));
          tr.probes_ok = false;
        }
        tr.probes.push_back(std::move(pr));
      }
    }
    State next = mm_step(v, cfg.delta, cfg.solver);
    const StepMonitor m = monitor(i, next, &v);
    const StepMonitor& pm = tr.monitors.back();
    if (m.sup_norm > pm.sup_norm + 1e-12) {
      flag(tr.max_principle_ok, "maximum principle", i, m.sup_norm, pm.sup_norm + 1e-12);
    }
    if (m.lap_sup > pm.lap_sup + 1e-10) {
      flag(tr.laplacian_ok, "Laplacian monotonicity", i, m.lap_sup, pm.lap_sup + 1e-10);
    }
    if (m.dirichlet > pm.dirichlet * (1.0 + 1e-12) + 1e-300) {
      flag(tr.dirichlet_ok, "Dirichlet monotonicity", i, m.dirichlet, pm.dirichlet);
    }
    const double from0 = sup_distance(next, v0);
    if (m.increment > lap0 * cfg.delta + 1e-8) {
      flag(tr.lipschitz_ok, "time Lipschitz bound", i, m.increment, lap0 * cfg.delta + 1e-8);
    }
    if (from0 > lap0 * m.t + 1e-8) {
      flag(tr.lipschitz_ok, "time Lipschitz bound from u0", i, from0, lap0 * m.t + 1e-8);
    }
    if (tr.jump_floor > 0.0 && std::isinf(tr.T_c) && m.jump_min < 0.5 * tr.jump_floor) {
      tr.T_c = m.t;
    }
    tr.monitors.push_back(m);
    v = std::move(next);
    keep(i, v);
  }
  return tr;
}

State crank_nicolson(const EvolutionConfig& cfg, double t, double dt_ref) {
  if (!(dt_ref > 0.0)) throw PreconditionError("reference step must be positive");
  State u = initial_state(cfg);
  if (t <= 0.0) return u;
  const int n = static_cast<int>(std::ceil(t / dt_ref - 1e-9));
  const double dt = t / n;
  for (int s = 0; s < n; ++s) {
    u = map_pieces(u, [&](const fields::ScalarField& p) {
      // (I - dt/2 Lap) u+ = (I + dt/2 Lap) u, i.e. beta = 2/dt and
      // g = u + (dt/2) Lap u.
      const auto lap = fields::discrete_laplacian(p);
      fields::ScalarField g = p;
      for (int k = 0; k < p.grid.size(); ++k) {
        if (p.mask[k]) g.values[k] = p.values[k] + 0.5 * dt * lap[k];
      }
      return fields::solve_screened_poisson(g, 2.0 / dt, cfg.solver);
    });
  }
  return u;
}

HeatReference heat_reference(const EvolutionConfig& cfg, double t, double dt_ref) {
  if (cfg.u0.heat_closed_form()) {
    return HeatReference{sample_state(cfg,
                                      [&](const Vec2& x, geometry::Side side) {
                                        return cfg.u0.heat_value(
                                            x, cfg.iface ? side : geometry::Side::side1, t);
                                      }),
                         true, 0.0, "exact per-side eigenfunction series"};
  }
  const double dt = dt_ref > 0.0 ? dt_ref : cfg.delta / 64.0;
  std::ostringstream label;
  label << std::setprecision(6) << "Crank-Nicolson reference, dt_ref = " << dt;
  return HeatReference{crank_nicolson(cfg, t, dt), false, dt, label.str()};
}

void write_trace_csv(std::ostream& os, const EvolutionTrace& tr) {
  os << "i,t,F0,sup_norm,lap_sup,jump_min\n" << std::setprecision(17);
  for (const auto& m : tr.monitors) {
    os << m.i << ',' << m.t << ',' << m.F0 << ',' << m.sup_norm << ',' << m.lap_sup << ',';
    if (std::isnan(m.jump_min)) {
      os << "nan";
    } else {
      os << m.jump_min;
    }
    os << '\n';
  }
}

}  // namespace mslab::minmov
