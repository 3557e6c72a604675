// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/functional.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mslab/errors.hpp"

namespace mslab::functional {

namespace {

// Sum over faces joining two masked cells of (difference / h)^2, times the
// cell volume.
double dirichlet_of(const fields::ScalarField& u) {
  const auto& g = u.grid;
  const double vol = g.cell_volume();
  double s = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    if (!u.mask[k]) continue;
    const int i = g.ix(k);
    const int j = g.iy(k);
    if (i + 1 < g.n[0]) {
      const int q = g.index(i + 1, j);
      if (u.mask[q]) {
        const double d = (u.values[q] - u.values[k]) / g.h[0];
        s += d * d * vol;
      }
    }
    if (g.dim == 2 && j + 1 < g.n[1]) {
      const int q = g.index(i, j + 1);
      if (u.mask[q]) {
        const double d = (u.values[q] - u.values[k]) / g.h[1];
        s += d * d * vol;
      }
    }
  }
  return s;
}

double fidelity_of(const fields::ScalarField& u, const std::function<double(int)>& g_at) {
  const double vol = u.grid.cell_volume();
  double s = 0.0;
  for (int k = 0; k < u.grid.size(); ++k) {
    if (!u.mask[k]) continue;
    const double d = u.values[k] - g_at(k);
    s += d * d * vol;
  }
  return s;
}

const fields::GridSpec& grid_of(const Candidate& c) {
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&c)) return pf->inner.grid;
  return std::get<fields::ScalarField>(c).grid;
}

double value_at(const Candidate& c, int k) {
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&c)) return pf->at(k);
  return std::get<fields::ScalarField>(c).values[k];
}

}  // namespace

EnergyBreakdown ms_energy(const Candidate& u, const std::function<double(int)>& g_at_cell,
                          double beta) {
  if (!(beta >= 0.0)) throw PreconditionError("energy needs beta >= 0");
  EnergyBreakdown e;
  if (const auto* pf = std::get_if<fields::PiecewiseField>(&u)) {
    if (!(pf->inner.grid == pf->outer.grid)) throw PreconditionError("mismatched grids");
    e.dirichlet = dirichlet_of(pf->inner) + dirichlet_of(pf->outer);
    e.fidelity = beta > 0.0 ? beta * (fidelity_of(pf->inner, g_at_cell) +
                                      fidelity_of(pf->outer, g_at_cell))
                            : 0.0;
    e.jump = geometry::interface_measure(pf->iface);
  } else {
    const auto& w = std::get<fields::ScalarField>(u);
    e.dirichlet = dirichlet_of(w);
    e.fidelity = beta > 0.0 ? beta * fidelity_of(w, g_at_cell) : 0.0;
    e.jump = 0.0;
  }
  e.total = e.dirichlet + e.jump + e.fidelity;
  return e;
}

EnergyBreakdown ms_energy(const Candidate& u, const fields::InputDatum& g, double beta) {
  const auto& grid = grid_of(u);
  if (grid.dim != g.domain().dim) throw PreconditionError("candidate and datum dimensions differ");
  return ms_energy(
      u, [&](int k) { return g.value(grid.center(k)); }, beta);
}

EnergyBreakdown incremental_energy(const Candidate& z, const fields::PiecewiseField& v_prev,
                                   double delta) {
  if (!(delta > 0.0)) throw PreconditionError("incremental energy needs delta > 0");
  if (!(grid_of(z) == v_prev.inner.grid)) throw PreconditionError("mismatched grids");
  return ms_energy(
      z, [&](int k) { return v_prev.at(k); }, 1.0 / delta);
}

fields::PiecewiseField blend(const fields::PiecewiseField& a, const fields::ScalarField& b,
                             double t) {
  if (!(a.inner.grid == b.grid)) throw PreconditionError("mismatched grids");
  fields::PiecewiseField out = a;
  for (int i = 0; i < 2; ++i) {
    auto& piece = out.piece(i);
    for (int k = 0; k < piece.grid.size(); ++k) {
      if (piece.mask[k]) piece.values[k] = t * a.piece(i).values[k] + (1.0 - t) * b.values[k];
    }
  }
  return out;
}

Candidate make_competitor(CompetitorKind kind, double param, const CompetitorContext& ctx) {
  const auto& iface = ctx.u_beta.iface;
  switch (kind) {
    case CompetitorKind::crack_free: {
      auto cf = fields::solve_screened_poisson(ctx.grid, fields::whole_mask(ctx.grid), ctx.g,
                                               ctx.beta, ctx.solver);
      return cf;
    }
    case CompetitorKind::input_datum:
      return fields::sample_piecewise(ctx.grid, iface, ctx.g);
    case CompetitorKind::jump_scaled: {
      if (!(param >= 0.0 && param <= 1.0)) {
        throw PreconditionError("jump_scaled needs t in [0, 1]");
      }
      if (param == 1.0) return ctx.u_beta;
      auto cf = std::get<fields::ScalarField>(make_competitor(CompetitorKind::crack_free, 0, ctx));
      if (param == 0.0) return cf;
      return blend(ctx.u_beta, cf, param);
    }
    case CompetitorKind::shifted_interface: {
      const geometry::Interface moved = iface.shifted(param);
      fields::PiecewiseField pf{fields::ScalarField{}, fields::ScalarField{}, moved};
      for (int i = 0; i < 2; ++i) {
        const auto side = i == 0 ? geometry::Side::side1 : geometry::Side::side2;
        auto piece = fields::solve_screened_poisson(
            ctx.grid, fields::side_mask(ctx.grid, moved, side), ctx.g, ctx.beta, ctx.solver);
        piece.iface = moved;
        piece.side = side;
        pf.piece(i) = std::move(piece);
      }
      return pf;
    }
  }
  throw PreconditionError("unknown competitor kind");
}

bool coincident(const Candidate& a, const Candidate& b, double tol) {
  const auto& ga = grid_of(a);
  if (!(ga == grid_of(b))) return false;
  const bool pa = std::holds_alternative<fields::PiecewiseField>(a);
  const bool pb = std::holds_alternative<fields::PiecewiseField>(b);
  if (pa != pb) return false;
  for (int k = 0; k < ga.size(); ++k) {
    if (std::abs(value_at(a, k) - value_at(b, k)) > tol) return false;
  }
  return true;
}

MinimalityProbe minimality_probe(const CompetitorContext& ctx, const std::vector<double>& ts) {
  MinimalityProbe out;
  const Candidate ref = ctx.u_beta;
  out.reference = ms_energy(ref, ctx.g, ctx.beta);
  auto add = [&](const std::string& name, const Candidate& c) {
    ProbeEntry e;
    e.name = name;
    e.energy = ms_energy(c, ctx.g, ctx.beta);
    e.margin = e.energy.total - out.reference.total;
    e.identical = coincident(c, ref);
    out.entries.push_back(e);
  };
  const Candidate cf = make_competitor(CompetitorKind::crack_free, 0.0, ctx);
  add("crack_free", cf);
  add("input_datum", make_competitor(CompetitorKind::input_datum, 0.0, ctx));
  for (double t : ts) {
    std::ostringstream name;
    name << "jump_scaled(" << t << ")";
    if (t == 0.0) {
      add(name.str(), cf);
    } else {
      add(name.str(), blend(ctx.u_beta, std::get<fields::ScalarField>(cf), t));
    }
  }
  out.strict_minimizer = true;
  const double round = 1e-12 * std::max(1.0, std::abs(out.reference.total));
  for (const auto& e : out.entries) {
    const bool ok = e.identical ? std::abs(e.margin) <= round : e.margin > round;
    out.strict_minimizer = out.strict_minimizer && ok;
  }
  return out;
}

void write_energy_csv(std::ostream& os, double beta, const MinimalityProbe& probe) {
  os << "candidate,beta,dirichlet,jump,fidelity,total\n" << std::setprecision(17);
  auto row = [&](const std::string& name, const EnergyBreakdown& e) {
    os << '"' << name << "\"," << beta << ',' << e.dirichlet << ',' << e.jump << ','
       << e.fidelity << ',' << e.total << '\n';
  };
  row("u_beta", probe.reference);
  for (const auto& e : probe.entries) row(e.name, e.energy);
}

}  // namespace mslab::functional
