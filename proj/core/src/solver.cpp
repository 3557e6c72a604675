// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "mslab/errors.hpp"
#include "mslab/parallel.hpp"

namespace mslab::fields {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Compressed operator on the active cells of a mask.
struct MaskedOperator {
  std::vector<int> cells;         // grid index of each unknown
  std::vector<int> nb;            // 4 neighbour slots per unknown, -1 when absent
  std::vector<double> nb_weight;  // 1/h^2 of the slot's axis
  std::vector<double> lap_diag;   // sum of present neighbour weights

  MaskedOperator(const GridSpec& grid, const Mask& mask) {
    std::vector<int> pos(grid.size(), -1);
    for (int k = 0; k < grid.size(); ++k) {
      if (mask[k]) {
        pos[k] = static_cast<int>(cells.size());
        cells.push_back(k);
      }
    }
    const int n = static_cast<int>(cells.size());
    nb.assign(4 * n, -1);
    nb_weight.assign(4 * n, 0.0);
    lap_diag.assign(n, 0.0);
    const double wx = 1.0 / (grid.h[0] * grid.h[0]);
    const double wy = 1.0 / (grid.h[1] * grid.h[1]);
    for (int c = 0; c < n; ++c) {
      const int i = grid.ix(cells[c]);
      const int j = grid.iy(cells[c]);
      const int cand[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (int s = 0; s < (grid.dim == 2 ? 4 : 2); ++s) {
        const int ci = cand[s][0];
        const int cj = cand[s][1];
        if (ci < 0 || ci >= grid.n[0] || cj < 0 || cj >= grid.n[1]) continue;
        const int q = pos[grid.index(ci, cj)];
        if (q < 0) continue;
        nb[4 * c + s] = q;
        nb_weight[4 * c + s] = s < 2 ? wx : wy;
        lap_diag[c] += nb_weight[4 * c + s];
      }
    }
  }

  int size() const { return static_cast<int>(cells.size()); }

  // y = (beta - Lap_h) x
  void apply(double beta, const std::vector<double>& x, std::vector<double>& y,
             int workers) const {
    parallel_chunks(size(), workers, [&](int b, int e) {
      for (int c = b; c < e; ++c) {
        double acc = (beta + lap_diag[c]) * x[c];
        for (int s = 0; s < 4; ++s) {
          const int q = nb[4 * c + s];
          if (q >= 0) acc -= nb_weight[4 * c + s] * x[q];
        }
        y[c] = acc;
      }
    });
  }
};

double inf_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

ScalarField make_masked(const GridSpec& grid, const Mask& mask) {
  ScalarField out;
  out.grid = grid;
  out.mask = mask;
  out.values.assign(grid.size(), kNaN);
  return out;
}

}  // namespace

ScalarField solve_screened_poisson(const GridSpec& grid, const Mask& mask,
                                   const std::vector<double>& rhs_g, double beta,
                                   const SolverOptions& opts, SolveStats* stats) {
  if (!(beta > 0.0)) throw PreconditionError("screened Poisson solve needs beta > 0");
  if (static_cast<int>(mask.size()) != grid.size() ||
      static_cast<int>(rhs_g.size()) != grid.size()) {
    throw PreconditionError("mask and datum must match the grid size");
  }
  if (!face_connected(grid, mask)) {
    throw PreconditionError("solve mask must be nonempty and face-connected");
  }
  const MaskedOperator op(grid, mask);
  const int n = op.size();
  std::vector<double> g(n);
  for (int c = 0; c < n; ++c) g[c] = rhs_g[op.cells[c]];
  const double gnorm = inf_norm(g);
  ScalarField out = make_masked(grid, mask);
  SolveStats local;
  if (gnorm == 0.0) {
    for (int c = 0; c < n; ++c) out.values[op.cells[c]] = 0.0;
    if (stats) *stats = local;
    return out;
  }
  // Rounding floor of the computed residual: the Laplacian rows cancel terms
  // of size 4 dim |u| / h^2, so tol * beta * |g| is unattainable for small
  // beta on fine grids. Below the floor the floor is the target.
  double stiff = beta;
  for (int k = 0; k < grid.dim; ++k) stiff += 4.0 / (grid.h[k] * grid.h[k]);
  const double floor = 2.0 * std::numeric_limits<double>::epsilon() * stiff * gnorm;
  const double target = std::max(opts.tol * beta * gnorm, floor);
  local.floor_limited = floor > opts.tol * beta * gnorm;
  const int cap = opts.max_iter > 0 ? opts.max_iter : 50 * grid.max_cells();

  std::vector<double> x = g;
  std::vector<double> r(n), z(n), p(n), ap(n);
  std::vector<double> inv_diag(n, 1.0);
  if (opts.jacobi) {
    for (int c = 0; c < n; ++c) inv_diag[c] = 1.0 / (beta + op.lap_diag[c]);
  }
  auto true_residual = [&] {
    op.apply(beta, x, ap, opts.workers);
    for (int c = 0; c < n; ++c) r[c] = beta * g[c] - ap[c];
    return inf_norm(r);
  };

  double res = true_residual();
  int it = 0;
  while (res > target) {
    // (Re)start the recurrence from the true residual.
    for (int c = 0; c < n; ++c) z[c] = inv_diag[c] * r[c];
    p = z;
    double rz = dot(r, z);
    bool restart = false;
    while (!restart) {
      if (it >= cap) {
        throw NonConvergenceError("conjugate gradient reached its cap of " +
                                      std::to_string(cap) + " iterations with residual " +
                                      std::to_string(res),
                                  res, it);
      }
      op.apply(beta, p, ap, opts.workers);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      for (int c = 0; c < n; ++c) {
        x[c] += alpha * p[c];
        r[c] -= alpha * ap[c];
      }
      ++it;
      const double rec = inf_norm(r);
      if (rec <= 0.5 * target) {
        restart = true;
        break;
      }
      for (int c = 0; c < n; ++c) z[c] = inv_diag[c] * r[c];
      const double rz_new = dot(r, z);
      const double b = rz_new / rz;
      rz = rz_new;
      for (int c = 0; c < n; ++c) p[c] = z[c] + b * p[c];
    }
    res = true_residual();
    if (!restart && res > target && it >= cap) {
      throw NonConvergenceError("conjugate gradient stalled with residual " + std::to_string(res),
                                res, it);
    }
  }
  local.iterations = it;
  local.residual = res;
  for (int c = 0; c < n; ++c) out.values[op.cells[c]] = x[c];
  if (stats) *stats = local;
  return out;
}

ScalarField solve_screened_poisson(const GridSpec& grid, const Mask& mask, const InputDatum& g,
                                   double beta, const SolverOptions& opts, SolveStats* stats) {
  std::vector<double> rhs(grid.size(), 0.0);
  for (int k = 0; k < grid.size(); ++k) {
    if (mask[k]) rhs[k] = g.value(grid.center(k));
  }
  return solve_screened_poisson(grid, mask, rhs, beta, opts, stats);
}

ScalarField solve_screened_poisson(const ScalarField& g, double beta, const SolverOptions& opts,
                                   SolveStats* stats) {
  std::vector<double> rhs(g.grid.size(), 0.0);
  for (int k = 0; k < g.grid.size(); ++k) {
    if (g.mask[k]) rhs[k] = g.values[k];
  }
  ScalarField out = solve_screened_poisson(g.grid, g.mask, rhs, beta, opts, stats);
  out.iface = g.iface;
  out.side = g.side;
  return out;
}

PiecewiseField solve_piecewise(const GridSpec& grid, const geometry::Interface& iface,
                               const InputDatum& g, double beta, const SolverOptions& opts,
                               SolveStats* stats) {
  PiecewiseField pf{ScalarField{}, ScalarField{}, iface};
  SolveStats worst;
  for (int i = 0; i < 2; ++i) {
    const auto side = i == 0 ? geometry::Side::side1 : geometry::Side::side2;
    const Mask mask = side_mask(grid, iface, side);
    std::vector<double> rhs(grid.size(), 0.0);
    for (int k = 0; k < grid.size(); ++k) {
      if (mask[k]) rhs[k] = g.value(grid.center(k), side);
    }
    SolveStats st;
    ScalarField piece = solve_screened_poisson(grid, mask, rhs, beta, opts, &st);
    piece.iface = iface;
    piece.side = side;
    pf.piece(i) = std::move(piece);
    worst.iterations += st.iterations;
    worst.residual = std::max(worst.residual, st.residual);
    worst.floor_limited = worst.floor_limited || st.floor_limited;
  }
  if (stats) *stats = worst;
  return pf;
}

PiecewiseField sample_piecewise(const GridSpec& grid, const geometry::Interface& iface,
                                const InputDatum& g) {
  PiecewiseField pf{ScalarField{}, ScalarField{}, iface};
  for (int i = 0; i < 2; ++i) {
    const auto side = i == 0 ? geometry::Side::side1 : geometry::Side::side2;
    ScalarField piece = make_field(grid, side_mask(grid, iface, side),
                                   [&](const Vec2& x, int) { return g.value(x, side); });
    piece.iface = iface;
    piece.side = side;
    pf.piece(i) = std::move(piece);
  }
  return pf;
}

SolveCheck check_solve(const ScalarField& u, const std::vector<double>& g) {
  SolveCheck out;
  double sum = 0.0, g_sup = 0.0, volume = 0.0;
  double g_min = std::numeric_limits<double>::infinity(), g_max = -g_min;
  const double cell = u.grid.cell_volume();
  for (int k = 0; k < u.grid.size(); ++k) {
    if (!u.mask[k]) continue;
    sum += (u.values[k] - g[k]) * cell;
    volume += cell;
    g_sup = std::max(g_sup, std::abs(g[k]));
    g_min = std::min(g_min, g[k]);
    g_max = std::max(g_max, g[k]);
  }
  for (int k = 0; k < u.grid.size(); ++k) {
    if (!u.mask[k]) continue;
    out.overshoot = std::max({out.overshoot, u.values[k] - g_max, g_min - u.values[k]});
  }
  out.compat = std::abs(sum);
  out.compat_tol = 1e-10 * g_sup * volume;
  out.compat_ok = out.compat <= out.compat_tol;
  out.max_principle_ok = out.overshoot <= 1e-12 * std::max(1.0, g_sup);
  return out;
}

std::vector<double> discrete_laplacian(const ScalarField& u) {
  const MaskedOperator op(u.grid, u.mask);
  std::vector<double> x(op.size()), y(op.size());
  for (int c = 0; c < op.size(); ++c) x[c] = u.values[op.cells[c]];
  op.apply(0.0, x, y, 1);
  std::vector<double> out(u.grid.size(), kNaN);
  for (int c = 0; c < op.size(); ++c) out[op.cells[c]] = -y[c];
  return out;
}

std::vector<double> screened_residual(const ScalarField& u, const std::vector<double>& g,
                                      double beta) {
  std::vector<double> lap = discrete_laplacian(u);
  std::vector<double> out(u.grid.size(), kNaN);
  for (int k = 0; k < u.grid.size(); ++k) {
    if (u.mask[k]) out[k] = beta * u.values[k] - lap[k] - beta * g[k];
  }
  return out;
}

namespace {

// First derivative along one axis using only masked cells.
std::vector<double> axis_derivative(const GridSpec& grid, const Mask& mask,
                                    const std::vector<double>& v, int axis) {
  std::vector<double> out(grid.size(), kNaN);
  const double h = grid.h[axis];
  auto in = [&](int i, int j) {
    if (i < 0 || i >= grid.n[0] || j < 0 || j >= grid.n[1]) return false;
    return mask[grid.index(i, j)] != 0;
  };
  for (int k = 0; k < grid.size(); ++k) {
    if (!mask[k]) continue;
    const int i = grid.ix(k);
    const int j = grid.iy(k);
    const int di = axis == 0 ? 1 : 0;
    const int dj = axis == 1 ? 1 : 0;
    auto val = [&](int s) { return v[grid.index(i + s * di, j + s * dj)]; };
    auto has = [&](int s) { return in(i + s * di, j + s * dj); };
    if (has(-1) && has(1)) {
      out[k] = (val(1) - val(-1)) / (2.0 * h);
    } else if (has(1) && has(2)) {
      out[k] = (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
    } else if (has(-1) && has(-2)) {
      out[k] = (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
    } else {
      throw PreconditionError("mask too thin to differentiate: fewer than 3 cells across at cell " +
                              std::to_string(k) + " along axis " + std::to_string(axis));
    }
  }
  return out;
}

}  // namespace

Derivatives differentiate(const ScalarField& u) {
  const GridSpec& g = u.grid;
  Derivatives d;
  d.grad.assign(g.size(), Vec2{kNaN, kNaN});
  d.hess.assign(g.size(), Sym2{kNaN, kNaN, kNaN});
  const auto gx = axis_derivative(g, u.mask, u.values, 0);
  const auto hxx = axis_derivative(g, u.mask, gx, 0);
  if (g.dim == 1) {
    for (int k = 0; k < g.size(); ++k) {
      if (!u.mask[k]) continue;
      d.grad[k] = Vec2{gx[k], 0.0};
      d.hess[k] = Sym2{hxx[k], 0.0, 0.0};
    }
    return d;
  }
  const auto gy = axis_derivative(g, u.mask, u.values, 1);
  const auto hyy = axis_derivative(g, u.mask, gy, 1);
  const auto hxy = axis_derivative(g, u.mask, gx, 1);
  const auto hyx = axis_derivative(g, u.mask, gy, 0);
  for (int k = 0; k < g.size(); ++k) {
    if (!u.mask[k]) continue;
    d.grad[k] = Vec2{gx[k], gy[k]};
    d.hess[k] = Sym2{hxx[k], 0.5 * (hxy[k] + hyx[k]), hyy[k]};
  }
  return d;
}

namespace {

void check_side(const ScalarField& u, const Vec2& x) {
  if (!u.iface || u.side == geometry::Side::on_interface) return;
  const auto s = geometry::classify(x, *u.iface);
  if (s != geometry::Side::on_interface && s != u.side) {
    throw SideMismatchError("sample point lies on the other side of the interface");
  }
}

double sample_1d(const ScalarField& u, const Vec2& x) {
  const GridSpec& g = u.grid;
  const double xi = (x.x - g.lower[0]) / g.h[0] - 0.5;
  const int i0 = static_cast<int>(std::floor(xi));
  auto in = [&](int i) { return i >= 0 && i < g.n[0] && u.mask[i]; };
  if (in(i0) && in(i0 + 1)) {
    const double t = xi - i0;
    return (1.0 - t) * u.values[i0] + t * u.values[i0 + 1];
  }
  // Near the end of the mask: quadratic through the last three cells.
  int c = static_cast<int>(std::lround(xi));
  c = std::clamp(c, 0, g.n[0] - 1);
  if (!in(c)) {
    if (in(c - 1)) {
      c -= 1;
    } else if (in(c + 1)) {
      c += 1;
    } else {
      throw PreconditionError("sample point outside the field's mask hull");
    }
  }
  const int dir = in(c + 1) ? 1 : -1;
  if (!in(c + dir) || !in(c + 2 * dir)) {
    throw PreconditionError("mask too thin for one-sided extrapolation");
  }
  const double t = (xi - c) * dir;  // in cell units along dir
  const double f0 = u.values[c];
  const double f1 = u.values[c + dir];
  const double f2 = u.values[c + 2 * dir];
  return f0 * (t - 1.0) * (t - 2.0) / 2.0 - f1 * t * (t - 2.0) + f2 * t * (t - 1.0) / 2.0;
}

double sample_2d(const ScalarField& u, const Vec2& x) {
  const GridSpec& g = u.grid;
  const double xi = (x.x - g.lower[0]) / g.h[0] - 0.5;
  const double eta = (x.y - g.lower[1]) / g.h[1] - 0.5;
  const int i0 = static_cast<int>(std::floor(xi));
  const int j0 = static_cast<int>(std::floor(eta));
  auto in = [&](int i, int j) {
    return i >= 0 && i < g.n[0] && j >= 0 && j < g.n[1] && u.mask[g.index(i, j)];
  };
  if (in(i0, j0) && in(i0 + 1, j0) && in(i0, j0 + 1) && in(i0 + 1, j0 + 1)) {
    const double s = xi - i0;
    const double t = eta - j0;
    return (1 - s) * (1 - t) * u.values[g.index(i0, j0)] +
           s * (1 - t) * u.values[g.index(i0 + 1, j0)] +
           (1 - s) * t * u.values[g.index(i0, j0 + 1)] + s * t * u.values[g.index(i0 + 1, j0 + 1)];
  }
  // Least-squares quadratic over masked cells of a 5x5 window.
  const int ic = std::clamp(static_cast<int>(std::lround(xi)), 0, g.n[0] - 1);
  const int jc = std::clamp(static_cast<int>(std::lround(eta)), 0, g.n[1] - 1);
  std::vector<std::array<double, 3>> pts;
  for (int dj = -2; dj <= 2; ++dj) {
    for (int di = -2; di <= 2; ++di) {
      if (in(ic + di, jc + dj)) {
        pts.push_back({ic + di - xi, jc + dj - eta, u.values[g.index(ic + di, jc + dj)]});
      }
    }
  }
  if (pts.size() < 6) throw PreconditionError("too few same-side cells to extrapolate");
  Eigen::MatrixXd a(pts.size(), 6);
  Eigen::VectorXd b(pts.size());
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const double p = pts[r][0];
    const double q = pts[r][1];
    a.row(r) << 1.0, p, q, p * p, p * q, q * q;
    b[r] = pts[r][2];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  return coef[0];
}

}  // namespace

double sample(const ScalarField& u, const Vec2& x) {
  check_side(u, x);
  return u.grid.dim == 1 ? sample_1d(u, x) : sample_2d(u, x);
}

double trace(const ScalarField& piece, const Vec2& p) {
  if (piece.grid.dim == 2) return sample(piece, p);
  // With a zero normal derivative on the face, the quadratic through the two
  // nearest cells gives (9 u0 - u1) / 8.
  const GridSpec& g = piece.grid;
  const double xi = (p.x - g.lower[0]) / g.h[0];
  const int face = static_cast<int>(std::lround(xi));
  auto in = [&](int i) { return i >= 0 && i < g.n[0] && piece.mask[i]; };
  int c0 = face;
  int dir = 1;
  if (!in(face)) {
    c0 = face - 1;
    dir = -1;
  }
  if (!in(c0) || !in(c0 + dir)) throw PreconditionError("trace point is not on a mask face");
  return (9.0 * piece.values[c0] - piece.values[c0 + dir]) / 8.0;
}

void write_field_csv(std::ostream& os, const ScalarField& u) {
  os << (u.grid.dim == 1 ? "x,value\n" : "x,y,value\n");
  os << std::setprecision(17);
  for (int k = 0; k < u.grid.size(); ++k) {
    if (!u.mask[k]) continue;
    const Vec2 c = u.grid.center(k);
    os << c.x << ',';
    if (u.grid.dim == 2) os << c.y << ',';
    os << u.values[k] << '\n';
  }
}

std::vector<double> solve_radial(const std::function<double(double)>& g_of_rho, double beta,
                                 double r, int m) {
  if (!(beta > 0.0) || !(r > 0.0) || m < 8) {
    throw PreconditionError("radial solve needs beta > 0, r > 0 and at least 8 cells");
  }
  const double dr = r / m;
  std::vector<double> lo(m, 0.0), di(m, 0.0), up(m, 0.0), rhs(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double rho = (j + 0.5) * dr;
    const double face_lo = j * dr;
    const double face_hi = (j + 1 == m) ? 0.0 : (j + 1) * dr;
    lo[j] = -face_lo;
    up[j] = -face_hi;
    di[j] = face_lo + face_hi + beta * dr * dr * rho;
    rhs[j] = beta * dr * dr * rho * g_of_rho(rho);
  }
  // Thomas algorithm; the matrix is strictly diagonally dominant.
  for (int j = 1; j < m; ++j) {
    const double w = lo[j] / di[j - 1];
    di[j] -= w * up[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  std::vector<double> u(m);
  u[m - 1] = rhs[m - 1] / di[m - 1];
  for (int j = m - 2; j >= 0; --j) u[j] = (rhs[j] - up[j] * u[j + 1]) / di[j];
  return u;
}

}  // namespace mslab::fields
