// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "mslab/errors.hpp"
#include "mslab/solver.hpp"

namespace mslab::calibration {

namespace {

constexpr double kDtildeBound = 1.0 - (25.0 / 32.0) / 1.7320508075688772;  // 1 - (25/32)/sqrt 3

}  // namespace

// ---------------------------------------------------------------------------
// Profiles

WValue w_profile(double t, double lambda, double R) {
  // w(t) = cosh(a (L - t)) / (2 cosh(a L)) with a = 4 sqrt(lambda), L = R/2.
  const double a = 4.0 * std::sqrt(lambda);
  const double L = 0.5 * R;
  const double u = L - t;
  const double au = a * std::abs(u);
  const double base = std::exp(au - a * L) / (1.0 + std::exp(-2.0 * a * L));
  const double ch = base * (1.0 + std::exp(-2.0 * au));
  const double sh = base * (1.0 - std::exp(-2.0 * au)) * (u < 0.0 ? -1.0 : 1.0);
  WValue out;
  out.w = 0.5 * ch;
  out.dw = -0.5 * a * sh;
  out.d2w = a * a * out.w;
  return out;
}

Cutoff cutoff(double s, double R) {
  const double lo = 0.25 * R;
  const double width = 0.25 * R;
  if (s <= lo) return {1.0, 0.0, 0.0};
  if (s >= lo + width) return {0.0, 0.0, 0.0};
  const double t = (s - lo) / width;
  const double om = 1.0 - t;
  Cutoff c;
  c.value = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  c.d1 = -30.0 * t * t * om * om / width;
  c.d2 = -60.0 * t * om * (1.0 - 2.0 * t) / (width * width);
  return c;
}

std::string policy_name(Policy p) { return p == Policy::standard ? "standard" : "compact"; }

std::optional<Policy> parse_policy(const std::string& s) {
  if (s == "standard") return Policy::standard;
  if (s == "compact") return Policy::compact;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Structure

Structure::Structure(double lambda, double R, const geometry::Interface& iface)
    : lambda_(lambda), R_(R), iface_(iface) {
  if (!(lambda >= 1.0)) throw PreconditionError("profile stiffness lambda must be >= 1");
  if (!(R > 0.0)) throw PreconditionError("reach must be positive");
}

WValue Structure::p(double s) const {
  const Cutoff th = cutoff(s, R_);
  if (th.value == 0.0 && th.d1 == 0.0) return {};
  const WValue w = w_profile(s, lambda_, R_);
  WValue out;
  out.w = th.value * w.w;
  out.dw = th.d1 * w.w + th.value * w.dw;
  out.d2w = th.d2 * w.w + 2.0 * th.d1 * w.dw + th.value * w.d2w;
  return out;
}

VField Structure::v_at(const Vec2& x) const {
  const double d = iface_.signed_distance(x);
  const double s = std::abs(d);
  const WValue P = p(s);
  Vec2 nu;
  double lap_d = 0.0;
  if (s < 0.5 * R_) {
    const auto geo = geometry::geometry_pack(x, iface_);
    nu = geo.normal;
    lap_d = geo.lap_d;
  }
  VField f;
  const bool first = d <= 0.0;
  f.v[0] = first ? 0.5 + P.w : 1.5 - P.w;
  f.lap[0] = first ? P.d2w - P.dw * lap_d : -P.d2w - P.dw * lap_d;
  f.grad[0] = -P.dw * nu;
  f.v[1] = 2.0 - f.v[0];
  f.grad[1] = -f.grad[0];
  f.lap[1] = -f.lap[0];
  for (int i = 0; i < 2; ++i) f.mu[i] = f.lap[i] / f.v[i];
  return f;
}

double Structure::h_tilde() const { return 1.0 / (std::sqrt(2.0) * std::sqrt(grad_v_on_gamma())); }

double Structure::grad_v_sup() const {
  double best = 0.0;
  const int n = 20000;
  for (int j = 0; j <= n; ++j) best = std::max(best, std::abs(p(0.5 * R_ * j / n).dw));
  return best;
}

HValue h_beta(const CalibrationParams& p, const geometry::GeometryPack& geo) {
  HValue out;
  out.h = p.eps;
  const double s = std::abs(geo.d);
  if (s <= p.D) {
    const double hv = p.h_tilde - p.decay_rate * s;
    if (hv > p.eps) {
      out.h = hv;
      out.decaying = true;
      if (geo.d != 0.0) out.grad = (-p.decay_rate * (geo.d < 0.0 ? -1.0 : 1.0)) * geo.normal;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Side functions and extensions

SideEval ProfileSide::eval(const Vec2& x) const {
  return {prof_.value(x.x), Vec2{prof_.d1(x.x), 0.0}, prof_.d2(x.x)};
}

SideEval RadialSide::eval(const Vec2& x) const {
  const Vec2 rel = x - c_;
  const double rho = norm(rel);
  const double u = prof_.value(rho);
  const double du = prof_.d1(rho);
  const double d2u = prof_.d2(rho);
  if (rho < 1e-12) return {u, {}, 2.0 * d2u};
  return {u, (du / rho) * rel, d2u + du / rho};
}

ScreenedCosineSide::ScreenedCosineSide(double s, double c, int k, double beta, double l,
                                       double r)
    : s_(s), c_(c), kpi_(k * std::numbers::pi), beta_(beta), l_(l), r_(r), sb_(std::sqrt(beta)) {
  amp_ = c_ * beta_ / (beta_ + kpi_ * kpi_);
  const double C = amp_ * kpi_;
  coef_l_ = C * std::sin(kpi_ * r_) / sb_;
  coef_r_ = -C * std::sin(kpi_ * l_) / sb_;
}

namespace {

// cosh(b t) / sinh(b L) and sinh(b t) / sinh(b L) for 0 <= t <= L without overflow.
std::pair<double, double> hyperbolic_ratio(double b, double t, double L) {
  const double e = std::exp(b * (t - L)) / (1.0 - std::exp(-2.0 * b * L));
  const double m = std::exp(-2.0 * b * t);
  return {e * (1.0 + m), e * (1.0 - m)};
}

}  // namespace

SideEval ScreenedCosineSide::eval(const Vec2& x) const {
  const double L = r_ - l_;
  const auto [cl, sl] = hyperbolic_ratio(sb_, x.x - l_, L);
  const auto [cr, sr] = hyperbolic_ratio(sb_, r_ - x.x, L);
  const double cs = std::cos(kpi_ * x.x);
  const double sn = std::sin(kpi_ * x.x);
  SideEval e;
  e.value = s_ + amp_ * cs + coef_l_ * cl + coef_r_ * cr;
  e.grad = Vec2{-amp_ * kpi_ * sn + sb_ * (coef_l_ * sl - coef_r_ * sr), 0.0};
  e.lap = -amp_ * kpi_ * kpi_ * cs + beta_ * (coef_l_ * cl + coef_r_ * cr);
  return e;
}

BesselSide::BesselSide(double a, double c, double k, double beta, Vec2 center)
    : a_(a), amp_(c * beta / (beta + k * k)), k_(k), c_(center) {}

SideEval BesselSide::eval(const Vec2& x) const {
  const Vec2 rel = x - c_;
  const double rho = norm(rel);
  const double j0 = std::cyl_bessel_j(0.0, k_ * rho);
  SideEval e;
  e.value = a_ + amp_ * j0;
  e.lap = -k_ * k_ * amp_ * j0;
  if (rho > 0.0) e.grad = (-amp_ * k_ * std::cyl_bessel_j(1.0, k_ * rho) / rho) * rel;
  return e;
}

ExtendedPair::ExtendedPair(std::shared_ptr<const SideFunction> u1,
                           std::shared_ptr<const SideFunction> u2, geometry::Interface iface,
                           double jump)
    : u_{std::move(u1), std::move(u2)}, iface_(std::move(iface)), J_(jump) {}

SideEval ExtendedPair::own(int side, const Vec2& x) const { return u_[side]->eval(x); }

SideEval ExtendedPair::eval(int i, const Vec2& x) const {
  const int side = geometry::classify(x, iface_) == geometry::Side::side2 ? 1 : 0;
  if (side == i) return u_[i]->eval(x);
  SideEval e = u_[side]->eval(x);
  e.value += (i == 0 ? J_ : -J_);
  return e;
}

// ---------------------------------------------------------------------------
// Quadrature

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breaks) {
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  std::vector<double> pts{lo};
  std::sort(breaks.begin(), breaks.end());
  for (double t : breaks) {
    if (t > lo && t < hi) pts.push_back(t);
  }
  pts.push_back(hi);
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    s += boost::math::quadrature::gauss<double, 15>::integrate(f, pts[k], pts[k + 1]);
  }
  return sign * s;
}

// ---------------------------------------------------------------------------
// Assembled field

std::string region_name(Region r) {
  switch (r) {
    case Region::below:
      return "below";
    case Region::own_slab:
      return "own_slab";
    case Region::gap:
      return "gap";
    case Region::foreign_slab:
      return "foreign_slab";
    case Region::above:
      return "above";
  }
  return "unknown";
}

CalibrationField::CalibrationField(CalibrationParams params, Structure structure,
                                   ExtendedPair ext, fields::InputDatum g,
                                   geometry::Interface iface, Options opts, double grid_spacing)
    : params_(params),
      structure_(std::move(structure)),
      ext_(std::move(ext)),
      g_(std::move(g)),
      iface_(std::move(iface)),
      opts_(opts),
      grid_h_(grid_spacing) {
  if (opts_.fd_step <= 0.0) opts_.fd_step = 0.5 * grid_h_;
}

Column CalibrationField::shallow_column(const Vec2& x) const {
  Column c;
  c.x = x;
  const double d = iface_.signed_distance(x);
  const auto cls = geometry::classify(x, iface_);
  c.on_gamma = cls == geometry::Side::on_interface;
  c.side = cls == geometry::Side::side2 ? 1 : 0;
  if (std::abs(d) < iface_.reach()) {
    c.geo = geometry::geometry_pack(x, iface_);
  } else {
    c.geo.d = d;
    c.geo.in_tube = false;
  }
  c.u[0] = ext_.eval(0, x);
  c.u[1] = ext_.eval(1, x);
  c.v = structure_.v_at(x);
  c.h = h_beta(params_, c.geo);
  c.g = g_.value(x, c.side == 0 ? geometry::Side::side1 : geometry::Side::side2);
  c.beta = params_.beta;
  return c;
}

void CalibrationField::attach_fd(Column& c) const {
  const double dlt = opts_.fd_step;
  const int dim = iface_.domain().dim;
  auto regime = [&](const Vec2& y) {
    const double dy = iface_.signed_distance(y);
    const int side = dy > iface_.tolerance() ? 1 : (dy < -iface_.tolerance() ? 0 : -1);
    const bool decay = std::abs(dy) < params_.d_kink && std::abs(dy) <= params_.D;
    return side * 2 + (decay ? 1 : 0);
  };
  const int here = regime(c.x);
  for (int k = 0; k < dim; ++k) {
    Vec2 e;
    e[k] = dlt;
    auto ok = [&](int m) { return regime(c.x + static_cast<double>(m) * e) == here; };
    std::vector<std::pair<int, double>> st;
    if (ok(-1) && ok(1)) {
      st = {{1, 0.5 / dlt}, {-1, -0.5 / dlt}};
    } else if (ok(1) && ok(2)) {
      st = {{0, -1.5 / dlt}, {1, 2.0 / dlt}, {2, -0.5 / dlt}};
    } else if (ok(-1) && ok(-2)) {
      st = {{0, 1.5 / dlt}, {-1, -2.0 / dlt}, {-2, 0.5 / dlt}};
    } else {
      st = {{1, 0.5 / dlt}, {-1, -0.5 / dlt}};
    }
    for (const auto& [m, coef] : st) {
      FdTerm t;
      t.axis = k;
      t.coef = coef;
      t.col = shallow_column(c.x + static_cast<double>(m) * e);
      c.fd.push_back(std::move(t));
    }
  }
}

Vec2 CalibrationField::slab_phi_x(const Column& c, int i, double z) const {
  const SideEval& u = c.u[i];
  const double h = c.h.h;
  const double q = slab_sign(i) * (z - u.value) - 0.5 * h;
  Vec2 out = 2.0 * u.grad - (2.0 * (u.value - z) / c.v.v[i]) * c.v.grad[i];
  if (q > 0.0) out -= (16.0 * q / h) * u.grad;
  return out;
}

namespace {

Vec2 kink_term(const Column& c, int i, double z) {
  const SideEval& u = c.u[i];
  const double h = c.h.h;
  const double q = slab_sign(i) * (z - u.value) - 0.5 * h;
  if (q <= 0.0) return {};
  return (16.0 * q / h) * u.grad;
}

}  // namespace

double CalibrationField::kink_div(const Column& c, int i, double z) const {
  if (opts_.divergence == DivergenceMode::finite_difference) {
    double s = 0.0;
    for (const auto& t : c.fd) s += t.coef * kink_term(t.col, i, z)[t.axis];
    return s;
  }
  const SideEval& u = c.u[i];
  const double h = c.h.h;
  const double sg = slab_sign(i);
  const double q = sg * (z - u.value) - 0.5 * h;
  if (q <= 0.0) return 0.0;
  const Vec2& gh = c.h.grad;
  // div[(16/h) q grad u] with grad q = -sigma grad u - grad h / 2.
  const double gq_gu = -sg * norm2(u.grad) - 0.5 * dot(gh, u.grad);
  return (16.0 / h) * (gq_gu + q * u.lap) - 16.0 * q * dot(gh, u.grad) / (h * h);
}

double CalibrationField::slab_div(const Column& c, int i, double z) const {
  if (opts_.divergence == DivergenceMode::finite_difference) {
    double s = 0.0;
    for (const auto& t : c.fd) s += t.coef * slab_phi_x(t.col, i, z)[t.axis];
    return s;
  }
  const SideEval& u = c.u[i];
  const double v = c.v.v[i];
  const Vec2& gv = c.v.grad[i];
  // div[(u - z) grad v / v] = grad u . grad v / v + (u - z)(Lap v / v - |grad v|^2 / v^2)
  const double quot =
      dot(u.grad, gv) / v + (u.value - z) * (c.v.lap[i] / v - norm2(gv) / (v * v));
  return 2.0 * u.lap - 2.0 * quot - kink_div(c, i, z);
}

double CalibrationField::psi(const Column& c, double z) const {
  const int o = c.side;
  const double u = c.u[o].value;
  const double kink = u + slab_sign(o) * 0.5 * c.h.h;
  return integrate_split([&](double t) { return kink_div(c, o, t); }, u, z, {kink});
}

double CalibrationField::own_vertical(const Column& c, double z) const {
  const int o = c.side;
  const SideEval& u = c.u[o];
  const double r = u.value - z;
  const Vec2 w = u.grad - (r / c.v.v[o]) * c.v.grad[o];
  const double b = c.beta;
  return norm2(w) - b * (z - c.g) * (z - c.g) + (b - c.v.mu[o]) * r * r + psi(c, z);
}

double CalibrationField::chi(const Column& c, double z) const {
  const int f = 1 - c.side;
  const double uf = c.u[f].value;
  const double h = c.h.h;
  // Omega_1: foreign slab A_2 lies below, integrate up to its top edge.
  // Omega_2: foreign slab A_1 lies above, integrate down to its bottom edge.
  const double edge = c.side == 0 ? uf + h : uf - h;
  const double kink = uf + slab_sign(f) * 0.5 * h;
  return integrate_split([&](double t) { return slab_div(c, f, t); }, z, edge, {kink});
}

void CalibrationField::fill_edges(Column& c) const {
  const int o = c.side;
  const int f = 1 - o;
  const SideEval& u = c.u[o];
  const SideEval& uf = c.u[f];
  const double h = c.h.h;
  const Vec2& gh = c.h.grad;
  c.own_lo = own_vertical(c, u.value - h);
  c.own_hi = own_vertical(c, u.value + h);
  if (o == 0) {
    c.gap = c.own_lo + dot(slab_phi_x(c, o, u.value - h), gh - u.grad);
    c.foreign_in = c.gap + dot(slab_phi_x(c, f, uf.value + h), uf.grad + gh);
    c.foreign_out = c.foreign_in + chi(c, uf.value - h);
  } else {
    c.gap = c.own_hi + dot(slab_phi_x(c, o, u.value + h), -u.grad - gh);
    c.foreign_in = c.gap + dot(slab_phi_x(c, f, uf.value - h), uf.grad - gh);
    c.foreign_out = c.foreign_in + chi(c, uf.value + h);
  }
}

Column CalibrationField::column(const Vec2& x) const {
  Column c = shallow_column(x);
  if (opts_.divergence == DivergenceMode::finite_difference) attach_fd(c);
  fill_edges(c);
  return c;
}

PhiValue CalibrationField::phi(const Column& c, double z) const {
  const int o = c.side;
  const int f = 1 - o;
  const SideEval& u = c.u[o];
  const SideEval& uf = c.u[f];
  const double h = c.h.h;
  const Vec2& gh = c.h.grad;
  PhiValue out;
  const double r_own = std::abs(z - u.value);
  const double r_for = std::abs(z - uf.value);
  out.boundary = r_own == h || r_for == h;
  if (r_own <= h) {
    out.slab = o;
    out.x = slab_phi_x(c, o, z);
  } else if (r_for <= h) {
    out.slab = f;
    out.x = slab_phi_x(c, f, z);
  }

  if (c.on_gamma) {
    // phi^z on Gamma: zero outside the slabs, one-sided limits inside.
    if (out.slab < 0) {
      out.z = 0.0;
      out.region = z > std::max(u.value, uf.value) ? Region::above
                   : z < std::min(u.value, uf.value) ? Region::below
                                                     : Region::gap;
      return out;
    }
    const double eta = 1e-9 * iface_.domain().diameter();
    const Vec2 nudge = (out.slab == 0 ? -eta : eta) * c.geo.normal;
    PhiValue lim = phi(column(c.x + nudge), z);
    lim.x = out.x;
    lim.boundary = out.boundary;
    return lim;
  }

  if (out.slab == o) {
    out.region = Region::own_slab;
    out.z = own_vertical(c, z);
    return out;
  }
  if (out.slab == f) {
    out.region = Region::foreign_slab;
    out.z = chi(c, z) + c.foreign_in;
    return out;
  }
  if (o == 0) {
    if (z > u.value) {
      out.region = Region::above;
      out.z = c.own_hi + dot(slab_phi_x(c, o, u.value + h), -u.grad - gh);
    } else if (z > uf.value) {
      out.region = Region::gap;
      out.z = c.gap;
    } else {
      out.region = Region::below;
      out.z = c.foreign_out + dot(slab_phi_x(c, f, uf.value - h), gh - uf.grad);
    }
  } else {
    if (z < u.value) {
      out.region = Region::below;
      out.z = c.own_lo + dot(slab_phi_x(c, o, u.value - h), gh - u.grad);
    } else if (z < uf.value) {
      out.region = Region::gap;
      out.z = c.gap;
    } else {
      out.region = Region::above;
      out.z = c.foreign_out + dot(slab_phi_x(c, f, uf.value + h), -uf.grad - gh);
    }
  }
  return out;
}

std::vector<double> CalibrationField::z_breakpoints(const Column& c) const {
  const double h = c.h.h;
  std::vector<double> out;
  for (int i = 0; i < 2; ++i) {
    const double u = c.u[i].value;
    for (double m : {-1.0, -0.5, 0.0, 0.5, 1.0}) out.push_back(u + m * h);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

std::pair<std::shared_ptr<const SideFunction>, std::shared_ptr<const SideFunction>>
side_functions(const fields::PiecewiseField& u_beta, const fields::InputDatum& g, double beta,
               const Options& opts) {
  const auto& iface = u_beta.iface;
  const bool smooth_jump = g.preset() == fields::Preset::jump_plus_smooth;
  if (iface.kind() == geometry::Interface::Kind::point && opts.exact_sides &&
      (smooth_jump || g.preset() == fields::Preset::jump_constant)) {
    const auto& dom = iface.domain();
    const double c = smooth_jump ? g.smooth() : 0.0;
    const int k = smooth_jump ? g.mode() : 0;
    const double a = g.amplitude();
    return {std::make_shared<ScreenedCosineSide>(a, c, k, beta, dom.lower[0], iface.x0()),
            std::make_shared<ScreenedCosineSide>(-a, c, k, beta, iface.x0(), dom.upper[0])};
  }
  if (iface.kind() == geometry::Interface::Kind::point) {
    const auto& grid = u_beta.inner.grid;
    std::shared_ptr<const SideFunction> out[2];
    for (int i = 0; i < 2; ++i) {
      const auto& piece = u_beta.piece(i);
      std::vector<double> vals;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int k = 0; k < grid.size(); ++k) {
        if (!piece.mask[k]) continue;
        vals.push_back(piece.values[k]);
        const double c = grid.center(k).x;
        lo = std::min(lo, c - 0.5 * grid.h[0]);
        hi = std::max(hi, c + 0.5 * grid.h[0]);
      }
      out[i] = std::make_shared<ProfileSide>(fields::NeumannProfile(vals, lo, hi));
    }
    return {out[0], out[1]};
  }
  if (g.preset() != fields::Preset::radial_jump) {
    throw PreconditionError("2D calibration is implemented for radial data (radial_jump) only");
  }
  const double r = iface.radius();
  const double kr = fields::kBesselJ1Zero / r;
  const double a = g.amplitude();
  const double c = g.smooth();
  auto outer = std::make_shared<ConstantSide>(-a);
  if (opts.exact_sides) {
    return {std::make_shared<BesselSide>(a, c, kr, beta, iface.center()), outer};
  }
  auto g_in = [&](double rho) { return a + c * std::cyl_bessel_j(0.0, kr * rho); };
  const auto vals = fields::solve_radial(g_in, beta, r, opts.radial_cells);
  auto inner = std::make_shared<RadialSide>(fields::NeumannProfile(vals, 0.0, r), iface.center());
  return {inner, outer};
}

namespace {

Vec2 gamma_point(const geometry::Interface& iface) {
  if (iface.kind() == geometry::Interface::Kind::point) return {iface.x0(), 0.0};
  return iface.center() + Vec2{iface.radius(), 0.0};
}

// sup |grad u_i| over the own side, sampled.
double measure_grad_sup(const SideFunction& u1, const SideFunction& u2,
                        const geometry::Interface& iface) {
  const auto& dom = iface.domain();
  double best = 0.0;
  const int n = 4000;
  if (iface.kind() == geometry::Interface::Kind::point) {
    for (int j = 0; j <= n; ++j) {
      const double x = dom.lower[0] + dom.extent(0) * j / n;
      const auto& u = x <= iface.x0() ? u1 : u2;
      best = std::max(best, norm(u.eval(Vec2{x, 0.0}).grad));
    }
    return best;
  }
  // Radial data: the inner profile along a ray; the outer side is constant.
  for (int j = 0; j <= n; ++j) {
    const Vec2 x = iface.center() + Vec2{iface.radius() * j / n, 0.0};
    best = std::max(best, norm(u1.eval(x).grad));
  }
  for (int j = 0; j <= n; ++j) {
    const double t = static_cast<double>(j) / n;
    const Vec2 x{dom.lower[0] + t * dom.extent(0), iface.center().y};
    if (iface.signed_distance(x) > 0.0) best = std::max(best, norm(u2.eval(x).grad));
  }
  return best;
}

double measure_u_minus_g(const fields::PiecewiseField& u_beta, const fields::InputDatum& g,
                         const SideFunction& u1, const Options& opts) {
  const auto& iface = u_beta.iface;
  double best = 0.0;
  if (iface.kind() == geometry::Interface::Kind::point) {
    const auto& grid = u_beta.inner.grid;
    for (int k = 0; k < grid.size(); ++k) {
      const auto side = u_beta.inner.mask[k] ? geometry::Side::side1 : geometry::Side::side2;
      best = std::max(best, std::abs(u_beta.at(k) - g.value(grid.center(k), side)));
    }
    return best;
  }
  const int m = opts.radial_cells;
  for (int j = 0; j < m; ++j) {
    const Vec2 x = iface.center() + Vec2{(j + 0.5) * iface.radius() / m, 0.0};
    best = std::max(best, std::abs(u1.eval(x).value - g.value(x, geometry::Side::side1)));
  }
  return best;
}

}  // namespace

CalibrationField calibrate(const fields::PiecewiseField& u_beta, const fields::InputDatum& g,
                           double beta, const Overrides& ov, const Options& opts) {
  if (!(beta > 0.0)) throw PreconditionError("calibration needs beta > 0");
  if (beta < 1.0 && !ov.allow_small_beta) {
    throw PreconditionError("calibration needs beta >= 1");
  }
  if (!g.has_jump()) throw PreconditionError("calibration needs a jump preset with S > 0");
  if (!g.positively_oriented()) {
    throw PreconditionError("calibration needs the side1 trace of g above the side2 trace");
  }
  const auto& iface = u_beta.iface;
  const auto [u1, u2] = side_functions(u_beta, g, beta, opts);

  CalibrationParams p;
  p.beta = beta;
  p.policy = ov.policy;
  p.S = g.jump_inf();
  p.R = iface.reach();
  const Vec2 pg = gamma_point(iface);
  p.jump_J = u1->eval(pg).value - u2->eval(pg).value;
  p.grad_u_sup = measure_grad_sup(*u1, *u2, iface);
  p.u_minus_g_sup = measure_u_minus_g(u_beta, g, *u1, opts);

  if (p.u_minus_g_sup > p.S / 16.0) {
    std::ostringstream m;
    m << "closeness ||u_beta - g||_inf <= S/16 violated: " << p.u_minus_g_sup << " > " << p.S / 16.0;
    throw InfeasibleParametersError(m.str());
  }
  if (p.jump_J < 0.75 * p.S) {
    std::ostringstream m;
    m << "extension gap u~_1 - u~_2 >= 3S/4 violated: jump " << p.jump_J << " < " << 0.75 * p.S;
    throw InfeasibleParametersError(m.str());
  }

  // lambda
  if (ov.lambda) {
    p.lambda = *ov.lambda;
    if (!(p.lambda >= 1.0)) throw InfeasibleParametersError("lambda >= 1 violated by override");
  } else if (ov.policy == Policy::standard) {
    const double rhs =
        std::max(4.0 * p.grad_u_sup * p.grad_u_sup, 64.0 / (p.S * p.S)) + 1.0;
    p.lambda = 1.0;
    while (std::sqrt(p.lambda) / 6.0 < rhs) p.lambda *= 2.0;
  } else {
    p.lambda = 1.0;
    for (;; p.lambda *= 2.0) {
      const Structure st(p.lambda, p.R, iface);
      if (p.jump_J - 2.0 * st.h_tilde() >= 0.5 * p.S && st.grad_v_on_gamma() >= 0.5) break;
      if (p.lambda > 1e12) throw InfeasibleParametersError("no lambda separates the slabs");
    }
  }
  Structure st(p.lambda, p.R, iface);
  p.h_tilde = st.h_tilde();
  p.grad_v_sup = st.grad_v_sup();

  // gamma, gamma1
  const bool standard = ov.policy == Policy::standard;
  p.gamma = ov.gamma.value_or(standard ? 0.2 : 0.01);
  p.gamma1 = ov.gamma1.value_or(standard ? 0.35 : 0.02);
  if (!(p.gamma > 0.0 && p.gamma < p.gamma1 && p.gamma1 < 0.5)) {
    throw InfeasibleParametersError("0 < gamma < gamma1 < 1/2 violated");
  }

  // eps
  if (ov.eps) {
    p.eps = *ov.eps;
    if (!(p.eps > 0.0 && p.eps < 1.0)) throw InfeasibleParametersError("eps in (0, 1) violated");
    if (!(p.eps < p.h_tilde)) {
      std::ostringstream m;
      m << "eps < h_tilde violated: eps = " << p.eps << ", h_tilde = " << p.h_tilde;
      throw InfeasibleParametersError(m.str());
    }
  } else {
    p.eps = 0.0;
    for (int k = 1; k <= 60; ++k) {
      const double e = std::ldexp(1.0, -k);
      if (6.0 * e * p.grad_u_sup + 4.0 * e * e * p.grad_v_sup <= 0.25 && e < p.h_tilde) {
        p.eps = e;
        break;
      }
    }
    if (p.eps == 0.0) {
      throw InfeasibleParametersError("eps bound 6 eps |grad u| + 4 eps^2 |grad v| <= 1/4 has no "
                                      "dyadic solution below h_tilde");
    }
  }

  // D
  if (ov.D) {
    p.D = *ov.D;
    if (!(p.D > 0.0 && p.D <= 0.5 * p.R)) throw InfeasibleParametersError("D in (0, R/2] violated");
  } else {
    const int n = 4096;
    const double h2 = p.h_tilde * p.h_tilde;
    p.D = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double s = 0.5 * p.R * j / n;
      const WValue P = st.p(s);
      const double gv = std::abs(P.dw);
      const double vmin = std::min(0.5 + P.w, 1.5 - P.w);
      if (gv < 0.5 || h2 * gv / vmin > kDtildeBound) break;
      p.D = s;
    }
    if (p.D == 0.0) {
      throw InfeasibleParametersError("tube width D: |grad v| >= 1/2 and h_tilde^2 |grad v| / v <= "
                                      "1 - (25/32)/sqrt 3 fail next to Gamma");
    }
  }

  p.decay_rate = std::pow(beta, 0.5 + p.gamma1);
  p.d_kink = (p.h_tilde - p.eps) / p.decay_rate;
  p.h_continuous = p.d_kink <= p.D;
  p.slab_separation = p.jump_J - 2.0 * p.h_tilde;
  if (p.slab_separation < 0.5 * p.S) {
    std::ostringstream m;
    m << "dist(A_1, A_2) >= S/2 violated: " << p.slab_separation << " < " << 0.5 * p.S;
    throw InfeasibleParametersError(m.str());
  }

  ExtendedPair ext(u1, u2, iface, p.jump_J);
  const double grid_h = u_beta.inner.grid.h[0];
  return CalibrationField(p, std::move(st), std::move(ext), g, iface, opts, grid_h);
}

std::string describe(const CalibrationParams& p) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "policy = " << policy_name(p.policy) << '\n'
     << "beta = " << p.beta << '\n'
     << "lambda = " << p.lambda << '\n'
     << "eps = " << p.eps << '\n'
     << "gamma = " << p.gamma << '\n'
     << "gamma1 = " << p.gamma1 << '\n'
     << "D = " << p.D << '\n'
     << "S = " << p.S << '\n'
     << "R = " << p.R << '\n'
     << "h_tilde = " << p.h_tilde << '\n'
     << "decay_rate = " << p.decay_rate << '\n'
     << "d_kink = " << p.d_kink << '\n'
     << "h_continuous = " << (p.h_continuous ? "true" : "false") << '\n'
     << "grad_u_sup = " << p.grad_u_sup << '\n'
     << "grad_v_sup = " << p.grad_v_sup << '\n'
     << "jump = " << p.jump_J << '\n'
     << "u_minus_g_sup = " << p.u_minus_g_sup << '\n'
     << "slab_separation = " << p.slab_separation << '\n';
  return os.str();
}

}  // namespace mslab::calibration
