// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "mslab/errors.hpp"
#include "mslab/functional.hpp"
#include "mslab/parallel.hpp"

namespace mslab::verifier {

using calibration::CalibrationField;
using calibration::Column;
using calibration::Region;

std::string condition_name(ConditionId id) {
  switch (id) {
    case ConditionId::a_b_divergence:
      return "a_b_divergence";
    case ConditionId::c_inequality:
      return "c_inequality";
    case ConditionId::d_graph:
      return "d_graph";
    case ConditionId::e_jump:
      return "e_jump";
    case ConditionId::f_pair_sup:
      return "f_pair_sup";
    case ConditionId::g_boundary:
      return "g_boundary";
  }
  return "unknown";
}

Sampling sampling_2d() {
  Sampling s;
  s.tube_columns = 201;
  s.log_columns_per_side = 32;
  s.domain_columns = 121;
  s.rays = 3;
  s.f_nodes = 1025;
  s.f_columns = 21;
  s.box_columns = 4;
  s.e_tol = 1e-6;
  s.f_tol = 1e-6;
  return s;
}

const ConditionReport& CalibrationReport::condition(ConditionId id) const {
  for (const auto& c : conditions) {
    if (c.id == id) return c;
  }
  throw PreconditionError("condition not in report: " + condition_name(id));
}

std::string CalibrationReport::failed() const {
  std::string out;
  for (const auto& c : conditions) {
    if (c.pass) continue;
    if (!out.empty()) out += ",";
    out += condition_name(c.id);
  }
  return out;
}

namespace {

// Horizontal component of phi with the slab chosen by distance only; on the
// slab boundaries the inside formula is used.
Vec2 phi_x(const CalibrationField& f, const Column& c, double z) {
  const double h = c.h.h;
  const int o = c.side;
  if (std::abs(z - c.u[o].value) <= h) return f.slab_phi_x(c, o, z);
  if (std::abs(z - c.u[1 - o].value) <= h) return f.slab_phi_x(c, 1 - o, z);
  return {};
}

double simpson(const std::function<double(double)>& fn, double a, double b, int n) {
  n = std::max(n, 3);
  if (n % 2 == 0) ++n;
  const double step = (b - a) / (n - 1);
  double s = fn(a) + fn(b);
  for (int k = 1; k < n - 1; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * fn(a + k * step);
  return s * step / 3.0;
}

// Geometry of sampling lines. In 1D the only line is the x axis through x0;
// in 2D the rays leave the circle center.
struct Ray {
  Vec2 origin;
  Vec2 dir{1.0, 0.0};
  double base = 0.0;  // s coordinate of Gamma along the ray
};

std::vector<Ray> make_rays(const geometry::Interface& iface, int count) {
  if (iface.kind() == geometry::Interface::Kind::point) {
    return {Ray{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, iface.x0()}};
  }
  std::vector<Ray> rays;
  for (int k = 0; k < count; ++k) {
    const double th = 0.3 + 2.0 * std::numbers::pi * k / count;
    rays.push_back(Ray{iface.center(), Vec2{std::cos(th), std::sin(th)}, iface.radius()});
  }
  return rays;
}

Vec2 on_ray(const Ray& r, double d) { return r.origin + (r.base + d) * r.dir; }

int weight_power(const geometry::Interface& iface) {
  return iface.kind() == geometry::Interface::Kind::circle ? 1 : 0;
}

struct ColumnSample {
  Vec2 x;
  double d = 0.0;
};

std::vector<ColumnSample> margin_columns(const geometry::Interface& iface, const Sampling& s) {
  std::vector<ColumnSample> out;
  const double R = iface.reach();
  const double tol = iface.tolerance();
  for (const auto& ray : make_rays(iface, s.rays)) {
    for (int j = 0; j < s.tube_columns; ++j) {
      const double d = -R + 2.0 * R * (j + 0.5) / s.tube_columns;
      if (std::abs(d) > tol) out.push_back({on_ray(ray, d), d});
    }
    for (int j = 0; j < s.log_columns_per_side; ++j) {
      const double t = s.log_columns_per_side == 1 ? 0.0
                                                   : static_cast<double>(j) / (s.log_columns_per_side - 1);
      const double d = 1e-6 * R * std::pow(0.5 / 1e-6, t);
      out.push_back({on_ray(ray, -d), -d});
      out.push_back({on_ray(ray, d), d});
    }
  }
  const auto& dom = iface.domain();
  if (dom.dim == 1) {
    for (int j = 0; j < s.domain_columns; ++j) {
      const double x = dom.lower[0] + dom.extent(0) * j / (s.domain_columns - 1);
      const double d = iface.signed_distance(Vec2{x, 0.0});
      if (std::abs(d) > tol) out.push_back({Vec2{x, 0.0}, d});
    }
  } else {
    const int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(s.domain_columns))));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Vec2 x{dom.lower[0] + dom.extent(0) * i / (n - 1),
                     dom.lower[1] + dom.extent(1) * j / (n - 1)};
        const double d = iface.signed_distance(x);
        if (std::abs(d) > tol) out.push_back({x, d});
      }
    }
  }
  return out;
}

double margin_of(const calibration::PhiValue& p, double beta, double z, double g, double* scale) {
  const double fid = beta * (z - g) * (z - g);
  const double quad = 0.25 * norm2(p.x);
  if (scale) *scale = std::max({1.0, std::abs(p.z), fid, quad});
  return p.z + fid - quad;
}

struct Worst {
  double value;
  Location where;
  bool larger_is_worse;
  void offer(double v, const Vec2& x, double z) {
    if (larger_is_worse ? v > value : v < value) {
      value = v;
      where = {x, z};
    }
  }
};

}  // namespace

std::pair<double, double> z_window(const CalibrationField& calib, const Column& c) {
  const double J = calib.params().jump_J;
  const double h = c.h.h;
  return {c.u[1].value - h - 0.5 * J, c.u[0].value + h + 0.5 * J};
}

// ---------------------------------------------------------------------------
// Conditions (e) and (f)

Vec2 jump_integral_e(const CalibrationField& calib, const Vec2& x, int n_quad) {
  const Column c = calib.column(x);
  const double h = c.h.h;
  const double u1 = c.u[0].value;
  const double u2 = c.u[1].value;
  const int per = std::max(3, n_quad / 4);
  Vec2 out;
  for (int axis = 0; axis < 2; ++axis) {
    auto f0 = [&](double z) { return calib.slab_phi_x(c, 0, z)[axis]; };
    auto f1 = [&](double z) { return calib.slab_phi_x(c, 1, z)[axis]; };
    out[axis] = simpson(f0, u1 - h, u1 - 0.5 * h, per) + simpson(f0, u1 - 0.5 * h, u1, per) +
                simpson(f1, u2, u2 + 0.5 * h, per) + simpson(f1, u2 + 0.5 * h, u2 + h, per);
  }
  return out;
}

double pair_sup_f(const CalibrationField& calib, const Vec2& x, double z_lo, double z_hi,
                  int n_nodes) {
  const Column c = calib.column(x);
  std::vector<double> nodes;
  nodes.reserve(n_nodes + 12);
  for (int k = 0; k < n_nodes; ++k) nodes.push_back(z_lo + (z_hi - z_lo) * k / (n_nodes - 1));
  for (double b : calib.z_breakpoints(c)) {
    if (b > z_lo && b < z_hi) nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<Vec2> cum(nodes.size());
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    Vec2 seg;
    for (int axis = 0; axis < 2; ++axis) {
      seg[axis] = boost::math::quadrature::gauss<double, 5>::integrate(
          [&](double z) { return phi_x(calib, c, z)[axis]; }, nodes[k - 1], nodes[k]);
    }
    cum[k] = cum[k - 1] + seg;
  }
  if (calib.interface().domain().dim == 1) {
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& v : cum) {
      lo = std::min(lo, v.x);
      hi = std::max(hi, v.x);
    }
    return hi - lo;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    for (std::size_t j = i + 1; j < cum.size(); ++j) best = std::max(best, norm(cum[j] - cum[i]));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Conditions (a) and (b): box fluxes in the (s, z) plane

namespace {

struct FluxContext {
  const CalibrationField& calib;
  const FluxBox& box;
  int power;
  int m;

  Vec2 point(double s) const { return box.origin + s * box.dir; }
  double weight(double s) const { return power == 0 ? 1.0 : std::pow(s, power); }

  // Piece signature of phi at (s, z): changes exactly where phi^z fails to be
  // smooth along a horizontal face.
  int signature(const Column& c, double z) const {
    const auto p = calib.phi(c, z);
    int key = static_cast<int>(p.region) * 16 + (p.slab + 1) * 4;
    for (int i = 0; i < 2; ++i) {
      const double q = calibration::slab_sign(i) * (z - c.u[i].value) - 0.5 * c.h.h;
      if (q > 0.0) key += 1 << i;
    }
    return key;
  }

  // Breakpoints in s of phi^z(., z) on [a, b].
  std::vector<double> s_breaks(double z, double a, double b) const {
    const auto& p = calib.params();
    const auto& iface = calib.interface();
    std::vector<double> out;
    // Points where h_beta is not smooth.
    for (double dd : {p.d_kink, p.D}) {
      for (double sg : {-1.0, 1.0}) {
        const double ss = (iface.kind() == geometry::Interface::Kind::point ? iface.x0()
                                                                            : iface.radius()) +
                          sg * dd;
        if (ss > a && ss < b) out.push_back(ss);
      }
    }
    const int probes = 64;
    auto sig = [&](double s) { return signature(calib.column(point(s)), z); };
    double prev_s = a;
    int prev = sig(a);
    for (int k = 1; k <= probes; ++k) {
      const double s = a + (b - a) * k / probes;
      const int cur = sig(s);
      if (cur != prev) {
        double lo = prev_s;
        double hi = s;
        // Bisect down to adjacent doubles: a jump of phi^z across the
        // surface turns any slack in the location into a flux error.
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (sig(mid) == prev ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
      }
      prev = cur;
      prev_s = s;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Composite midpoint over [a, b] split at breaks, m nodes per piece.
  double midpoint(const std::function<double(double)>& f, double a, double b,
                  std::vector<double> breaks) const {
    std::vector<double> pts{a};
    for (double t : breaks) {
      if (t > a && t < b) pts.push_back(t);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double len = pts[k + 1] - pts[k];
      if (len <= 0.0) continue;
      const double step = len / m;
      double part = 0.0;
      for (int j = 0; j < m; ++j) part += f(pts[k] + (j + 0.5) * step);
      s += part * step;
    }
    return s;
  }
};

}  // namespace

double divergence_flux(const CalibrationField& calib, const FluxBox& box, int midpoint_nodes,
                       double* scale) {
  const auto& iface = calib.interface();
  const double b = box.half;
  if (!(b > 0.0)) throw PreconditionError("box half width must be positive");
  const double s0 = box.s - b;
  const double s1 = box.s + b;
  const double d0 = iface.signed_distance(box.origin + s0 * box.dir);
  const double d1 = iface.signed_distance(box.origin + s1 * box.dir);
  if (d0 * d1 <= 0.0) throw PreconditionError("flux box crosses Gamma x R");
  FluxContext ctx{calib, box, weight_power(iface), std::max(1, midpoint_nodes)};
  const double z0 = box.z - b;
  const double z1 = box.z + b;

  auto vertical_face = [&](double s) {
    const Column c = calib.column(ctx.point(s));
    auto f = [&](double z) { return dot(calib.phi(c, z).x, box.dir); };
    return ctx.weight(s) * ctx.midpoint(f, z0, z1, calib.z_breakpoints(c));
  };
  auto horizontal_face = [&](double z) {
    auto f = [&](double s) { return ctx.weight(s) * calib.phi_at(ctx.point(s), z).z; };
    return ctx.midpoint(f, s0, s1, ctx.s_breaks(z, s0, s1));
  };
  const double right = vertical_face(s1);
  const double left = vertical_face(s0);
  const double top = horizontal_face(z1);
  const double bottom = horizontal_face(z0);
  const double vol =
      2.0 * b * (ctx.power == 0 ? 2.0 * b : 0.5 * (s1 * s1 - s0 * s0));
  if (scale) *scale = (std::abs(right) + std::abs(left) + std::abs(top) + std::abs(bottom)) / vol;
  return (right - left + top - bottom) / vol;
}

// ---------------------------------------------------------------------------
// verify_all

namespace {

struct ColumnOut {
  std::vector<MarginSample> samples;
  double min_all = std::numeric_limits<double>::infinity();
  double min_off = std::numeric_limits<double>::infinity();
  Location where_all;
  Location where_off;
  double sum = 0.0;
  bool band_ok = true;
};

ColumnOut sample_column(const CalibrationField& calib, const ColumnSample& cs, const Sampling& s) {
  ColumnOut out;
  const Column c = calib.column(cs.x);
  const auto [lo, hi] = z_window(calib, c);
  std::vector<double> zs;
  zs.reserve(s.z_nodes + 2 * s.slab_nodes);
  for (int k = 0; k < s.z_nodes; ++k) zs.push_back(lo + (hi - lo) * k / (s.z_nodes - 1));
  const double h = c.h.h;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < s.slab_nodes; ++k) {
      zs.push_back(c.u[i].value - h + 2.0 * h * (k + 1) / (s.slab_nodes + 1));
    }
  }
  std::sort(zs.begin(), zs.end());
  const double u_own = c.u[c.side].value;
  for (double z : zs) {
    const auto p = calib.phi(c, z);
    if (p.boundary) continue;
    double scale = 1.0;
    const double m = margin_of(p, c.beta, z, c.g, &scale);
    MarginSample ms;
    ms.x = cs.x;
    ms.z = z;
    ms.side = c.side;
    ms.region = p.region;
    ms.in_band = std::abs(z - u_own) < 0.5 * h;
    ms.margin = m;
    out.samples.push_back(ms);
    out.sum += m;
    if (m < out.min_all) {
      out.min_all = m;
      out.where_all = {cs.x, z};
    }
    if (ms.in_band) {
      if (m < -1e-12 * scale) out.band_ok = false;
    } else if (m < out.min_off) {
      out.min_off = m;
      out.where_off = {cs.x, z};
    }
  }
  return out;
}

// Boxes for the divergence test along one ray.
std::vector<std::pair<FluxBox, bool>> box_layout(const CalibrationField& calib, const Ray& ray,
                                                 const Sampling& smp) {
  const auto& p = calib.params();
  const auto& iface = calib.interface();
  const auto& dom = iface.domain();
  const double R = iface.reach();
  const double a = 4.0 * std::sqrt(p.lambda);
  std::vector<double> ds;
  if (p.d_kink < p.D) ds.push_back(0.5 * p.d_kink);
  if (p.D > 1.02 * p.d_kink) ds.push_back(0.5 * (std::min(p.d_kink, p.D) + p.D));
  ds.push_back(std::min(1.5 * p.D, 0.5 * (p.D + 0.25 * R)));
  ds.push_back(0.375 * R);
  ds.push_back(0.7 * R);
  ds.push_back(0.95 * R);
  if (static_cast<int>(ds.size()) > smp.box_columns) ds.resize(smp.box_columns);

  std::vector<std::pair<FluxBox, bool>> out;
  for (double sg : {-1.0, 1.0}) {
    for (double dabs : ds) {
      const double d = sg * dabs;
      const Vec2 x = on_ray(ray, d);
      const Column c = calib.column(x);
      const double h = c.h.h;
      const double J = p.jump_J;
      const int o = c.side;
      const int f = 1 - o;
      const double uo = c.u[o].value;
      const double uf = c.u[f].value;
      // Horizontal limits: Gamma, domain boundary, points where h is not smooth.
      double lim = std::min({h, 1.0 / a, dabs});
      lim = std::min(lim, std::abs(dabs - p.d_kink));
      lim = std::min(lim, std::abs(dabs - p.D));
      lim = std::min(lim, dom.boundary_distance(x));
      const double slope =
          1.0 + std::max(norm(c.u[0].grad), norm(c.u[1].grad)) + norm(c.h.grad);
      const auto brk = calib.z_breakpoints(c);
      auto gap_to_breaks = [&](double z, double skip) {
        double gmin = std::numeric_limits<double>::infinity();
        for (double bz : brk) {
          if (bz == skip) continue;
          gmin = std::min(gmin, std::abs(bz - z));
        }
        return gmin;
      };
      auto add = [&](double z, bool straddle, double skip) {
        const double b0 = 0.125 * std::min(lim, 0.5 * gap_to_breaks(z, skip) / slope);
        if (!(b0 > 0.0)) return;
        FluxBox fb;
        fb.origin = ray.origin;
        fb.dir = ray.dir;
        fb.s = ray.base + d;
        fb.z = z;
        fb.half = b0;
        out.emplace_back(fb, straddle);
      };
      const double so = calibration::slab_sign(o);
      const double sf = calibration::slab_sign(f);
      // Smooth interiors.
      add(uo - so * 0.3 * h, false, NAN);
      add(uo + so * 0.3 * h, false, NAN);
      add(uo + so * 0.75 * h, false, NAN);
      add(uf - sf * 0.3 * h, false, NAN);
      add(uf + sf * 0.75 * h, false, NAN);
      add(0.5 * (uo + uf), false, NAN);
      add(c.u[0].value + h + 0.25 * J, false, NAN);
      add(c.u[1].value - h - 0.25 * J, false, NAN);
      // Surfaces: slab edges and kinks.
      for (double e : {uo - h, uo + h, uo + so * 0.5 * h, uf - h, uf + h, uf + sf * 0.5 * h}) {
        add(e, true, e);
      }
    }
  }
  return out;
}

}  // namespace

CalibrationReport verify_all(const CalibrationField& calib, const Sampling& smp) {
  CalibrationReport rep;
  rep.params = calib.params();
  const auto& iface = calib.interface();
  const auto& dom = iface.domain();
  const auto& prm = calib.params();
  const int workers = std::max(1, smp.workers);

  // (c) margins.
  const auto cols = margin_columns(iface, smp);
  std::vector<ColumnOut> outs(cols.size());
  parallel_chunks(static_cast<int>(cols.size()), workers, [&](int b, int e) {
    for (int k = b; k < e; ++k) outs[k] = sample_column(calib, cols[k], smp);
  });
  {
    ConditionReport cr;
    cr.id = ConditionId::c_inequality;
    cr.tolerance = 0.0;
    Worst all{std::numeric_limits<double>::infinity(), {}, false};
    Worst off{std::numeric_limits<double>::infinity(), {}, false};
    bool band_ok = true;
    double sum = 0.0;
    for (auto& o : outs) {
      all.offer(o.min_all, o.where_all.x, o.where_all.z);
      off.offer(o.min_off, o.where_off.x, o.where_off.z);
      band_ok = band_ok && o.band_ok;
      sum += o.sum;
      cr.samples += o.samples.size();
      rep.margins.insert(rep.margins.end(), o.samples.begin(), o.samples.end());
    }
    cr.worst_residual = all.value;
    cr.worst_location = all.where;
    cr.margin_min = all.value;
    cr.margin_mean = cr.samples ? sum / cr.samples : 0.0;
    rep.c_min_off_band = off.value;
    cr.pass = band_ok && off.value > 0.0;
    std::ostringstream d;
    d << std::setprecision(6) << "min margin off band " << off.value << " at x=("
      << off.where.x.x << "," << off.where.x.y << ") z=" << off.where.z
      << "; band |z-u| < h/2 " << (band_ok ? "non-negative" : "negative");
    cr.detail = d.str();
    rep.conditions.push_back(cr);
  }
  rep.columns = cols.size();

  // (d) graph identity at grid nodes.
  {
    ConditionReport cr;
    cr.id = ConditionId::d_graph;
    cr.tolerance = smp.d_tol;
    Worst w{0.0, {}, true};
    std::vector<Vec2> nodes;
    const double gh = calib.grid_spacing();
    if (dom.dim == 1) {
      const int n = static_cast<int>(std::lround(dom.extent(0) / gh));
      for (int i = 0; i < n; ++i) nodes.push_back(Vec2{dom.lower[0] + (i + 0.5) * gh, 0.0});
    } else {
      const int n = static_cast<int>(std::lround(dom.extent(0) / gh));
      const int stride = std::max(1, n / 64);
      for (int j = 0; j < n; j += stride) {
        for (int i = 0; i < n; i += stride) {
          nodes.push_back(Vec2{dom.lower[0] + (i + 0.5) * gh, dom.lower[1] + (j + 0.5) * gh});
        }
      }
    }
    std::vector<double> res(nodes.size(), 0.0);
    parallel_chunks(static_cast<int>(nodes.size()), workers, [&](int b, int e) {
      for (int k = b; k < e; ++k) {
        if (geometry::classify(nodes[k], iface) == geometry::Side::on_interface) continue;
        const Column c = calib.column(nodes[k]);
        const auto& u = c.u[c.side];
        const auto p = calib.phi(c, u.value);
        const Vec2 want_x = 2.0 * u.grad;
        const double want_z = norm2(u.grad) - c.beta * (u.value - c.g) * (u.value - c.g);
        const double rx = norm(p.x - want_x) / (1.0 + norm(want_x));
        const double rz = std::abs(p.z - want_z) / (1.0 + std::abs(want_z));
        res[k] = std::max(rx, rz);
      }
    });
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      w.offer(res[k], nodes[k], 0.0);
      sum += res[k];
    }
    cr.samples = nodes.size();
    cr.worst_residual = w.value;
    cr.worst_location = w.where;
    cr.margin_min = w.value;
    cr.margin_mean = nodes.empty() ? 0.0 : sum / nodes.size();
    cr.pass = w.value <= cr.tolerance;
    rep.conditions.push_back(cr);
  }

  // (e) jump integral on Gamma.
  std::vector<Vec2> gamma_pts;
  if (iface.kind() == geometry::Interface::Kind::point) {
    gamma_pts.push_back(Vec2{iface.x0(), 0.0});
  } else {
    for (int k = 0; k < smp.gamma_points; ++k) {
      const double th = 2.0 * std::numbers::pi * k / smp.gamma_points;
      gamma_pts.push_back(iface.center() + iface.radius() * Vec2{std::cos(th), std::sin(th)});
    }
  }
  {
    ConditionReport cr;
    cr.id = ConditionId::e_jump;
    cr.tolerance = smp.e_tol;
    Worst w{0.0, {}, true};
    double sum = 0.0;
    double refine = 0.0;
    for (const auto& x : gamma_pts) {
      const auto geo = geometry::geometry_pack(x, iface);
      const Vec2 e1 = jump_integral_e(calib, x, smp.e_quad);
      const Vec2 e2 = jump_integral_e(calib, x, 2 * smp.e_quad);
      const double r = norm(e1 + geo.normal);
      refine = std::max(refine, norm(e2 - e1));
      w.offer(r, x, 0.0);
      sum += r;
    }
    cr.samples = gamma_pts.size();
    cr.worst_residual = w.value;
    cr.worst_location = w.where;
    cr.margin_min = w.value;
    cr.margin_mean = sum / gamma_pts.size();
    cr.pass = w.value <= cr.tolerance;
    std::ostringstream d;
    d << std::setprecision(6) << "quadrature doubling changes the integral by " << refine;
    cr.detail = d.str();
    rep.conditions.push_back(cr);
  }

  // (f) pair supremum.
  {
    ConditionReport cr;
    cr.id = ConditionId::f_pair_sup;
    cr.tolerance = smp.f_tol;
    struct FCol {
      Vec2 x;
      bool plateau;
    };
    std::vector<FCol> fcols;
    for (const auto& x : gamma_pts) fcols.push_back({x, false});
    const double R = iface.reach();
    for (const auto& ray : make_rays(iface, std::min(smp.rays, 2))) {
      for (int j = 0; j < smp.f_columns; ++j) {
        const double d = -R + 2.0 * R * (j + 0.5) / smp.f_columns;
        fcols.push_back({on_ray(ray, d), std::abs(d) > prm.D && std::abs(d) > prm.d_kink});
      }
      for (double dd : {0.5 * prm.d_kink, 0.5 * prm.D}) {
        for (double sg : {-1.0, 1.0}) {
          fcols.push_back({on_ray(ray, sg * dd), false});
        }
      }
    }
    std::vector<double> sup(fcols.size(), 0.0);
    parallel_chunks(static_cast<int>(fcols.size()), workers, [&](int b, int e) {
      for (int k = b; k < e; ++k) {
        // A common window for all columns covers every slab.
        const Column c = calib.column(fcols[k].x);
        const auto [lo, hi] = z_window(calib, c);
        sup[k] = pair_sup_f(calib, fcols[k].x, lo, hi, smp.f_nodes);
      }
    });
    Worst w{0.0, {}, true};
    double plateau = 0.0;
    double gamma_sup = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < fcols.size(); ++k) {
      w.offer(sup[k], fcols[k].x, 0.0);
      if (fcols[k].plateau) plateau = std::max(plateau, sup[k]);
      if (k < gamma_pts.size()) gamma_sup = std::max(gamma_sup, sup[k]);
      sum += sup[k];
    }
    cr.samples = fcols.size();
    cr.worst_residual = w.value;
    cr.worst_location = w.where;
    cr.margin_min = w.value;
    cr.margin_mean = sum / fcols.size();
    cr.pass = w.value <= 1.0 + cr.tolerance && plateau <= 0.5 + cr.tolerance;
    std::ostringstream d;
    d << std::setprecision(12) << "sup on Gamma " << gamma_sup << "; plateau sup " << plateau;
    cr.detail = d.str();
    rep.conditions.push_back(cr);
  }

  // (g) boundary normal component.
  {
    ConditionReport cr;
    cr.id = ConditionId::g_boundary;
    cr.tolerance = smp.g_tol;
    std::vector<std::pair<Vec2, Vec2>> bpts;  // point, outward normal
    if (dom.dim == 1) {
      bpts.push_back({Vec2{dom.lower[0], 0.0}, Vec2{-1.0, 0.0}});
      bpts.push_back({Vec2{dom.upper[0], 0.0}, Vec2{1.0, 0.0}});
    } else {
      const int n = smp.boundary_points;
      for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) / n;
        const double x = dom.lower[0] + t * dom.extent(0);
        const double y = dom.lower[1] + t * dom.extent(1);
        bpts.push_back({Vec2{x, dom.lower[1]}, Vec2{0.0, -1.0}});
        bpts.push_back({Vec2{x, dom.upper[1]}, Vec2{0.0, 1.0}});
        bpts.push_back({Vec2{dom.lower[0], y}, Vec2{-1.0, 0.0}});
        bpts.push_back({Vec2{dom.upper[0], y}, Vec2{1.0, 0.0}});
      }
    }
    Worst w{0.0, {}, true};
    double sum = 0.0;
    for (const auto& [x, nu] : bpts) {
      const Column c = calib.column(x);
      const auto [lo, hi] = z_window(calib, c);
      for (int k = 0; k < smp.z_nodes; ++k) {
        const double z = lo + (hi - lo) * k / (smp.z_nodes - 1);
        const double r = std::abs(dot(phi_x(calib, c, z), nu));
        w.offer(r, x, z);
        sum += r;
        ++cr.samples;
      }
    }
    cr.worst_residual = w.value;
    cr.worst_location = w.where;
    cr.margin_min = w.value;
    cr.margin_mean = cr.samples ? sum / cr.samples : 0.0;
    cr.pass = w.value <= cr.tolerance;
    rep.conditions.push_back(cr);
  }

  // (a)+(b) divergence by box refinement.
  {
    ConditionReport cr;
    cr.id = ConditionId::a_b_divergence;
    cr.tolerance = smp.flux_floor;
    std::vector<std::pair<FluxBox, bool>> layout;
    for (const auto& ray : make_rays(iface, std::min(smp.rays, 2))) {
      auto part = box_layout(calib, ray, smp);
      layout.insert(layout.end(), part.begin(), part.end());
    }
    rep.boxes.resize(layout.size());
    parallel_chunks(static_cast<int>(layout.size()), workers, [&](int b, int e) {
      for (int k = b; k < e; ++k) {
        BoxResult& br = rep.boxes[k];
        FluxBox fb = layout[k].first;
        br.x = fb.origin + fb.s * fb.dir;
        br.z = fb.z;
        br.straddling = layout[k].second;
        const double b0 = fb.half;
        for (int lvl = 0; lvl < 3; ++lvl) {
          fb.half = b0 / (1 << lvl);
          br.half[lvl] = fb.half;
          // Straddling boxes keep the quadrature spacing fixed while the box
          // shrinks. Their opposite faces are cut at different places, so the
          // midpoint errors do not cancel as they do for smooth boxes.
          const int m = br.straddling ? smp.midpoint_nodes << lvl : smp.midpoint_nodes;
          br.flux[lvl] = divergence_flux(calib, fb, m, lvl == 2 ? &br.scale : nullptr);
        }
        const double f1 = std::abs(br.flux[1]);
        const double f2 = std::abs(br.flux[2]);
        br.order = (f1 > 0.0 && f2 > 0.0) ? std::log2(f1 / f2)
                                          : std::numeric_limits<double>::infinity();
        const double need = br.straddling ? smp.straddle_order : smp.smooth_order;
        br.pass = br.order >= need || f2 <= smp.flux_floor * std::max(1.0, br.scale);
      }
    });
    Worst w{0.0, {}, true};
    double min_smooth = std::numeric_limits<double>::infinity();
    double min_straddle = std::numeric_limits<double>::infinity();
    double sum_order = 0.0;
    int finite = 0;
    bool all = true;
    for (const auto& br : rep.boxes) {
      const double rel = std::abs(br.flux[2]) / std::max(1.0, br.scale);
      w.offer(rel, br.x, br.z);
      // Boxes that pass on the floor carry no order information.
      const bool floor_pass = std::abs(br.flux[2]) <= smp.flux_floor * std::max(1.0, br.scale);
      if (!floor_pass) {
        (br.straddling ? min_straddle : min_smooth) =
            std::min(br.straddling ? min_straddle : min_smooth, br.order);
        sum_order += br.order;
        ++finite;
      }
      all = all && br.pass;
    }
    cr.samples = rep.boxes.size();
    cr.worst_residual = w.value;
    cr.worst_location = w.where;
    cr.margin_min = std::min(min_smooth, min_straddle);
    cr.margin_mean = finite ? sum_order / finite : std::numeric_limits<double>::infinity();
    cr.pass = all;
    std::ostringstream d;
    d << std::setprecision(6) << "min order smooth " << min_smooth << ", straddling "
      << min_straddle << " (boxes at the flux floor excluded)";
    cr.detail = d.str();
    rep.conditions.push_back(cr);
  }

  // Report order follows the condition letters.
  std::sort(rep.conditions.begin(), rep.conditions.end(),
            [](const ConditionReport& a, const ConditionReport& b) { return a.id < b.id; });
  rep.samples = 0;
  for (const auto& c : rep.conditions) rep.samples += c.samples;
  rep.pass = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                         [](const ConditionReport& c) { return c.pass; });
  return rep;
}

void write_report(std::ostream& os, const CalibrationReport& r) {
  os << std::setprecision(17);
  os << "[parameters]\n" << calibration::describe(r.params);
  os << "\n[samples]\ncolumns = " << r.columns << "\nsamples = " << r.samples
     << "\nmargin_rows = " << r.margins.size() << "\nboxes = " << r.boxes.size() << '\n';
  for (const auto& c : r.conditions) {
    os << "\n[" << condition_name(c.id) << "]\n"
       << "tolerance = " << c.tolerance << '\n'
       << "worst_residual = " << c.worst_residual << '\n'
       << "worst_location = " << c.worst_location.x.x << ' ' << c.worst_location.x.y << ' '
       << c.worst_location.z << '\n'
       << "margin_min = " << c.margin_min << '\n'
       << "margin_mean = " << c.margin_mean << '\n'
       << "samples = " << c.samples << '\n'
       << "pass = " << (c.pass ? "true" : "false") << '\n';
    if (!c.detail.empty()) os << "detail = " << c.detail << '\n';
  }
  os << "\n[overall]\npass = " << (r.pass ? "true" : "false") << '\n';
  if (!r.pass) os << "failed = " << r.failed() << '\n';
}

void write_margins_csv(std::ostream& os, const CalibrationReport& r) {
  os << "x,y,z,side,region,in_band,margin\n" << std::setprecision(17);
  for (const auto& m : r.margins) {
    os << m.x.x << ',' << m.x.y << ',' << m.z << ',' << (m.side + 1) << ','
       << calibration::region_name(m.region) << ',' << (m.in_band ? 1 : 0) << ',' << m.margin
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// Threshold scan

namespace {

double energy_gap(const Problem& pb, double beta) {
  functional::CompetitorContext ctx{pb.grid, pb.g, beta, pb.solver,
                                    fields::solve_piecewise(pb.grid, pb.iface, pb.g, beta,
                                                            pb.solver)};
  const auto cf = functional::make_competitor(functional::CompetitorKind::crack_free, 0.0, ctx);
  return functional::ms_energy(ctx.u_beta, pb.g, beta).total -
         functional::ms_energy(cf, pb.g, beta).total;
}

ScanStep try_beta(const Problem& pb, double beta) {
  ScanStep st;
  st.beta = beta;
  try {
    const auto u = fields::solve_piecewise(pb.grid, pb.iface, pb.g, beta, pb.solver);
    const auto calib = calibration::calibrate(u, pb.g, beta, pb.overrides, pb.options);
    const auto rep = verify_all(calib, pb.sampling);
    st.pass = rep.pass;
    st.detail = rep.pass ? "pass" : "failed: " + rep.failed();
  } catch (const InfeasibleParametersError& e) {
    st.detail = std::string("infeasible: ") + e.what();
  } catch (const PreconditionError& e) {
    st.detail = std::string("precondition: ") + e.what();
  }
  return st;
}

}  // namespace

double energy_crossover(const Problem& problem, double lo, double hi, double rel_tol) {
  if (!(lo > 0.0 && hi > lo)) throw PreconditionError("energy crossover needs 0 < lo < hi");
  double flo = energy_gap(problem, lo);
  const double fhi = energy_gap(problem, hi);
  if (flo * fhi > 0.0) return std::numeric_limits<double>::quiet_NaN();
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    const double fm = energy_gap(problem, mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

ScanResult scan_beta_threshold(const Problem& problem, double lo, double hi, int bisections) {
  if (!(lo > 0.0 && hi >= 100.0 * lo)) {
    throw PreconditionError("beta range must span at least two decades");
  }
  ScanResult out;
  out.energy_crossover = energy_crossover(problem, lo, hi);
  auto top = try_beta(problem, hi);
  out.steps.push_back(top);
  if (!top.pass) return out;
  auto bottom = try_beta(problem, lo);
  out.steps.push_back(bottom);
  if (bottom.pass) {
    out.threshold = lo;
    return out;
  }
  double a = lo;
  double b = hi;
  for (int k = 0; k < bisections; ++k) {
    const double mid = std::sqrt(a * b);
    auto st = try_beta(problem, mid);
    out.steps.push_back(st);
    (st.pass ? b : a) = mid;
  }
  out.threshold = b;
  return out;
}

// ---------------------------------------------------------------------------
// Scaling study

LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit needs >= 2 points");
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::log(y[k]) - (f.intercept + f.slope * std::log(x[k]));
    rss += r * r;
  }
  f.residual = std::sqrt(rss / n);
  return f;
}

ScalingReport scaling_study(const fields::GridSpec& grid,
                            const std::optional<geometry::Interface>& iface,
                            const fields::InputDatum& g, const std::vector<double>& betas,
                            const fields::SolverOptions& solver) {
  if (betas.size() < 4) throw PreconditionError("scaling study needs at least 4 beta values");
  for (std::size_t k = 1; k < betas.size(); ++k) {
    if (!(betas[k] > betas[k - 1])) throw PreconditionError("beta grid must increase strictly");
  }
  ScalingReport rep;
  const double vol = grid.cell_volume();
  for (double beta : betas) {
    std::vector<fields::ScalarField> pieces;
    if (iface) {
      auto u = fields::solve_piecewise(grid, *iface, g, beta, solver);
      pieces = {u.inner, u.outer};
    } else {
      pieces = {fields::solve_screened_poisson(grid, fields::whole_mask(grid), g, beta, solver)};
    }
    ScalingRow row;
    row.beta = beta;
    double l2 = 0.0;
    for (const auto& piece : pieces) {
      const auto side = piece.side;
      const auto der = fields::differentiate(piece);
      for (int k = 0; k < grid.size(); ++k) {
        if (!piece.mask[k]) continue;
        const Vec2 x = grid.center(k);
        const double gx =
            side == geometry::Side::on_interface ? g.value(x) : g.value(x, side);
        const double e = piece.values[k] - gx;
        row.sup_err = std::max(row.sup_err, std::abs(e));
        l2 += e * e * vol;
        row.grad_sup = std::max(row.grad_sup, norm(der.grad[k]));
        const bool near = !iface || std::abs(iface->signed_distance(x)) < 0.5 * iface->reach();
        if (near) {
          const auto& H = der.hess[k];
          row.hess_sup =
              std::max(row.hess_sup, std::sqrt(H.xx * H.xx + 2.0 * H.xy * H.xy + H.yy * H.yy));
        }
      }
    }
    row.l2_err = std::sqrt(l2);
    rep.rows.push_back(row);
  }
  std::vector<double> b, se, le, gs, hs;
  for (const auto& r : rep.rows) {
    b.push_back(r.beta);
    se.push_back(std::max(r.sup_err, 1e-300));
    le.push_back(std::max(r.l2_err, 1e-300));
    gs.push_back(std::max(r.grad_sup, 1e-300));
    hs.push_back(std::max(r.hess_sup, 1e-300));
  }
  rep.sup_fit = fit_loglog(b, se);
  rep.l2_fit = fit_loglog(b, le);
  rep.grad_fit = fit_loglog(b, gs);
  rep.hess_fit = fit_loglog(b, hs);
  return rep;
}

void write_scaling_csv(std::ostream& os, const ScalingReport& r) {
  os << "beta,sup_err,l2_err,grad_sup,hess_sup\n" << std::setprecision(17);
  for (const auto& row : r.rows) {
    os << row.beta << ',' << row.sup_err << ',' << row.l2_err << ',' << row.grad_sup << ','
       << row.hess_sup << '\n';
  }
}

}  // namespace mslab::verifier
