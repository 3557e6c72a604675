// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mslab/errors.hpp"

namespace mslab::cli {

namespace {

std::string locate(const std::string& source, int line) {
  if (line <= 0) return source;
  return source + ":" + std::to_string(line);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

// Removes a trailing comment introduced by '#' or ';' (at line start or after
// whitespace, so values such as paths may still contain those characters).
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') &&
        (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Typed access to one section, remembering which keys were consumed.
class SectionReader {
 public:
  SectionReader(const RawConfig& raw, const std::string& name) : raw_(raw), name_(name) {
    auto it = raw.sections.find(name);
    if (it != raw.sections.end()) sec_ = &it->second;
  }

  bool present() const { return sec_ != nullptr; }
  int line() const { return sec_ ? sec_->line : 0; }

  const RawValue* get(const std::string& key) {
    used_.insert(key);
    if (!sec_) return nullptr;
    auto it = sec_->keys.find(key);
    return it == sec_->keys.end() ? nullptr : &it->second;
  }

  [[noreturn]] void fail(const RawValue* v, const std::string& key, const std::string& msg) const {
    throw ConfigError(raw_.source, v ? v->line : line(), "[" + name_ + "] " + key + ": " + msg);
  }

  void number(const std::string& key, double& out) {
    if (const RawValue* v = get(key)) out = parse_number(v, key);
  }

  void opt_number(const std::string& key, std::optional<double>& out) {
    if (const RawValue* v = get(key)) out = parse_number(v, key);
  }

  void positive(const std::string& key, double& out) {
    if (const RawValue* v = get(key)) {
      out = parse_number(v, key);
      if (!(out > 0.0)) fail(v, key, "must be positive");
    }
  }

  void integer(const std::string& key, int& out, int min_value) {
    const RawValue* v = get(key);
    if (!v) return;
    const std::string& t = v->text;
    int value = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      fail(v, key, "expected an integer, got '" + t + "'");
    }
    if (value < min_value) fail(v, key, "must be at least " + std::to_string(min_value));
    out = value;
  }

  void boolean(const std::string& key, bool& out) {
    const RawValue* v = get(key);
    if (!v) return;
    if (v->text == "true") {
      out = true;
    } else if (v->text == "false") {
      out = false;
    } else {
      fail(v, key, "expected true or false, got '" + v->text + "'");
    }
  }

  std::vector<double> list(const RawValue* v, const std::string& key) {
    std::string t = v->text;
    for (char& c : t) {
      if (c == ',') c = ' ';
    }
    std::istringstream is(t);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_token(v, key, tok));
    return out;
  }

  std::string text(const std::string& key) {
    const RawValue* v = get(key);
    return v ? v->text : std::string();
  }

  void reject_unknown() const {
    if (!sec_) return;
    for (const auto& [key, value] : sec_->keys) {
      if (!used_.count(key)) fail(&value, key, "unknown key");
    }
  }

 private:
  double parse_number(const RawValue* v, const std::string& key) const {
    return parse_token(v, key, v->text);
  }

  double parse_token(const RawValue* v, const std::string& key, const std::string& t) const {
    double value = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value)) {
      fail(v, key, "expected a finite number, got '" + t + "'");
    }
    return value;
  }

  const RawConfig& raw_;
  std::string name_;
  const RawSection* sec_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kSections = {"domain", "interface", "input",  "solver",
                                         "calibration", "verify", "scan", "scaling",
                                         "evolution", "probe", "output"};

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(locate(source, line) + ": " + msg), line_(line) {}

RawConfig parse_ini(const std::string& text, const std::string& source) {
  RawConfig cfg;
  cfg.source = source;
  RawSection* current = nullptr;
  std::string current_name;
  std::istringstream is(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(is, raw_line)) {
    ++line_no;
    std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError(source, line_no, "invalid section name '" + name + "'");
      if (!kSections.count(name)) throw ConfigError(source, line_no, "unknown section [" + name + "]");
      if (cfg.sections.count(name)) {
        throw ConfigError(source, line_no, "duplicate section [" + name + "]");
      }
      current = &cfg.sections[name];
      current->line = line_no;
      current_name = name;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!current) throw ConfigError(source, line_no, "key '" + key + "' outside any section");
    if (!valid_name(key)) throw ConfigError(source, line_no, "invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(source, line_no, "empty value for '" + key + "'");
    if (current->keys.count(key)) {
      throw ConfigError(source, line_no,
                        "duplicate key '" + key + "' in [" + current_name + "]");
    }
    current->keys[key] = RawValue{value, line_no};
  }
  return cfg;
}

RawConfig read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str(), path);
}

fields::InputDatum RunConfig::datum() const {
  return fields::InputDatum(preset, amplitude, mode, smooth, domain, iface);
}

fields::GridSpec RunConfig::grid() const { return fields::GridSpec::make(domain, cells); }

RunConfig build_config(const RawConfig& raw) {
  RunConfig cfg;

  // [domain]
  {
    SectionReader s(raw, "domain");
    if (!s.present()) throw ConfigError(raw.source, 0, "missing section [domain]");
    const RawValue* dim = s.get("dim");
    if (!dim) s.fail(nullptr, "dim", "required");
    if (dim->text == "1") {
      cfg.domain.dim = 1;
    } else if (dim->text == "2") {
      cfg.domain.dim = 2;
    } else {
      s.fail(dim, "dim", "expected 1 or 2, got '" + dim->text + "'");
    }
    cfg.domain.lower = {0.0, 0.0};
    cfg.domain.upper = {1.0, cfg.domain.dim == 2 ? 1.0 : 0.0};
    for (const char* key : {"lower", "upper"}) {
      const RawValue* v = s.get(key);
      if (!v) continue;
      auto vals = s.list(v, key);
      if (static_cast<int>(vals.size()) != cfg.domain.dim) {
        s.fail(v, key, "expected " + std::to_string(cfg.domain.dim) + " value(s)");
      }
      auto& dst = std::string(key) == "lower" ? cfg.domain.lower : cfg.domain.upper;
      for (int a = 0; a < cfg.domain.dim; ++a) dst[a] = vals[a];
    }
    for (int a = 0; a < cfg.domain.dim; ++a) {
      if (!(cfg.domain.upper[a] > cfg.domain.lower[a])) {
        s.fail(s.get("upper"), "upper", "must exceed lower on every axis");
      }
    }
    s.reject_unknown();
  }

  // [solver] (read early: the grid spacing constrains the interface)
  {
    SectionReader s(raw, "solver");
    s.integer("N", cfg.cells, 8);
    s.positive("tol", cfg.solver.tol);
    s.integer("max_iter", cfg.solver.max_iter, 0);
    s.boolean("jacobi", cfg.solver.jacobi);
    s.integer("workers", cfg.solver.workers, 1);
    s.reject_unknown();
  }

  // [interface]
  {
    SectionReader s(raw, "interface");
    if (s.present()) {
      const RawValue* type = s.get("type");
      if (!type) s.fail(nullptr, "type", "required");
      try {
        if (type->text == "point") {
          if (cfg.domain.dim != 1) s.fail(type, "type", "a point interface needs dim = 1");
          const RawValue* x0v = s.get("x0");
          if (!x0v) s.fail(nullptr, "x0", "required for a point interface");
          double x0 = 0.0;
          s.number("x0", x0);
          double h = cfg.domain.extent(0) / cfg.cells;
          double t = (x0 - cfg.domain.lower[0]) / h;
          if (std::abs(t - std::round(t)) > 1e-9) {
            s.fail(x0v, "x0", "must lie on a cell face of the N = " + std::to_string(cfg.cells) +
                                  " grid");
          }
          cfg.iface = geometry::Interface::point(cfg.domain, x0);
        } else if (type->text == "circle") {
          if (cfg.domain.dim != 2) s.fail(type, "type", "a circle interface needs dim = 2");
          const RawValue* c = s.get("center");
          if (!c) s.fail(nullptr, "center", "required for a circle interface");
          auto cv = s.list(c, "center");
          if (cv.size() != 2) s.fail(c, "center", "expected 2 values");
          const RawValue* r = s.get("radius");
          if (!r) s.fail(nullptr, "radius", "required for a circle interface");
          double radius = 0.0;
          s.positive("radius", radius);
          cfg.iface = geometry::Interface::circle(cfg.domain, Vec2{cv[0], cv[1]}, radius);
        } else {
          s.fail(type, "type", "expected point or circle, got '" + type->text + "'");
        }
      } catch (const mslab::Error& e) {
        throw ConfigError(raw.source, type->line, std::string("[interface] ") + e.what());
      }
      s.reject_unknown();
    }
  }

  // [input]
  {
    SectionReader s(raw, "input");
    if (!s.present()) throw ConfigError(raw.source, 0, "missing section [input]");
    const RawValue* p = s.get("preset");
    if (!p) s.fail(nullptr, "preset", "required");
    auto preset = fields::parse_preset(p->text);
    if (!preset) s.fail(p, "preset", "unknown preset '" + p->text + "'");
    cfg.preset = *preset;
    s.number("amplitude", cfg.amplitude);
    s.integer("mode", cfg.mode, 0);
    s.number("smooth", cfg.smooth);
    bool jump = cfg.preset == fields::Preset::jump_constant ||
                cfg.preset == fields::Preset::jump_plus_smooth ||
                cfg.preset == fields::Preset::radial_jump;
    if (jump && !cfg.iface) {
      s.fail(p, "preset", "'" + p->text + "' needs an [interface] section");
    }
    if (cfg.preset == fields::Preset::radial_jump &&
        (cfg.domain.dim != 2 || cfg.iface->kind() != geometry::Interface::Kind::circle)) {
      s.fail(p, "preset", "radial_jump needs dim = 2 and a circle interface");
    }
    try {
      (void)cfg.datum();
    } catch (const mslab::Error& e) {
      s.fail(p, "preset", e.what());
    }
    s.reject_unknown();
  }

  // [calibration]
  {
    SectionReader s(raw, "calibration");
    s.positive("beta", cfg.beta);
    if (const RawValue* v = s.get("policy")) {
      auto pol = calibration::parse_policy(v->text);
      if (!pol) s.fail(v, "policy", "expected standard or compact, got '" + v->text + "'");
      cfg.overrides.policy = *pol;
    }
    s.opt_number("lambda", cfg.overrides.lambda);
    s.opt_number("eps", cfg.overrides.eps);
    s.opt_number("gamma", cfg.overrides.gamma);
    s.opt_number("gamma1", cfg.overrides.gamma1);
    s.opt_number("D", cfg.overrides.D);
    s.boolean("allow_small_beta", cfg.overrides.allow_small_beta);
    if (const RawValue* v = s.get("divergence")) {
      if (v->text == "analytic") {
        cfg.cal_options.divergence = calibration::DivergenceMode::analytic;
      } else if (v->text == "finite_difference") {
        cfg.cal_options.divergence = calibration::DivergenceMode::finite_difference;
      } else {
        s.fail(v, "divergence", "expected analytic or finite_difference");
      }
    }
    s.number("fd_step", cfg.cal_options.fd_step);
    s.integer("radial_cells", cfg.cal_options.radial_cells, 16);
    s.boolean("exact_sides", cfg.cal_options.exact_sides);
    s.reject_unknown();
  }

  // [verify]
  {
    SectionReader s(raw, "verify");
    cfg.sampling = cfg.domain.dim == 2 ? verifier::sampling_2d() : verifier::Sampling{};
    auto& m = cfg.sampling;
    s.integer("tube_columns", m.tube_columns, 2);
    s.integer("log_columns_per_side", m.log_columns_per_side, 0);
    s.integer("domain_columns", m.domain_columns, 0);
    s.integer("rays", m.rays, 1);
    s.integer("z_nodes", m.z_nodes, 3);
    s.integer("slab_nodes", m.slab_nodes, 0);
    s.integer("gamma_points", m.gamma_points, 1);
    s.integer("boundary_points", m.boundary_points, 1);
    s.integer("e_quad", m.e_quad, 5);
    s.integer("f_nodes", m.f_nodes, 3);
    s.integer("f_columns", m.f_columns, 0);
    s.integer("box_columns", m.box_columns, 1);
    s.integer("midpoint_nodes", m.midpoint_nodes, 1);
    s.positive("d_tol", m.d_tol);
    s.positive("e_tol", m.e_tol);
    s.positive("f_tol", m.f_tol);
    s.positive("g_tol", m.g_tol);
    s.positive("smooth_order", m.smooth_order);
    s.positive("straddle_order", m.straddle_order);
    s.positive("flux_floor", m.flux_floor);
    s.reject_unknown();
  }

  // [scan]
  {
    SectionReader s(raw, "scan");
    s.positive("beta_lo", cfg.scan_lo);
    s.positive("beta_hi", cfg.scan_hi);
    s.integer("bisections", cfg.scan_bisections, 0);
    if (s.present() && !(cfg.scan_hi >= 100.0 * cfg.scan_lo)) {
      s.fail(s.get("beta_hi"), "beta_hi", "must be at least 100 * beta_lo");
    }
    s.reject_unknown();
  }

  // [scaling]
  {
    SectionReader s(raw, "scaling");
    if (const RawValue* v = s.get("betas")) {
      cfg.scaling_betas = s.list(v, "betas");
      if (cfg.scaling_betas.size() < 4) s.fail(v, "betas", "need at least 4 values");
      for (std::size_t i = 0; i < cfg.scaling_betas.size(); ++i) {
        if (!(cfg.scaling_betas[i] > 0.0) ||
            (i > 0 && !(cfg.scaling_betas[i] > cfg.scaling_betas[i - 1]))) {
          s.fail(v, "betas", "must be positive and strictly increasing");
        }
      }
    }
    s.number("sup_slope_max", cfg.scaling_sup_slope_max);
    s.positive("grad_ratio_max", cfg.scaling_grad_ratio_max);
    s.number("hess_slope_max", cfg.scaling_hess_slope_max);
    s.reject_unknown();
  }

  // [evolution]
  {
    SectionReader s(raw, "evolution");
    s.positive("delta", cfg.delta);
    s.positive("T", cfg.horizon);
    s.integer("snapshot_every", cfg.snapshot_every, 0);
    s.integer("probe_every", cfg.probe_every, 0);
    s.positive("tol", cfg.evolution_tol);
    s.reject_unknown();
  }

  // [probe]
  {
    SectionReader s(raw, "probe");
    if (const RawValue* v = s.get("ts")) {
      cfg.probe_ts = s.list(v, "ts");
      for (double t : cfg.probe_ts) {
        if (!(t >= 0.0 && t < 1.0)) s.fail(v, "ts", "every t must lie in [0, 1)");
      }
    }
    s.reject_unknown();
  }

  // [output]
  {
    SectionReader s(raw, "output");
    if (const RawValue* v = s.get("directory")) cfg.out_dir = v->text;
    s.boolean("emit_fields", cfg.emit_fields);
    s.reject_unknown();
  }

  cfg.sampling.workers = cfg.solver.workers;
  return cfg;
}

std::string effective_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto d = fmt_double;
  auto b = [](bool v) { return v ? "true" : "false"; };
  auto list = [&](const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + d(v[i]);
    return out;
  };
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) os << key << " = " << d(*v) << "\n";
  };

  os << "[domain]\n";
  os << "dim = " << cfg.domain.dim << "\n";
  std::vector<double> lo(cfg.domain.lower.begin(), cfg.domain.lower.begin() + cfg.domain.dim);
  std::vector<double> hi(cfg.domain.upper.begin(), cfg.domain.upper.begin() + cfg.domain.dim);
  os << "lower = " << list(lo) << "\nupper = " << list(hi) << "\n\n";

  if (cfg.iface) {
    os << "[interface]\n";
    if (cfg.iface->kind() == geometry::Interface::Kind::point) {
      os << "type = point\nx0 = " << d(cfg.iface->x0()) << "\n\n";
    } else {
      os << "type = circle\ncenter = " << d(cfg.iface->center().x) << " "
         << d(cfg.iface->center().y) << "\nradius = " << d(cfg.iface->radius()) << "\n\n";
    }
  }

  os << "[input]\npreset = " << fields::preset_name(cfg.preset) << "\namplitude = "
     << d(cfg.amplitude) << "\nmode = " << cfg.mode << "\nsmooth = " << d(cfg.smooth) << "\n\n";

  os << "[solver]\nN = " << cfg.cells << "\ntol = " << d(cfg.solver.tol)
     << "\nmax_iter = " << cfg.solver.max_iter << "\njacobi = " << b(cfg.solver.jacobi)
     << "\nworkers = " << cfg.solver.workers << "\n\n";

  os << "[calibration]\nbeta = " << d(cfg.beta)
     << "\npolicy = " << calibration::policy_name(cfg.overrides.policy) << "\n";
  opt("lambda", cfg.overrides.lambda);
  opt("eps", cfg.overrides.eps);
  opt("gamma", cfg.overrides.gamma);
  opt("gamma1", cfg.overrides.gamma1);
  opt("D", cfg.overrides.D);
  os << "allow_small_beta = " << b(cfg.overrides.allow_small_beta) << "\ndivergence = "
     << (cfg.cal_options.divergence == calibration::DivergenceMode::analytic ? "analytic"
                                                                              : "finite_difference")
     << "\nfd_step = " << d(cfg.cal_options.fd_step)
     << "\nradial_cells = " << cfg.cal_options.radial_cells
     << "\nexact_sides = " << b(cfg.cal_options.exact_sides) << "\n\n";

  const auto& m = cfg.sampling;
  os << "[verify]\n"
     << "tube_columns = " << m.tube_columns << "\nlog_columns_per_side = " << m.log_columns_per_side
     << "\ndomain_columns = " << m.domain_columns << "\nrays = " << m.rays
     << "\nz_nodes = " << m.z_nodes << "\nslab_nodes = " << m.slab_nodes
     << "\ngamma_points = " << m.gamma_points << "\nboundary_points = " << m.boundary_points
     << "\ne_quad = " << m.e_quad << "\nf_nodes = " << m.f_nodes << "\nf_columns = " << m.f_columns
     << "\nbox_columns = " << m.box_columns << "\nmidpoint_nodes = " << m.midpoint_nodes
     << "\nd_tol = " << d(m.d_tol) << "\ne_tol = " << d(m.e_tol) << "\nf_tol = " << d(m.f_tol)
     << "\ng_tol = " << d(m.g_tol) << "\nsmooth_order = " << d(m.smooth_order)
     << "\nstraddle_order = " << d(m.straddle_order) << "\nflux_floor = " << d(m.flux_floor)
     << "\n\n";

  os << "[scan]\nbeta_lo = " << d(cfg.scan_lo) << "\nbeta_hi = " << d(cfg.scan_hi)
     << "\nbisections = " << cfg.scan_bisections << "\n\n";

  os << "[scaling]\nbetas = " << list(cfg.scaling_betas)
     << "\nsup_slope_max = " << d(cfg.scaling_sup_slope_max)
     << "\ngrad_ratio_max = " << d(cfg.scaling_grad_ratio_max)
     << "\nhess_slope_max = " << d(cfg.scaling_hess_slope_max) << "\n\n";

  os << "[evolution]\ndelta = " << d(cfg.delta) << "\nT = " << d(cfg.horizon)
     << "\nsnapshot_every = " << cfg.snapshot_every << "\nprobe_every = " << cfg.probe_every
     << "\ntol = " << d(cfg.evolution_tol) << "\n\n";

  os << "[probe]\nts = " << list(cfg.probe_ts) << "\n\n";

  os << "[output]\ndirectory = " << cfg.out_dir << "\nemit_fields = " << b(cfg.emit_fields)
     << "\n";
  return os.str();
}

}  // namespace mslab::cli
