#include "bifluid/scenario.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace bifluid {

double FieldSpec::eval(const Vec2& x, const Vec2& lengths, int dim) const {
  const double pi = std::numbers::pi;
  double v = value + slope_x * x[0] / lengths[0];
  if (dim == 2) v += slope_y * x[1] / lengths[1];
  double s = std::sin(pi * x[0] / lengths[0]);
  if (dim == 2) s *= std::sin(pi * x[1] / lengths[1]);
  v += sine * s;
  for (const auto& b : bumps) {
    double d2 = (x[0] - b.center[0]) * (x[0] - b.center[0]);
    if (dim == 2) d2 += (x[1] - b.center[1]) * (x[1] - b.center[1]);
    v += b.amplitude * std::exp(-d2 / (b.width * b.width));
  }
  return v;
}

std::vector<double> FieldSpec::sample(const std::vector<Vec2>& points, const Vec2& lengths, int dim,
                                      std::uint64_t seed) const {
  std::vector<double> out(points.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = eval(points[i], lengths, dim);
    if (noise != 0.0) out[i] += noise * u(rng);
  }
  return out;
}

Mesh Scenario::mesh() const {
  return dim == 1 ? Mesh::interval(nx, lx) : Mesh::rectangle(nx, ny, lx, ly);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto m = node.Mark();
    const int line = m.line >= 0 ? m.line + 1 : 0;
    const int col = m.column >= 0 ? m.column + 1 : 0;
    throw ScenarioParseError(fmt::format("{}:{}:{}: {}", origin_, line, col, msg), line, col);
  }

  void expect_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", what));
  }

  void allow(const YAML::Node& node, const std::string& what, std::initializer_list<const char*> keys) const {
    expect_map(node, what);
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, what));
    }
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a number", what));
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' must be a number, got '{}'", what, node.Scalar()));
    }
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be an integer", what));
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' must be an integer, got '{}'", what, node.Scalar()));
    }
  }

  bool boolean(const YAML::Node& node, const std::string& what) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' must be true or false", what));
    }
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a string", what));
    return node.Scalar();
  }

  /// A number or a list of one or two numbers.
  std::vector<double> numbers(const YAML::Node& node, const std::string& what) const {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(number(node, what));
    } else if (node.IsSequence()) {
      for (const auto& v : node) out.push_back(number(v, what));
    } else {
      fail(node, fmt::format("'{}' must be a number or a list", what));
    }
    if (out.empty() || out.size() > 2) fail(node, fmt::format("'{}' needs one or two entries", what));
    return out;
  }

  void opt(const YAML::Node& map, const char* key, double& target, const std::string& where) const {
    if (const auto n = map[key]) target = number(n, where + "." + key);
  }
  void opt(const YAML::Node& map, const char* key, int& target, const std::string& where) const {
    if (const auto n = map[key]) target = integer(n, where + "." + key);
  }
  void opt(const YAML::Node& map, const char* key, bool& target, const std::string& where) const {
    if (const auto n = map[key]) target = boolean(n, where + "." + key);
  }

  FieldSpec field(const YAML::Node& node, const std::string& what) const {
    FieldSpec f;
    if (node.IsScalar()) {
      f.value = number(node, what);
      return f;
    }
    allow(node, what, {"value", "slope_x", "slope_y", "sine", "noise", "bumps"});
    opt(node, "value", f.value, what);
    opt(node, "slope_x", f.slope_x, what);
    opt(node, "slope_y", f.slope_y, what);
    opt(node, "sine", f.sine, what);
    opt(node, "noise", f.noise, what);
    if (const auto bumps = node["bumps"]) {
      if (!bumps.IsSequence()) fail(bumps, fmt::format("'{}.bumps' must be a list", what));
      for (const auto& b : bumps) {
        allow(b, what + ".bumps[]", {"center", "width", "amplitude"});
        FieldSpec::Bump bump;
        if (const auto c = b["center"]) {
          const auto v = numbers(c, what + ".bumps[].center");
          bump.center = {v[0], v.size() > 1 ? v[1] : 0.0};
        }
        opt(b, "width", bump.width, what + ".bumps[]");
        opt(b, "amplitude", bump.amplitude, what + ".bumps[]");
        if (!(bump.width > 0.0)) fail(b, "bump width must be positive");
        f.bumps.push_back(bump);
      }
    }
    return f;
  }

  ComponentProfile component(const YAML::Node& node, const std::string& what) const {
    ComponentProfile c;
    if (node.IsScalar()) {
      c.base = number(node, what);
      return c;
    }
    allow(node, what, {"base", "slope_x", "slope_y", "sine"});
    opt(node, "base", c.base, what);
    opt(node, "slope_x", c.slope_x, what);
    opt(node, "slope_y", c.slope_y, what);
    opt(node, "sine", c.sine, what);
    return c;
  }

  std::array<ComponentProfile, 2> velocity(const YAML::Node& node, const std::string& what) const {
    allow(node, what, {"x", "y"});
    std::array<ComponentProfile, 2> v{};
    if (const auto x = node["x"]) v[0] = component(x, what + ".x");
    if (const auto y = node["y"]) v[1] = component(y, what + ".y");
    return v;
  }

 private:
  std::string origin_;
};

Lift::Kind lift_kind(const Parser& p, const YAML::Node& node) {
  const auto s = p.text(node, "lift.kind");
  if (s == "blend") return Lift::Kind::Blend;
  if (s == "full") return Lift::Kind::Full;
  p.fail(node, fmt::format("lift.kind must be 'blend' or 'full', got '{}'", s));
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Parser p(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioParseError(fmt::format("{}:{}:{}: {}", origin, e.mark.line + 1, e.mark.column + 1, e.msg),
                             e.mark.line + 1, e.mark.column + 1);
  }
  Scenario s;
  s.source = text;
  if (root.IsNull()) throw ScenarioParseError(fmt::format("{}: empty scenario", origin), 0, 0);
  p.allow(root, "scenario",
          {"name", "description", "mesh", "pressure", "closure", "volume_fraction", "cone",
           "ratio_floor", "boundary", "initial", "scheme", "lift", "output", "seed"});

  if (const auto n = root["name"]) s.name = p.text(n, "name");
  if (const auto n = root["description"]) s.description = p.text(n, "description");

  if (const auto m = root["mesh"]) {
    p.allow(m, "mesh", {"cells", "length"});
    if (const auto c = m["cells"]) {
      const auto v = p.numbers(c, "mesh.cells");
      s.dim = static_cast<int>(v.size());
      for (double x : v) {
        if (x != std::floor(x)) p.fail(c, "mesh.cells must be integers");
      }
      s.nx = static_cast<int>(v[0]);
      s.ny = s.dim == 2 ? static_cast<int>(v[1]) : 1;
    }
    if (const auto l = m["length"]) {
      const auto v = p.numbers(l, "mesh.length");
      if (static_cast<int>(v.size()) != s.dim) p.fail(l, "mesh.length must match the number of cell counts");
      s.lx = v[0];
      s.ly = s.dim == 2 ? v[1] : 1.0;
    }
  }

  if (const auto n = root["pressure"]) {
    p.allow(n, "pressure", {"a_plus", "a_minus", "gamma_plus", "gamma_minus"});
    p.opt(n, "a_plus", s.a_plus, "pressure");
    p.opt(n, "a_minus", s.a_minus, "pressure");
    p.opt(n, "gamma_plus", s.gamma_plus, "pressure");
    p.opt(n, "gamma_minus", s.gamma_minus, "pressure");
  }
  s.closure_gamma_plus = s.gamma_plus;
  s.closure_gamma_minus = s.gamma_minus;
  if (const auto n = root["closure"]) {
    p.allow(n, "closure", {"gamma_plus", "gamma_minus"});
    p.opt(n, "gamma_plus", s.closure_gamma_plus, "closure");
    p.opt(n, "gamma_minus", s.closure_gamma_minus, "closure");
  }

  if (const auto n = root["volume_fraction"]) {
    p.allow(n, "volume_fraction", {"min", "max"});
    p.opt(n, "min", s.alpha_lo, "volume_fraction");
    p.opt(n, "max", s.alpha_hi, "volume_fraction");
  }
  if (const auto n = root["cone"]) {
    const auto v = p.numbers(n, "cone");
    if (v.size() != 2) p.fail(n, "cone needs [a_lo, a_hi]");
    s.cone = std::array<double, 2>{v[0], v[1]};
  }
  if (const auto n = root["ratio_floor"]) s.ratio_floor = p.number(n, "ratio_floor");

  if (const auto b = root["boundary"]) {
    p.allow(b, "boundary", {"velocity", "alpha", "rho", "z"});
    if (const auto v = b["velocity"]) s.boundary_velocity = p.velocity(v, "boundary.velocity");
    if (const auto v = b["alpha"]) s.alpha_b = p.field(v, "boundary.alpha");
    else s.alpha_b.value = 0.5;
    if (const auto v = b["rho"]) s.rho_b = p.field(v, "boundary.rho");
    else s.rho_b.value = 1.0;
    if (const auto v = b["z"]) s.z_b = p.field(v, "boundary.z");
    else s.z_b.value = 1.0;
  } else {
    s.alpha_b.value = 0.5;
    s.rho_b.value = 1.0;
    s.z_b.value = 1.0;
  }
  if (const auto b = root["initial"]) {
    p.allow(b, "initial", {"velocity", "alpha", "rho", "z"});
    if (const auto v = b["velocity"]) s.initial_velocity = p.velocity(v, "initial.velocity");
    if (const auto v = b["alpha"]) s.alpha0 = p.field(v, "initial.alpha");
    else s.alpha0.value = 0.5;
    if (const auto v = b["rho"]) s.rho0 = p.field(v, "initial.rho");
    else s.rho0.value = 1.0;
    if (const auto v = b["z"]) s.z0 = p.field(v, "initial.z");
    else s.z0.value = 1.0;
  } else {
    s.alpha0.value = 0.5;
    s.rho0.value = 1.0;
    s.z0.value = 1.0;
  }

  if (const auto n = root["scheme"]) {
    p.allow(n, "scheme",
            {"eps", "delta", "c_exp", "modes", "dt", "steps", "t_end", "cfl", "mu", "lambda", "theta",
             "tol_fp", "max_iter", "convection", "pressure", "frozen_densities", "allow_small_exponent",
             "abort_on_nonconvergence"});
    auto& q = s.params;
    p.opt(n, "eps", q.eps, "scheme");
    p.opt(n, "delta", q.delta, "scheme");
    p.opt(n, "c_exp", q.c_exp, "scheme");
    if (const auto m = n["modes"]) {
      const auto v = p.numbers(m, "scheme.modes");
      q.modes_x = static_cast<int>(v[0]);
      q.modes_y = v.size() > 1 ? static_cast<int>(v[1]) : 1;
    }
    p.opt(n, "dt", q.dt, "scheme");
    p.opt(n, "steps", q.steps, "scheme");
    p.opt(n, "t_end", q.t_end, "scheme");
    p.opt(n, "cfl", q.cfl, "scheme");
    p.opt(n, "mu", q.viscosity.mu, "scheme");
    p.opt(n, "lambda", q.viscosity.lambda, "scheme");
    p.opt(n, "theta", q.theta, "scheme");
    p.opt(n, "tol_fp", q.tol_fp, "scheme");
    p.opt(n, "max_iter", q.max_iter, "scheme");
    p.opt(n, "convection", q.convection, "scheme");
    p.opt(n, "pressure", q.pressure, "scheme");
    p.opt(n, "frozen_densities", q.frozen_densities, "scheme");
    p.opt(n, "allow_small_exponent", q.allow_small_exponent, "scheme");
    p.opt(n, "abort_on_nonconvergence", q.abort_on_nonconvergence, "scheme");
  }
  if (s.dim == 1) s.params.modes_y = 1;

  if (const auto n = root["lift"]) {
    p.allow(n, "lift", {"kind", "width"});
    if (const auto k = n["kind"]) s.lift_kind = lift_kind(p, k);
    p.opt(n, "width", s.lift_width, "lift");
  }
  if (const auto n = root["output"]) {
    p.allow(n, "output", {"snapshots"});
    p.opt(n, "snapshots", s.snapshots, "output");
  }
  if (const auto n = root["seed"]) {
    try {
      s.seed = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      p.fail(n, "seed must be a nonnegative integer");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open scenario '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path);
  const auto issues = validate_scenario(s);
  if (!issues.empty()) throw ValidationError(issues);
  return s;
}

// ---------------------------------------------------------------------------
// Sampling and validation

namespace {

struct Sampled {
  std::array<std::vector<double>, 4> initial;   // rho, z, R, Z at cells
  std::array<std::vector<double>, 4> boundary;  // per boundary face
  std::vector<double> alpha0;
  std::vector<double> alpha_b;
};

Sampled sample(const Scenario& s, const Mesh& mesh, const Closure& cl) {
  Sampled out;
  std::vector<Vec2> cells(mesh.cell_count());
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = mesh.center(k);
  std::vector<Vec2> faces;
  for (const auto& f : mesh.boundary_faces()) faces.push_back(f.center);
  const Vec2 len = s.lengths();

  // Distinct streams per field keep the noise reproducible and independent.
  out.alpha0 = s.alpha0.sample(cells, len, s.dim, s.seed * 8 + 1);
  out.initial[0] = s.rho0.sample(cells, len, s.dim, s.seed * 8 + 2);
  out.initial[1] = s.z0.sample(cells, len, s.dim, s.seed * 8 + 3);
  out.alpha_b = s.alpha_b.sample(faces, len, s.dim, s.seed * 8 + 4);
  out.boundary[0] = s.rho_b.sample(faces, len, s.dim, s.seed * 8 + 5);
  out.boundary[1] = s.z_b.sample(faces, len, s.dim, s.seed * 8 + 6);

  auto convert = [&](const std::vector<double>& alpha, std::array<std::vector<double>, 4>& d) {
    d[2].resize(alpha.size());
    d[3].resize(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const bool ok = alpha[i] > 0.0 && alpha[i] < 1.0;
      d[2][i] = ok ? cl.f(alpha[i]) * d[0][i] : std::numeric_limits<double>::quiet_NaN();
      d[3][i] = ok ? cl.g(alpha[i]) * d[1][i] : std::numeric_limits<double>::quiet_NaN();
    }
  };
  convert(out.alpha0, out.initial);
  convert(out.alpha_b, out.boundary);
  return out;
}

Closure make_closure(const Scenario& s) {
  return Closure::isentropic(s.closure_gamma_plus, s.closure_gamma_minus);
}

PressureLaw make_law(const Scenario& s) {
  return PressureLaw::isentropic(s.a_plus, s.a_minus, s.gamma_plus, s.gamma_minus);
}

std::array<double, 2> data_cone(const Sampled& d) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto scan = [&](const std::array<std::vector<double>, 4>& a) {
    for (std::size_t i = 0; i < a[2].size(); ++i) {
      if (a[2][i] > 0.0) {
        lo = std::min(lo, a[3][i] / a[2][i]);
        hi = std::max(hi, a[3][i] / a[2][i]);
      }
    }
  };
  scan(d.initial);
  scan(d.boundary);
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (lo == hi) {
    // A degenerate cone is widened by a relative hair so that a_lo < a_hi.
    lo *= 1.0 - 1e-9;
    hi *= 1.0 + 1e-9;
  }
  return {lo, hi};
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  if (s.nx < 2 || s.ny < 1 || (s.dim == 2 && s.ny < 2)) {
    out.push_back(fmt::format("[mesh] cell counts must be >= 2 per axis (got {} x {})", s.nx, s.ny));
  }
  if (!(s.lx > 0.0 && s.ly > 0.0)) out.push_back("[mesh] lengths must be positive");
  if (s.params.modes_x >= s.nx || (s.dim == 2 && s.params.modes_y >= s.ny)) {
    out.push_back(fmt::format("[scheme-parameters] modes ({}, {}) must be fewer than cells per axis",
                              s.params.modes_x, s.params.modes_y));
  }
  if (s.snapshots < 1) out.push_back("[output] snapshots must be >= 1");
  if (!(s.a_plus > 0.0) || s.a_minus < 0.0) {
    out.push_back(fmt::format("[pressure-regularity] coefficients need a+ > 0 and a- >= 0 (got {}, {})",
                              s.a_plus, s.a_minus));
  }
  if (!(s.gamma_plus >= 2.0)) {
    out.push_back(fmt::format("[adiabatic-exponent] gamma = {} must be >= 2", s.gamma_plus));
  }
  if (!(s.gamma_minus >= 1.0)) {
    out.push_back(fmt::format("[adiabatic-exponent] beta = {} must be >= 1", s.gamma_minus));
  }
  if (!(s.closure_gamma_plus > 1.0 && s.closure_gamma_minus > 1.0)) {
    out.push_back("[closure] closure exponents must exceed 1");
  }
  if (!(s.alpha_lo > 0.0 && s.alpha_lo < s.alpha_hi && s.alpha_hi < 1.0)) {
    out.push_back(fmt::format("[initial-volume-fraction-range] need 0 < alpha_lo < alpha_hi < 1 (got {}, {})",
                              s.alpha_lo, s.alpha_hi));
  }
  if (s.lift_width <= 0.0) out.push_back("[lift] width must be positive");
  for (const auto& v : s.params.violations(make_law(s))) out.push_back(v);
  if (!out.empty()) return out;

  const Mesh mesh = s.mesh();
  const Closure cl = make_closure(s);
  const Sampled d = sample(s, mesh, cl);
  const double tol = 1e-12;

  auto range_check = [&](const std::vector<double>& a, const char* where) {
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    if (*lo < s.alpha_lo - tol || *hi > s.alpha_hi + tol || std::isnan(*lo)) {
      out.push_back(fmt::format("[initial-volume-fraction-range] {} alpha spans [{:.6g}, {:.6g}] outside [{}, {}]",
                                where, *lo, *hi, s.alpha_lo, s.alpha_hi));
    }
  };
  range_check(d.alpha0, "initial");
  range_check(d.alpha_b, "boundary");

  const char* names[4] = {"rho", "z", "R", "Z"};
  for (int i = 0; i < 4; ++i) {
    const auto m = *std::min_element(d.boundary[i].begin(), d.boundary[i].end());
    if (!(m > 0.0)) {
      out.push_back(fmt::format("[inflow-density-positivity] boundary {} has minimum {:.6g}, must be > 0", names[i], m));
    }
  }
  for (int i = 0; i < 4; ++i) {
    const auto m = *std::min_element(d.initial[i].begin(), d.initial[i].end());
    const bool strict = i == 2;
    if (strict ? !(m > 0.0) : !(m >= 0.0)) {
      out.push_back(fmt::format("[{}] initial {} has minimum {:.6g}",
                                strict ? "adiabatic-exponent" : "cone-membership", names[i], m));
    }
  }
  if (!out.empty()) return out;

  if (s.cone) {
    const auto [a_lo, a_hi] = *s.cone;
    if (!(a_lo >= 0.0 && a_lo < a_hi)) {
      out.push_back(fmt::format("[cone-membership] need 0 <= a_lo < a_hi (got {}, {})", a_lo, a_hi));
    } else {
      auto cone_check = [&](const std::array<std::vector<double>, 4>& a, const char* where) {
        int bad = 0;
        for (std::size_t k = 0; k < a[2].size(); ++k) {
          const double r = a[2][k];
          const double z = a[3][k];
          if (z < a_lo * r - tol * r || z > a_hi * r + tol * r) ++bad;
        }
        if (bad > 0) {
          out.push_back(fmt::format("[cone-membership] {} (R, Z) leaves the cone [{}, {}] at {} points", where,
                                    a_lo, a_hi, bad));
        }
      };
      cone_check(d.initial, "initial");
      cone_check(d.boundary, "boundary");
    }
  }

  // Sampled structural hypotheses of the pressure law over the cone.
  const auto cone = s.cone ? *s.cone : data_cone(d);
  for (const auto& h : check_pressure_hypotheses(make_law(s), cone[0], cone[1])) {
    if (!h.passed) out.push_back(fmt::format("[{}] {}", h.tag, h.detail));
  }
  return out;
}

ProblemSpec to_problem_spec(const Scenario& s) {
  const auto issues = validate_scenario(s);
  if (!issues.empty()) throw ValidationError(issues);
  ProblemSpec p;
  p.mesh = s.mesh();
  p.u_b = VelocityProfile(s.dim, s.lengths(), s.boundary_velocity);
  p.law = make_law(s);
  p.closure = make_closure(s);
  const Sampled d = sample(s, p.mesh, p.closure);
  p.boundary_density = d.boundary;
  p.initial_density = d.initial;
  const auto cone = s.cone ? *s.cone : data_cone(d);
  const auto cb = closure_bounds(p.closure, s.alpha_lo, s.alpha_hi);
  p.bounds = DominationBounds{cone[0], cone[1], cb.f_lo, cb.f_hi, cb.g_lo, cb.g_hi};
  p.alpha_lo = s.alpha_lo;
  p.alpha_hi = s.alpha_hi;
  p.ratio_floor = s.ratio_floor;
  p.params = s.params;
  p.lift_kind = s.lift_kind;
  p.lift_width = s.lift_width;
  if (s.initial_velocity) {
    const VelocityProfile u0(s.dim, s.lengths(), *s.initial_velocity);
    for (std::size_t k = 0; k < p.mesh.cell_count(); ++k) p.initial_velocity.push_back(u0.value(p.mesh.center(k)));
  }
  return p;
}

void apply_overrides(Scenario& s, std::optional<int> cells, std::optional<double> dt) {
  if (cells) {
    const int old = s.nx;
    s.nx = *cells;
    if (s.dim == 2) s.ny = std::max(2, static_cast<int>(std::lround(static_cast<double>(s.ny) * *cells / old)));
  }
  if (dt) {
    s.params.dt = *dt;
    s.params.steps = 0;
  }
}

}  // namespace bifluid
