#include "bifluid/thermo.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

namespace bifluid {

namespace {

// (R^g - R)/(g - 1), or R ln R when g == 1.
double power_potential(double r, double g) {
  if (r <= 0.0) return 0.0;
  if (std::abs(g - 1.0) < 1e-14) return r * std::log(r);
  return (std::pow(r, g) - r) / (g - 1.0);
}

// Z^g/(g-1), or Z ln Z when g == 1.
double convex_power(double z, double g) {
  if (z <= 0.0) return 0.0;
  if (std::abs(g - 1.0) < 1e-14) return z * std::log(z);
  return std::pow(z, g) / (g - 1.0);
}

double safe_pow(double x, double e) { return x <= 0.0 ? 0.0 : std::pow(x, e); }

// Adaptive Simpson on [a, b].
struct Simpson {
  const std::function<double(double)>& fn;
  int depth_limit;
  double worst_error = 0.0;
  bool failed = false;

  double rule(double a, double fa, double /*m*/, double fm, double b, double fb) const {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double recurse(double a, double fa, double b, double fb, double m, double fm, double whole,
                 double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = rule(a, fa, lm, flm, m, fm);
    const double right = rule(m, fm, rm, frm, b, fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
      failed = failed || std::abs(delta) > 15.0 * tol;
      worst_error = std::max(worst_error, std::abs(delta) / 15.0);
      return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
      worst_error = std::max(worst_error, std::abs(delta) / 15.0);
      return left + right + delta / 15.0;
    }
    return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

PressureLaw PressureLaw::isentropic(double a_plus, double a_minus, double gamma_plus,
                                    double gamma_minus) {
  if (!(a_plus >= 0.0) || !(a_minus >= 0.0)) {
    throw std::invalid_argument("isentropic law: coefficients must be nonnegative");
  }
  if (!(gamma_plus > 0.0) || !(gamma_minus > 0.0)) {
    throw std::invalid_argument("isentropic law: exponents must be positive");
  }
  PressureLaw law;
  law.kind_ = Kind::Isentropic;
  law.a_plus_ = a_plus;
  law.a_minus_ = a_minus;
  law.gamma_plus_ = gamma_plus;
  law.gamma_minus_ = gamma_minus;
  law.gamma_ = gamma_plus;
  law.beta_ = gamma_minus;
  return law;
}

PressureLaw PressureLaw::pure(double a, double gamma) {
  return isentropic(a, 0.0, gamma, 2.0);
}

PressureLaw PressureLaw::custom(std::function<double(double, double)> p,
                                std::function<double(double, double)> dp_dr,
                                std::function<double(double, double)> dp_dz, double gamma,
                                double beta) {
  PressureLaw law;
  law.kind_ = Kind::Custom;
  law.p_ = std::move(p);
  law.dp_dr_ = std::move(dp_dr);
  law.dp_dz_ = std::move(dp_dz);
  law.gamma_ = gamma;
  law.beta_ = beta;
  return law;
}

double PressureLaw::gamma_bog() const { return std::min(2.0 * gamma_ / 3.0 - 1.0, gamma_ / 2.0); }

double PressureLaw::value(double r, double z) const {
  if (kind_ == Kind::Custom) return p_(r, z);
  return a_plus_ * safe_pow(r, gamma_plus_) + a_minus_ * safe_pow(z, gamma_minus_);
}

double PressureLaw::d_dr(double r, double z) const {
  if (kind_ == Kind::Custom) return dp_dr_(r, z);
  if (r <= 0.0) return gamma_plus_ == 1.0 ? a_plus_ : 0.0;
  return a_plus_ * gamma_plus_ * std::pow(r, gamma_plus_ - 1.0);
}

double PressureLaw::d_dz(double r, double z) const {
  if (kind_ == Kind::Custom) return dp_dz_(r, z);
  if (z <= 0.0) return gamma_minus_ == 1.0 ? a_minus_ : 0.0;
  return a_minus_ * gamma_minus_ * std::pow(z, gamma_minus_ - 1.0);
}

double pressure(const PressureLaw& law, double r, double z) {
  if (r < 0.0 || z < 0.0) throw std::invalid_argument("pressure: negative density");
  return law.value(r, z);
}

double artificial_exponent_bound(const PressureLaw& law) {
  return std::max({4.5, law.beta(), law.gamma()});
}

double pressure_delta(const PressureLaw& law, double r, double z, double delta, double c,
                      bool allow_small_exponent) {
  if (delta < 0.0) throw std::invalid_argument("pressure_delta: delta must be nonnegative");
  if (!allow_small_exponent && !(c > artificial_exponent_bound(law))) {
    throw std::invalid_argument(fmt::format(
        "pressure_delta: exponent c = {} violates c > max(9/2, beta, gamma) = {}", c,
        artificial_exponent_bound(law)));
  }
  const double p = pressure(law, r, z);
  if (delta == 0.0) return p;
  return p + delta * (safe_pow(r, c) + safe_pow(z, c));
}

QuadratureResult helmholtz_quadrature(const PressureLaw& law, double r, double z,
                                      double rel_tol) {
  if (r < 0.0 || z < 0.0) throw std::invalid_argument("helmholtz: negative density");
  if (r == 0.0) return {0.0, 0.0};
  if (r == 1.0) return {0.0, 0.0};
  const double ratio = z / r;
  const std::function<double(double)> integrand = [&](double s) {
    return law.value(s, s * ratio) / (s * s);
  };
  const double a = std::min(1.0, r);
  const double b = std::max(1.0, r);
  const double sign = r >= 1.0 ? 1.0 : -1.0;
  Simpson simpson{integrand, 50};
  const double fa = integrand(a);
  const double fb = integrand(b);
  const double m = 0.5 * (a + b);
  const double fm = integrand(m);
  const double whole = simpson.rule(a, fa, m, fm, b, fb);
  // Scale the absolute target by a coarse magnitude of the integral.
  const double scale = std::max(std::abs(whole), 1e-300);
  const double integral = simpson.recurse(a, fa, b, fb, m, fm, whole, rel_tol * scale, 50);
  const double estimate = r * simpson.worst_error;
  if (simpson.failed) {
    throw QuadratureError(
        fmt::format("helmholtz quadrature did not converge at (R,Z)=({},{})", r, z), estimate);
  }
  return {sign * r * integral, estimate};
}

double helmholtz(const PressureLaw& law, double r, double z) {
  if (r < 0.0 || z < 0.0) throw std::invalid_argument("helmholtz: negative density");
  if (r == 0.0) return 0.0;
  if (law.kind() == PressureLaw::Kind::Custom) return helmholtz_quadrature(law, r, z).value;

  double h = law.a_plus() * power_potential(r, law.gamma_plus());
  if (law.a_minus() != 0.0 && z > 0.0) {
    const double g = law.gamma_minus();
    if (std::abs(g - 1.0) < 1e-14) {
      h += law.a_minus() * z * std::log(r);
    } else {
      const double zg = std::pow(z, g);
      h += law.a_minus() * (zg - zg * std::pow(r, 1.0 - g)) / (g - 1.0);
    }
  }
  return h;
}

double helmholtz_pde_residual(const PressureLaw& law, double r, double z, double step) {
  const double hr = step * std::max(1.0, r);
  const double dh_dr = (helmholtz(law, r + hr, z) - helmholtz(law, r - hr, z)) / (2.0 * hr);
  double z_dh_dz = 0.0;
  if (z > 0.0) {
    const double hz = step * std::max(1.0, z);
    if (z > hz) {
      z_dh_dz = z * (helmholtz(law, r, z + hz) - helmholtz(law, r, z - hz)) / (2.0 * hz);
    } else {
      z_dh_dz = z * (helmholtz(law, r, z + hz) - helmholtz(law, r, z)) / hz;
    }
  }
  return std::abs(r * dh_dr + z_dh_dz - helmholtz(law, r, z) - law.value(r, z));
}

// ---------------------------------------------------------------------------

double EnergyPotential::value(double r, double z) const {
  double h = 0.0;
  if (law->kind() == PressureLaw::Kind::Custom) {
    h = helmholtz(*law, r, z);
  } else {
    h = law->a_plus() * power_potential(r, law->gamma_plus()) +
        law->a_minus() * convex_power(z, law->gamma_minus());
  }
  if (delta != 0.0) h += delta / (c - 1.0) * (safe_pow(r, c) + safe_pow(z, c));
  return h;
}

Vec2 EnergyPotential::gradient(double r, double z) const {
  Vec2 g{};
  if (law->kind() == PressureLaw::Kind::Custom) {
    const double hr = 1e-6 * std::max(1.0, r);
    const double hz = 1e-6 * std::max(1.0, z);
    g[0] = (helmholtz(*law, r + hr, z) - helmholtz(*law, std::max(r - hr, 0.0), z)) /
           (r + hr - std::max(r - hr, 0.0));
    g[1] = (helmholtz(*law, r, z + hz) - helmholtz(*law, r, std::max(z - hz, 0.0))) /
           (z + hz - std::max(z - hz, 0.0));
  } else {
    const double gp = law->gamma_plus();
    const double gm = law->gamma_minus();
    if (std::abs(gp - 1.0) < 1e-14) {
      g[0] = law->a_plus() * (std::log(r) + 1.0);
    } else {
      g[0] = law->a_plus() * (gp * safe_pow(r, gp - 1.0) - 1.0) / (gp - 1.0);
    }
    if (law->a_minus() != 0.0) {
      if (std::abs(gm - 1.0) < 1e-14) {
        g[1] = law->a_minus() * (std::log(z) + 1.0);
      } else {
        g[1] = law->a_minus() * gm * safe_pow(z, gm - 1.0) / (gm - 1.0);
      }
    }
  }
  if (delta != 0.0) {
    g[0] += delta * c / (c - 1.0) * safe_pow(r, c - 1.0);
    g[1] += delta * c / (c - 1.0) * safe_pow(z, c - 1.0);
  }
  return g;
}

Mat2 EnergyPotential::hessian(double r, double z) const {
  Mat2 hs{};
  if (law->kind() == PressureLaw::Kind::Custom) {
    const double hr = 1e-4 * std::max(1.0, r);
    const double hz = 1e-4 * std::max(1.0, z);
    const Vec2 gr_p = gradient(r + hr, z);
    const Vec2 gr_m = gradient(r - hr, z);
    const Vec2 gz_p = gradient(r, z + hz);
    const Vec2 gz_m = gradient(r, z - hz);
    hs[0][0] = (gr_p[0] - gr_m[0]) / (2 * hr);
    hs[1][1] = (gz_p[1] - gz_m[1]) / (2 * hz);
    hs[0][1] = hs[1][0] = 0.5 * ((gr_p[1] - gr_m[1]) / (2 * hr) + (gz_p[0] - gz_m[0]) / (2 * hz));
  } else {
    const double gp = law->gamma_plus();
    const double gm = law->gamma_minus();
    hs[0][0] = law->a_plus() * gp * safe_pow(r, gp - 2.0);
    if (law->a_minus() != 0.0) hs[1][1] = law->a_minus() * gm * safe_pow(z, gm - 2.0);
  }
  if (delta != 0.0) {
    hs[0][0] += delta * c * safe_pow(r, c - 2.0);
    hs[1][1] += delta * c * safe_pow(z, c - 2.0);
  }
  return hs;
}

double EnergyPotential::bregman(double ra, double za, double rb, double zb) const {
  const Vec2 g = gradient(rb, zb);
  return value(ra, za) - value(rb, zb) - g[0] * (ra - rb) - g[1] * (za - zb);
}

// ---------------------------------------------------------------------------

Closure Closure::isentropic(double gamma_plus, double gamma_minus) {
  if (!(gamma_plus > 0.0) || !(gamma_minus > 0.0)) {
    throw std::invalid_argument("closure: exponents must be positive");
  }
  Closure c;
  c.preset_ = true;
  c.gamma_plus_ = gamma_plus;
  c.gamma_minus_ = gamma_minus;
  return c;
}

Closure Closure::custom(std::function<double(double)> f, std::function<double(double)> g) {
  Closure c;
  c.preset_ = false;
  c.f_ = std::move(f);
  c.g_ = std::move(g);
  return c;
}

double Closure::f(double alpha) const {
  if (!preset_) return f_(alpha);
  return std::pow(alpha, 1.0 / gamma_plus_ - 1.0);
}

double Closure::g(double alpha) const {
  if (!preset_) return g_(alpha);
  return std::pow(1.0 - alpha, 1.0 / gamma_minus_ - 1.0);
}

namespace {

double invert_monotone(const std::function<double(double)>& fn, double target, double lo,
                       double hi) {
  const double flo = fn(lo) - target;
  const double fhi = fn(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
  const auto bracket = boost::math::tools::toms748_solve(
      [&](double a) { return fn(a) - target; }, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace

double Closure::big_f_inverse(double value, double lo, double hi, bool* clamped) const {
  const double a = big_f(lo);
  const double b = big_f(hi);
  const double vmin = std::min(a, b);
  const double vmax = std::max(a, b);
  const double v = std::clamp(value, vmin, vmax);
  if (clamped) *clamped = (v != value);
  if (preset_ && gamma_plus_ != 1.0) {
    // F(alpha) = alpha^{1 - 1/g+}
    const double alpha = std::pow(v, gamma_plus_ / (gamma_plus_ - 1.0));
    return std::clamp(alpha, lo, hi);
  }
  return invert_monotone([this](double s) { return big_f(s); }, v, lo, hi);
}

double Closure::big_g_inverse(double value, double lo, double hi, bool* clamped) const {
  const double a = big_g(lo);
  const double b = big_g(hi);
  const double vmin = std::min(a, b);
  const double vmax = std::max(a, b);
  const double v = std::clamp(value, vmin, vmax);
  if (clamped) *clamped = (v != value);
  if (preset_ && gamma_minus_ != 1.0) {
    // G(alpha) = (1 - alpha)^{1 - 1/g-}
    const double alpha = 1.0 - std::pow(v, gamma_minus_ / (gamma_minus_ - 1.0));
    return std::clamp(alpha, lo, hi);
  }
  return invert_monotone([this](double s) { return big_g(s); }, v, lo, hi);
}

double closure_eval(const Closure& cl, ClosureFunction which, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(fmt::format("closure_eval: alpha = {} outside (0,1)", alpha));
  }
  switch (which) {
    case ClosureFunction::SmallF: return cl.f(alpha);
    case ClosureFunction::SmallG: return cl.g(alpha);
    case ClosureFunction::BigF: return cl.big_f(alpha);
    case ClosureFunction::BigG: return cl.big_g(alpha);
  }
  return 0.0;
}

ClosureBounds closure_bounds(const Closure& cl, double alpha_lo, double alpha_hi) {
  if (!(alpha_lo > 0.0 && alpha_hi < 1.0 && alpha_lo <= alpha_hi)) {
    throw std::invalid_argument("closure_bounds: need 0 < alpha_lo <= alpha_hi < 1");
  }
  ClosureBounds b;
  b.alpha_lo = alpha_lo;
  b.alpha_hi = alpha_hi;
  const double f1 = cl.big_f(alpha_lo);
  const double f2 = cl.big_f(alpha_hi);
  const double g1 = cl.big_g(alpha_lo);
  const double g2 = cl.big_g(alpha_hi);
  b.f_lo = std::min(f1, f2);
  b.f_hi = std::max(f1, f2);
  b.g_lo = std::min(g1, g2);
  b.g_hi = std::max(g1, g2);
  return b;
}

// ---------------------------------------------------------------------------

double truncation_T(double k, double s) {
  const double x = s / k;
  if (x <= 1.0) return s;
  if (x >= 3.0) return 2.0 * k;
  return k * (x - 0.25 * (x - 1.0) * (x - 1.0));
}

double truncation_T_derivative(double k, double s) {
  const double x = s / k;
  if (x <= 1.0) return 1.0;
  if (x >= 3.0) return 0.0;
  return 1.0 - 0.5 * (x - 1.0);
}

namespace {

// Antiderivative of T_k(t)/t^2 on piece `piece` (0: [0,k], 1: [k,3k], 2: [3k,inf)).
double t_over_t2_primitive(int piece, double k, double t) {
  switch (piece) {
    case 0: return std::log(t);
    case 1: return 1.5 * std::log(t) - t / (4.0 * k) + k / (4.0 * t);
    default: return -2.0 * k / t;
  }
}

// \int_1^s T_k(t)/t^2 dt, split at the break points k and 3k.
double t_over_t2_integral(double k, double s) {
  if (s <= 0.0) return -std::numeric_limits<double>::infinity();
  const double lo = std::min(1.0, s);
  const double hi = std::max(1.0, s);
  const double edges[4] = {0.0, k, 3.0 * k, std::numeric_limits<double>::infinity()};
  double total = 0.0;
  for (int piece = 0; piece < 3; ++piece) {
    const double a = std::max(lo, edges[piece]);
    const double b = std::min(hi, edges[piece + 1]);
    if (b > a) total += t_over_t2_primitive(piece, k, b) - t_over_t2_primitive(piece, k, a);
  }
  return s >= 1.0 ? total : -total;
}

}  // namespace

double truncation_L(double k, double s) {
  if (s <= 0.0) return 0.0;
  return s * t_over_t2_integral(k, s);
}

double truncation_L_derivative(double k, double s) {
  if (s <= 0.0) return -std::numeric_limits<double>::infinity();
  return t_over_t2_integral(k, s) + truncation_T(k, s) / s;
}

// ---------------------------------------------------------------------------

MonotoneDecompositionReport monotone_decomposition_check(const PressureLaw& law,
                                                         const std::vector<double>& ratios,
                                                         const std::vector<double>& r_samples) {
  MonotoneDecompositionReport rep;
  std::vector<double> rs = r_samples;
  std::sort(rs.begin(), rs.end());
  double d_max = std::numeric_limits<double>::infinity();
  const double g = law.gamma();
  for (double s : ratios) {
    for (std::size_t i = 0; i < rs.size(); ++i) {
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        const double r1 = rs[i];
        const double r2 = rs[j];
        if (r2 <= r1) continue;
        const double p1 = law.value(r1, r1 * s);
        const double p2 = law.value(r2, r2 * s);
        if (p2 < p1) {
          rep.monotone = false;
          rep.violations.push_back({r1, r2, s});
        }
        const double dg = std::pow(r2, g) - std::pow(r1, g);
        if (dg > 0.0) d_max = std::min(d_max, (p2 - p1) / dg);
      }
    }
  }
  rep.d_max = std::isfinite(d_max) ? d_max : 0.0;
  return rep;
}

std::vector<HypothesisCheck> check_pressure_hypotheses(const PressureLaw& law, double a_lo,
                                                       double a_hi, double r_max, int samples) {
  std::vector<HypothesisCheck> out;
  const double g = law.gamma();
  const double beta = law.beta();

  // Sample the open cone a_lo < Z/R < a_hi, R in (0, r_max].
  struct Pt {
    double r, z;
  };
  std::vector<Pt> pts;
  for (int i = 1; i <= samples; ++i) {
    const double r = r_max * std::pow(static_cast<double>(i) / samples, 2.0);
    for (int j = 1; j <= samples; ++j) {
      const double t = static_cast<double>(j) / (samples + 1);
      const double s = a_lo + t * (a_hi - a_lo);
      pts.push_back({r, s * r});
    }
  }

  {
    HypothesisCheck c{"adiabatic-exponent", g >= 2.0, fmt::format("gamma = {} (need gamma >= 2)", g)};
    out.push_back(c);
  }
  {
    const double p00 = law.value(0.0, 0.0);
    out.push_back({"pressure-regularity", p00 == 0.0, fmt::format("P(0,0) = {}", p00)});
  }

  auto fit_growth = [&](const char* tag, auto&& fn) {
    double upper = 0.0;
    double lower = std::numeric_limits<double>::infinity();
    double lower_floor = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      const double q = std::pow(p.r, g) + std::pow(p.z, beta);
      const double v = fn(p.r, p.z);
      upper = std::max(upper, v / (q + 1.0));
      if (q > 1.0) {
        lower = std::min(lower, v / (q - 1.0));
      } else if (q < 1.0) {
        lower_floor = std::max(lower_floor, v / (q - 1.0));
      }
    }
    HypothesisCheck c;
    c.tag = tag;
    c.constant_lower = std::isfinite(lower) ? lower : 0.0;
    c.constant_upper = upper;
    c.passed = c.constant_lower > 0.0 && c.constant_lower >= lower_floor && std::isfinite(upper);
    c.detail = fmt::format("fitted c1 = {:.6g}, c2 = {:.6g}", c.constant_lower, upper);
    out.push_back(c);
  };
  fit_growth("pressure-growth", [&](double r, double z) { return law.value(r, z); });

  {
    HypothesisCheck c{"pressure-monotone-z", true, ""};
    double worst = 0.0;
    for (const auto& p : pts) worst = std::min(worst, law.d_dz(p.r, p.z));
    const double gamma_hi = std::max(1.0, beta);
    const double limit = g + law.gamma_bog();
    c.passed = worst >= 0.0 && gamma_hi < limit;
    c.detail = fmt::format("min dP/dZ = {:.6g}; gamma_hi = {} (need < gamma + gamma_Bog = {:.6g})",
                           worst, gamma_hi, limit);
    out.push_back(c);
  }
  {
    HypothesisCheck c{"pressure-monotone-r", true, ""};
    double cmin = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) cmin = std::min(cmin, law.d_dr(p.r, p.z) / std::pow(p.r, g - 1.0));
    c.constant_lower = cmin;
    c.passed = cmin > 0.0;
    c.detail = fmt::format("fitted dP/dR >= {:.6g} R^(gamma-1)", cmin);
    out.push_back(c);
  }
  {
    EnergyPotential pot{&law, 0.0, 6.0};
    HypothesisCheck c{"helmholtz-convexity", true, ""};
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      const Mat2 hs = pot.hessian(p.r, p.z);
      const double tr = hs[0][0] + hs[1][1];
      const double det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
      const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
      worst = std::min(worst, 0.5 * tr - disc);
    }
    const double scale = 1.0;
    c.passed = worst >= -1e-9 * scale;
    c.constant_lower = worst;
    c.detail = fmt::format("min Hessian eigenvalue of the energy potential = {:.6g}", worst);
    out.push_back(c);
  }
  fit_growth("helmholtz-growth", [&](double r, double z) { return EnergyPotential{&law, 0.0, 6.0}.value(r, z); });
  return out;
}

}  // namespace bifluid
