#include "bifluid/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <random>

namespace bifluid {

// ---------------------------------------------------------------------------
// CertificateReport

namespace {

void push(CertificateReport& r, std::string name, double value, double tol, Certificate::Rule rule,
          bool passed, std::string detail) {
  Certificate c;
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tol;
  c.rule = rule;
  c.passed = passed;
  c.detail = std::move(detail);
  r.entries.push_back(std::move(c));
}

}  // namespace

void CertificateReport::add_abs(std::string name, double value, double tolerance, std::string detail) {
  push(*this, std::move(name), value, tolerance, Certificate::Rule::AbsAtMost,
       std::abs(value) <= tolerance, std::move(detail));
}

void CertificateReport::add_at_least(std::string name, double value, double tolerance,
                                     std::string detail) {
  push(*this, std::move(name), value, tolerance, Certificate::Rule::AtLeast, value >= -tolerance,
       std::move(detail));
}

void CertificateReport::add_info(std::string name, double value, std::string detail) {
  push(*this, std::move(name), value, 0.0, Certificate::Rule::Info, true, std::move(detail));
}

void CertificateReport::add_verdict(std::string name, double value, double tolerance, bool passed,
                                    std::string detail) {
  push(*this, std::move(name), value, tolerance, Certificate::Rule::AtLeast, passed,
       std::move(detail));
}

bool CertificateReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const Certificate& c) { return c.passed; });
}

std::vector<std::string> CertificateReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : entries) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

const Certificate* CertificateReport::find(const std::string& name) const {
  for (const auto& c : entries) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Domination

DominationMargins domination_check(const FluidState& state, const DominationBounds& b,
                                   double tolerance) {
  DominationMargins m;
  m.margin.fill(std::numeric_limits<double>::infinity());
  m.cell.fill(-1);
  const auto& rho = state.density[0];
  const auto& z = state.density[1];
  const auto& big_r = state.density[2];
  const auto& big_z = state.density[3];
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const std::array<double, 6> v{big_z[k] - b.a_lo * big_r[k], b.a_hi * big_r[k] - big_z[k],
                                  rho[k] - b.f_lo * big_r[k],   b.f_hi * big_r[k] - rho[k],
                                  z[k] - b.g_lo * big_z[k],     b.g_hi * big_z[k] - z[k]};
    for (int i = 0; i < 6; ++i) {
      if (v[i] < m.margin[i]) {
        m.margin[i] = v[i];
        m.cell[i] = static_cast<int>(k);
      }
    }
  }
  m.worst = static_cast<int>(std::min_element(m.margin.begin(), m.margin.end()) - m.margin.begin());
  m.min_margin = m.margin[m.worst];
  m.passed = m.min_margin >= -tolerance;
  return m;
}

DominationSeries domination_series(const Trajectory& traj, double tolerance) {
  DominationSeries s;
  const auto& bounds = traj.problem->bounds();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n <= traj.steps.size(); ++n) {
    const auto m = domination_check(traj.state(n), bounds, tolerance);
    s.min_margin.push_back(m.min_margin);
    if (!m.passed) ++s.violating_states;
    if (m.min_margin < worst) {
      worst = m.min_margin;
      s.worst = m;
      s.worst_state = n;
    }
  }
  s.passed = s.violating_states == 0;
  return s;
}

// ---------------------------------------------------------------------------
// Ratio machinery

namespace {

double l1_distance(const Mesh& mesh, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * mesh.cell_volume();
}

std::vector<double> boundary_ratio(const BoundaryData& bd, double floor) {
  return make_ratio(bd.values(Species::BigZ), bd.values(Species::BigR), floor).values;
}

}  // namespace

RatioTransportReport ratio_transport_residual(const Trajectory& traj, double floor) {
  const Mesh& mesh = traj.problem->mesh();
  RatioTransportReport rep;
  const auto s_b = boundary_ratio(traj.problem->boundary(), floor);
  RatioField s = make_ratio(traj.initial.field(Species::BigZ), traj.initial.field(Species::BigR), floor);
  rep.time.push_back(traj.initial.time);
  rep.residual.push_back(0.0);
  for (const auto& st : traj.steps) {
    s = transport_step(mesh, s, st.faces, st.dt, s_b, TransportVariant::Implicit);
    const auto ratio = make_ratio(st.density[3], st.density[2], floor);
    rep.time.push_back(st.time);
    rep.residual.push_back(l1_distance(mesh, ratio.values, s.values));
  }
  rep.final_residual = rep.residual.back();
  return rep;
}

std::vector<CompactnessValue> ratio_compactness(const Trajectory& run, const Trajectory& limit,
                                                std::span<const double> taus, double floor) {
  const Mesh& mesh = run.problem->mesh();
  const auto& outer = mesh.boundary_faces();
  const std::size_t n_max = std::min(run.steps.size(), limit.steps.size());

  // Cumulative boundary functional after each step.
  std::vector<double> boundary(n_max + 1, 0.0);
  for (std::size_t n = 0; n < n_max; ++n) {
    const auto& a = run.steps[n];
    const auto& b = limit.steps[n];
    double sum = 0.0;
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double un = a.faces.boundary[f];
      if (!(un > 0.0)) continue;
      const int k = outer[f].cell;
      const double sa = a.density[2][k] > 0.0 ? a.density[3][k] / a.density[2][k] : floor;
      const double sb = b.density[2][k] > 0.0 ? b.density[3][k] / b.density[2][k] : floor;
      sum += a.density[2][k] * (sa - sb) * (sa - sb) * un * outer[f].area;
    }
    boundary[n + 1] = boundary[n] + a.dt * sum;
  }

  std::vector<CompactnessValue> out;
  for (double tau : taus) {
    std::size_t n = 0;
    double best = std::abs(run.initial.time - tau);
    for (std::size_t i = 0; i < n_max; ++i) {
      const double d = std::abs(run.steps[i].time - tau);
      if (d < best) {
        best = d;
        n = i + 1;
      }
    }
    const FluidState a = run.state(n);
    const FluidState b = limit.state(n);
    const auto sa = make_ratio(a.field(Species::BigZ), a.field(Species::BigR), floor);
    const auto sb = make_ratio(b.field(Species::BigZ), b.field(Species::BigR), floor);
    double interior = 0.0;
    for (std::size_t k = 0; k < sa.values.size(); ++k) {
      const double d = sa.values[k] - sb.values[k];
      interior += a.field(Species::BigR)[k] * d * d;
    }
    out.push_back({n == 0 ? run.initial.time : run.steps[n - 1].time, interior * mesh.cell_volume(),
                   boundary[n]});
  }
  return out;
}

AgreementReport almost_uniqueness_test(const Mesh& mesh, const TransportSetup& setup) {
  const auto& outer = mesh.boundary_faces();
  std::vector<double> rho_b(outer.size());
  std::vector<double> s_b(outer.size());
  for (std::size_t f = 0; f < outer.size(); ++f) {
    rho_b[f] = setup.rho_boundary(outer[f].center);
    s_b[f] = setup.s_boundary(outer[f].center);
  }
  const BoundaryData bd = BoundaryData::build(mesh, setup.velocity, {rho_b, rho_b, rho_b, rho_b});
  const FaceVelocity u = face_velocity_from_profile(mesh, setup.velocity, bd);

  AgreementReport rep;
  rep.cells = mesh.cell_count();
  rep.h = mesh.spacing(0);
  const double limit = explicit_transport_limit(mesh, u);
  double dt = std::isfinite(limit) ? setup.cfl * limit : setup.t_end;
  const int steps = std::max(1, static_cast<int>(std::ceil(setup.t_end / dt - 1e-12)));
  dt = setup.t_end / steps;
  rep.dt = dt;

  RatioField s_exp;
  DensityField rho;
  rho.species = Species::Rho;
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    s_exp.values.push_back(setup.s0(mesh.center(k)));
    rho.values.push_back(setup.rho0(mesh.center(k)));
  }
  RatioField s_imp = s_exp;
  for (int n = 0; n < steps; ++n) {
    s_exp = transport_step(mesh, s_exp, u, dt, s_b, TransportVariant::Explicit);
    s_imp = transport_step(mesh, s_imp, u, dt, s_b, TransportVariant::Implicit);
    rho = parabolic_step(mesh, rho, u, 0.0, dt, rho_b);
  }
  std::size_t positive = 0;
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const double d = std::abs(s_exp.values[k] - s_imp.values[k]) * mesh.cell_volume();
    if (rho.values[k] > setup.threshold) {
      rep.inside += d;
      ++positive;
    } else {
      rep.outside += d;
    }
  }
  rep.positive_fraction = static_cast<double>(positive) / static_cast<double>(mesh.cell_count());
  return rep;
}

OrderFit fit_order(std::vector<double> h, std::vector<double> value) {
  OrderFit fit;
  fit.h = std::move(h);
  fit.value = std::move(value);
  const std::size_t n = std::min(fit.h.size(), fit.value.size());
  for (std::size_t i = 1; i < n; ++i) {
    fit.pairwise.push_back(std::log(fit.value[i - 1] / fit.value[i]) / std::log(fit.h[i - 1] / fit.h[i]));
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(fit.h[i]);
    const double y = std::log(fit.value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  fit.order = n >= 2 && denom != 0.0 ? (n * sxy - sx * sy) / denom
                                     : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

// ---------------------------------------------------------------------------
// Bogovskii

BogovskiiResult bogovskii_1d(const Mesh& mesh, std::span<const double> r) {
  if (mesh.dimension() != 1) throw std::invalid_argument("bogovskii_1d: 1D mesh required");
  if (r.size() != mesh.cell_count()) throw std::invalid_argument("bogovskii_1d: size mismatch");
  const double h = mesh.spacing(0);
  BogovskiiResult res;
  long double total = 0.0L;
  for (double v : r) total += v;
  res.mean = static_cast<double>(total / static_cast<long double>(r.size()));
  res.nodes.assign(r.size() + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < r.size(); ++i) {
    acc += static_cast<long double>(h) * (static_cast<long double>(r[i]) - res.mean);
    res.nodes[i + 1] = static_cast<double>(acc);
  }
  // The accumulated sum vanishes up to round-off; pin the endpoint so that
  // the zero-trace condition holds literally.
  res.nodes.back() = 0.0;
  res.boundary_residual = std::max(std::abs(res.nodes.front()), std::abs(res.nodes.back()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = (res.nodes[i + 1] - res.nodes[i]) / h - (r[i] - res.mean);
    res.divergence_residual = std::max(res.divergence_residual, std::abs(d));
  }
  return res;
}

BogovskiiConstant bogovskii_constant(const Mesh& mesh, double p, int samples, std::uint64_t seed) {
  BogovskiiConstant out;
  out.p = p;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> modes(1, 8);
  const std::size_t n = mesh.cell_count();
  const double h = mesh.spacing(0);
  const double len = mesh.length(0);
  auto norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += h * std::pow(std::abs(x), p);
    return std::pow(s, 1.0 / p);
  };
  for (int i = 0; i < samples; ++i) {
    // Mix of white noise and a few smooth modes, shifted to be nonnegative.
    std::vector<double> r(n);
    const int m = modes(rng);
    std::vector<double> amp(m), phase(m);
    for (int j = 0; j < m; ++j) {
      amp[j] = unit(rng);
      phase[j] = 2.0 * std::numbers::pi * unit(rng);
    }
    const double noise = unit(rng);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = mesh.center(k)[0] / len;
      double v = noise * unit(rng);
      for (int j = 0; j < m; ++j) v += amp[j] * (1.0 + std::sin(2.0 * std::numbers::pi * (j + 1) * x + phase[j]));
      r[k] = v;
    }
    const auto b = bogovskii_1d(mesh, r);
    std::vector<double> cell_b(n), db(n);
    for (std::size_t k = 0; k < n; ++k) {
      cell_b[k] = 0.5 * (b.nodes[k] + b.nodes[k + 1]);
      db[k] = (b.nodes[k + 1] - b.nodes[k]) / h;
    }
    const double ratio = (norm(cell_b) + norm(db)) / norm(r);
    out.ratios.push_back(ratio);
    out.fitted = std::max(out.fitted, ratio);
  }
  return out;
}

NearBoundaryFit near_boundary_pressure(const Mesh& mesh, std::span<const double> dt,
                                       const std::vector<std::vector<double>>& pressure,
                                       std::span<const double> h_list) {
  NearBoundaryFit fit;
  const double vol = mesh.cell_volume();
  std::vector<double> distance(mesh.cell_count());
  for (std::size_t k = 0; k < distance.size(); ++k) distance[k] = mesh.distance_to_boundary(mesh.center(k));
  for (double h : h_list) {
    double integral = 0.0;
    double volume = 0.0;
    for (std::size_t k = 0; k < distance.size(); ++k) {
      if (distance[k] < h) volume += vol;
    }
    for (std::size_t n = 0; n < pressure.size(); ++n) {
      double s = 0.0;
      for (std::size_t k = 0; k < distance.size(); ++k) {
        if (distance[k] < h) s += vol * pressure[n][k];
      }
      integral += dt[n] * s;
    }
    fit.h.push_back(h);
    fit.integral.push_back(integral);
    fit.volume.push_back(volume);
  }
  std::vector<double> hs, is;
  for (std::size_t i = 0; i < fit.h.size(); ++i) {
    if (fit.integral[i] > 0.0) {
      hs.push_back(fit.h[i]);
      is.push_back(fit.integral[i]);
    }
  }
  if (hs.size() >= 2) {
    fit.exponent = fit_order(hs, is).order;
    fit.passed = fit.exponent > 0.0;
  }
  return fit;
}

NearBoundaryFit near_boundary_pressure(const Trajectory& traj, std::span<const double> h_list) {
  const Problem& pb = *traj.problem;
  const auto& p = pb.params();
  std::vector<double> dt;
  std::vector<std::vector<double>> pressure;
  for (const auto& st : traj.steps) {
    dt.push_back(st.dt);
    std::vector<double> pk(st.density[2].size());
    for (std::size_t k = 0; k < pk.size(); ++k) {
      pk[k] = pressure_delta(pb.law(), st.density[2][k], st.density[3][k], p.delta, p.c_exp,
                             p.allow_small_exponent);
    }
    pressure.push_back(std::move(pk));
  }
  return near_boundary_pressure(pb.mesh(), dt, pressure, h_list);
}

// ---------------------------------------------------------------------------
// Weak formulation

std::vector<TestFunction> test_function_battery(const Mesh& mesh, double t_end) {
  struct Factor {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> df;
  };
  const double pi = std::numbers::pi;
  const std::vector<Factor> space{
      {"1", [](double) { return 1.0; }, [](double) { return 0.0; }},
      {"x", [](double x) { return x; }, [](double) { return 1.0; }},
      {"x^2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }},
      {"sin(pi x)", [pi](double x) { return std::sin(pi * x); }, [pi](double x) { return pi * std::cos(pi * x); }},
      {"cos(pi x)", [pi](double x) { return std::cos(pi * x); }, [pi](double x) { return -pi * std::sin(pi * x); }},
  };
  const double tt = t_end > 0.0 ? t_end : 1.0;
  const std::vector<Factor> time{
      {"1", [](double) { return 1.0; }, [](double) { return 0.0; }},
      {"t", [tt](double t) { return t / tt; }, [tt](double) { return 1.0 / tt; }},
      {"sin(pi t/T)", [pi, tt](double t) { return std::sin(pi * t / tt); },
       [pi, tt](double t) { return pi / tt * std::cos(pi * t / tt); }},
  };
  const double lx = mesh.length(0);
  const double ly = mesh.length(1);
  const bool two_d = mesh.dimension() == 2;

  std::vector<TestFunction> out;
  const std::size_t ny = two_d ? space.size() : 1;
  for (std::size_t ix = 0; ix < space.size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (const auto& tf : time) {
        const Factor fx = space[ix];
        const Factor fy = two_d ? space[iy] : space[0];
        TestFunction phi;
        std::string sname = fx.name;
        if (two_d) {
          std::string yname = fy.name;
          for (auto& c : yname) {
            if (c == 'x') c = 'y';
          }
          sname = fx.name == "1" ? yname : (fy.name == "1" ? fx.name : fx.name + "*" + yname);
        }
        phi.name = tf.name == "1" ? sname : (sname == "1" ? tf.name : sname + "*" + tf.name);
        phi.value = [=](double t, const Vec2& x) {
          return fx.f(x[0] / lx) * fy.f(x[1] / ly) * tf.f(t);
        };
        phi.time_derivative = [=](double t, const Vec2& x) {
          return fx.f(x[0] / lx) * fy.f(x[1] / ly) * tf.df(t);
        };
        phi.gradient = [=](double t, const Vec2& x) {
          const double g = tf.f(t);
          const double gx = fx.df(x[0] / lx) / lx * fy.f(x[1] / ly) * g;
          const double gy = two_d ? fx.f(x[0] / lx) * fy.df(x[1] / ly) / ly * g : 0.0;
          return Vec2{gx, gy};
        };
        out.push_back(std::move(phi));
      }
    }
  }
  return out;
}

AlphaReconstruction reconstruct_alpha(const FluidState& state, const Closure& closure,
                                      double alpha_lo, double alpha_hi, double floor,
                                      double cell_volume) {
  AlphaReconstruction a;
  const auto& rho = state.density[0];
  const auto& z = state.density[1];
  const auto& big_r = state.density[2];
  const auto& big_z = state.density[3];
  const std::size_t n = rho.size();
  const double f_a = closure.big_f(alpha_lo);
  const double f_b = closure.big_f(alpha_hi);
  const double g_a = closure.big_g(alpha_lo);
  const double g_b = closure.big_g(alpha_hi);
  const double rel = 1e-12;
  auto outside = [rel](double v, double a, double b) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return v < lo - rel * std::abs(lo) || v > hi + rel * std::abs(hi);
  };
  a.alpha.resize(n);
  a.alpha_tilde.resize(n);
  a.alpha_min = std::numeric_limits<double>::infinity();
  a.alpha_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double q = big_r[k] > 0.0 ? rho[k] / big_r[k] : floor;
    const double w = big_z[k] > 0.0 ? z[k] / big_z[k] : floor;
    if (outside(q, f_a, f_b)) ++a.clamped;
    if (outside(w, g_a, g_b)) ++a.clamped;
    a.alpha[k] = closure.big_f_inverse(q, alpha_lo, alpha_hi);
    a.alpha_tilde[k] = closure.big_g_inverse(w, alpha_lo, alpha_hi);
    a.alpha_difference += cell_volume * std::abs(a.alpha[k] - a.alpha_tilde[k]);
    a.rho_residual += cell_volume * std::abs(closure.f(a.alpha[k]) * rho[k] - big_r[k]);
    a.z_residual += cell_volume * std::abs(closure.g(a.alpha[k]) * z[k] - big_z[k]);
    a.alpha_min = std::min(a.alpha_min, a.alpha[k]);
    a.alpha_max = std::max(a.alpha_max, a.alpha[k]);
  }
  a.in_range = a.alpha_min >= alpha_lo && a.alpha_max <= alpha_hi;
  return a;
}

namespace {

// Weak residual of the volume-fraction transport identity for one test function.
double alpha_weak_residual(const Trajectory& traj, const std::vector<std::vector<double>>& alpha,
                           std::span<const double> alpha_b, const TestFunction& phi) {
  const Mesh& mesh = traj.problem->mesh();
  const auto& outer = mesh.boundary_faces();
  const double vol = mesh.cell_volume();
  const std::size_t cells = mesh.cell_count();
  std::vector<Vec2> centers(cells);
  for (std::size_t k = 0; k < cells; ++k) centers[k] = mesh.center(k);

  double res = 0.0;
  for (std::size_t k = 0; k < cells; ++k) res -= vol * alpha[0][k] * phi.value(traj.initial.time, centers[k]);
  for (std::size_t n = 0; n < traj.steps.size(); ++n) {
    const auto& st = traj.steps[n];
    const auto& a = alpha[n + 1];
    const double t = st.time;
    const auto u = cell_velocity(mesh, st.faces);
    const auto div = discrete_divergence(mesh, st.faces);
    double volume = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
      const Vec2 g = phi.gradient(t, centers[k]);
      volume += vol * a[k] *
                (phi.time_derivative(t, centers[k]) + u[k][0] * g[0] + u[k][1] * g[1] +
                 phi.value(t, centers[k]) * div[k]);
    }
    double boundary = 0.0;
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double un = st.faces.boundary[f];
      if (un > 0.0) {
        boundary += a[outer[f].cell] * un * phi.value(t, outer[f].center) * outer[f].area;
      } else if (un < 0.0) {
        boundary += alpha_b[f] * un * phi.value(t, outer[f].center) * outer[f].area;
      }
    }
    res += st.dt * (boundary - volume);
  }
  const auto& last = alpha.back();
  const double t_last = traj.steps.empty() ? traj.initial.time : traj.steps.back().time;
  for (std::size_t k = 0; k < cells; ++k) res += vol * last[k] * phi.value(t_last, centers[k]);
  return res;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

WeakLedgers weak_solution_ledgers(const Trajectory& traj) {
  WeakLedgers out;
  const Problem& pb = *traj.problem;
  const Mesh& mesh = pb.mesh();
  const auto& params = pb.params();
  const double t_end = traj.steps.empty() ? params.t_end : traj.steps.back().time;
  const auto battery = test_function_battery(mesh, t_end);

  for (Species s : kAllSpecies) {
    const auto h = traj.species_history(s);
    const double scale = mass_ledger(mesh, h).scale;
    for (const auto& phi : battery) {
      const double r = max_abs(weak_continuity_residual(mesh, h, phi)) / scale;
      const std::string name = fmt::format("weak_continuity/{}/{}", species_name(s), phi.name);
      if (phi.name == "1") {
        out.unit_max = std::max(out.unit_max, r);
        out.report.add_abs(name, r, 1e-10, "unit test function");
      } else {
        out.report.add_info(name, r, "discretisation error");
      }
      out.continuity_max = std::max(out.continuity_max, r);
    }
  }

  // Galerkin balance tested against every mode.
  MomentumContext ctx;
  ctx.mesh = &mesh;
  ctx.basis = &pb.basis();
  ctx.lift = &pb.lift();
  ctx.law = &pb.law();
  ctx.bd = &pb.boundary();
  ctx.options.viscosity = params.viscosity;
  ctx.options.eps = params.eps;
  ctx.options.delta = params.delta;
  ctx.options.c_exp = params.c_exp;
  ctx.options.convection = params.convection;
  ctx.options.pressure = params.pressure;
  ctx.options.frozen_densities = params.frozen_densities;
  ctx.options.allow_small_exponent = params.allow_small_exponent;
  FluidState prev = traj.initial;
  for (const auto& st : traj.steps) {
    const auto rho_old = prev.total_density();
    std::vector<double> rho_new(st.density[0].size());
    for (std::size_t k = 0; k < rho_new.size(); ++k) rho_new[k] = st.density[0][k] + st.density[1][k];
    ctx.dt = st.dt;
    ctx.rho_old = rho_old;
    ctx.rho_new = rho_new;
    ctx.big_r = st.density[2];
    ctx.big_z = st.density[3];
    ctx.u_iter = &st.faces;
    ctx.c_old = &prev.coeffs;
    ctx.c_iter = &st.coeffs_iter;
    out.momentum_max = std::max(out.momentum_max, momentum_residual(ctx, pb.lift_field(), st.coeffs));
    prev.density = st.density;
    prev.coeffs = st.coeffs;
    prev.time = st.time;
  }
  out.report.add_abs("weak_momentum", out.momentum_max, 1e-8, "max Galerkin residual over steps");

  // Volume-fraction transport.
  const auto& spec = pb.spec();
  const double floor = pb.ratio_floor();
  std::vector<std::vector<double>> alpha;
  for (std::size_t n = 0; n <= traj.steps.size(); ++n) {
    alpha.push_back(reconstruct_alpha(traj.state(n), pb.closure(), spec.alpha_lo, spec.alpha_hi, floor,
                                     pb.mesh().cell_volume()).alpha);
  }
  const auto& bd = pb.boundary();
  std::vector<double> alpha_b(mesh.boundary_faces().size());
  for (std::size_t f = 0; f < alpha_b.size(); ++f) {
    const double r = bd.values(Species::BigR)[f];
    const double q = r > 0.0 ? bd.values(Species::Rho)[f] / r : floor;
    alpha_b[f] = pb.closure().big_f_inverse(q, spec.alpha_lo, spec.alpha_hi);
  }
  double alpha_scale = 0.0;
  for (double a : alpha[0]) alpha_scale += mesh.cell_volume() * a;
  alpha_scale = std::max(alpha_scale, std::numeric_limits<double>::min());
  for (const auto& phi : battery) {
    const double r = std::abs(alpha_weak_residual(traj, alpha, alpha_b, phi)) / alpha_scale;
    out.alpha_max = std::max(out.alpha_max, r);
    out.report.add_info(fmt::format("weak_alpha/{}", phi.name), r, "discretisation error");
  }

  const auto led = energy_ledger(traj);
  out.energy_min = led.min_relative_defect;
  out.report.add_at_least("weak_energy", led.min_relative_defect, 1e-6, "min relative energy defect");
  return out;
}

CertificateReport certify_trajectory(const Trajectory& traj, const CertifyOptions& opt) {
  CertificateReport rep;
  const Problem& pb = *traj.problem;
  const Mesh& mesh = pb.mesh();

  int worst_iter = 0;
  bool converged = traj.completed;
  for (const auto& st : traj.steps) {
    worst_iter = std::max(worst_iter, st.iterations);
    converged = converged && st.converged;
  }
  rep.add_verdict("fixed_point", worst_iter, pb.params().max_iter, converged,
                  converged ? fmt::format("max {} iterations", worst_iter) : traj.failure);

  for (Species s : kAllSpecies) {
    const auto h = traj.species_history(s);
    const auto ml = mass_ledger(mesh, h);
    rep.add_abs(fmt::format("mass/{}", species_name(s)), ml.max_relative, opt.mass_tolerance);

    const auto mm = maxmin_certificate(mesh, h, pb.boundary().partition);
    rep.add_verdict(fmt::format("maxmin/{}", species_name(s)),
                    std::min(mm.worst_upper_margin, mm.worst_lower_margin), 1e-12, mm.passed,
                    fmt::format("M = {:.6g}, m = {:.6g}, max|div u| = {:.6g}", mm.upper_data,
                                mm.lower_data, mm.max_divergence));

    const auto rl = renorm_budget(mesh, h, Renormalizer::square());
    rep.add_abs(fmt::format("renorm/{}", species_name(s)), rl.max_relative, opt.renorm_tolerance);
    const double bregman = std::min(rl.min_boundary_bregman, 0.0);
    rep.add_verdict(fmt::format("renorm_bregman/{}", species_name(s)), rl.min_boundary_bregman, 0.0,
                    rl.dissipation_nonnegative && bregman >= 0.0,
                    "boundary relative entropy and numerical dissipation");
    const auto re = renorm_budget(mesh, h, Renormalizer::entropy());
    rep.add_info(fmt::format("renorm_entropy/{}", species_name(s)), re.max_relative);
  }

  const auto dom = domination_series(traj, opt.domination_tolerance);
  const auto& w = dom.worst;
  rep.add_verdict("domination_check", w.min_margin, opt.domination_tolerance, dom.passed,
                  fmt::format("{} violating states; worst at state {} cell {}: {} = {:.3e}",
                              dom.violating_states, dom.worst_state, w.cell[w.worst],
                              DominationMargins::kNames[w.worst], w.min_margin));

  const auto led = energy_ledger(traj, opt.energy_tolerance);
  rep.add_at_least("energy_defect", led.min_relative_defect, opt.energy_tolerance,
                   "min (RHS - LHS) / initial energy");
  rep.add_info("energy_closure", led.max_closure_error, "|defect - numerical dissipation|");

  const auto rt = ratio_transport_residual(traj, pb.ratio_floor());
  rep.add_info("ratio_transport", rt.final_residual, "||Z/R - s||_L1 at the final time");

  if (opt.weak_ledgers) {
    auto weak = weak_solution_ledgers(traj);
    for (auto& c : weak.report.entries) {
      if (c.name == "weak_momentum") c.tolerance = opt.momentum_tolerance;
      if (c.name == "weak_momentum") c.passed = std::abs(c.value) <= c.tolerance;
      rep.entries.push_back(std::move(c));
    }
  }
  return rep;
}

}  // namespace bifluid
