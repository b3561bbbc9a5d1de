#include "support.hpp"

#include <cmath>
#include <numbers>

namespace bifluid::testing {

namespace {

constexpr double kPi = std::numbers::pi;

VelocityProfile stretching() {
  ComponentProfile ux;
  ux.base = 1.0;
  ux.slope_x = 0.5;
  return VelocityProfile(1, {1.0, 1.0}, {ux, ComponentProfile{}});
}

BoundaryData stretching_boundary(const Mesh& mesh) {
  std::array<std::vector<double>, 4> d;
  for (auto& v : d) v.assign(mesh.boundary_faces().size(), 1.0);
  return BoundaryData::build(mesh, stretching(), d);
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"constant",    "inflow-fill",          "compressive",
                                              "viscous-decay", "smooth", "two-isentropic-gases",
                                              "rectangle-2d"};
  return names;
}

std::string scenario_path(const std::string& name) {
  return std::string(BIFLUID_SCENARIO_DIR) + "/" + name + ".yaml";
}

Scenario bundled(const std::string& name, std::optional<int> cells) {
  Scenario s = load_scenario(scenario_path(name));
  apply_overrides(s, cells, std::nullopt);
  return s;
}

std::shared_ptr<const Problem> make_problem(const Scenario& s) {
  return std::make_shared<const Problem>(to_problem_spec(s));
}

FaceVelocity stretching_faces(const Mesh& mesh) {
  return face_velocity_from_profile(mesh, stretching(), stretching_boundary(mesh));
}

ParabolicCase ParabolicCase::stretching() {
  ParabolicCase c;
  c.r = [](double t, double x) { return 2.0 + std::sin(2 * kPi * x) * std::cos(t); };
  c.r_t = [](double t, double x) { return -std::sin(2 * kPi * x) * std::sin(t); };
  c.r_x = [](double t, double x) { return 2 * kPi * std::cos(2 * kPi * x) * std::cos(t); };
  c.r_xx = [](double t, double x) { return -4 * kPi * kPi * std::sin(2 * kPi * x) * std::cos(t); };
  return c;
}

ParabolicCase ParabolicCase::travelling_wave() {
  ParabolicCase c;
  c.length = 2 * kPi - 1.0;
  c.slope = 0.0;
  c.r = [](double t, double x) { return 2.0 + std::sin(x - t); };
  c.r_t = [](double t, double x) { return -std::cos(x - t); };
  c.r_x = [](double t, double x) { return std::cos(x - t); };
  c.r_xx = [](double t, double x) { return -std::sin(x - t); };
  return c;
}

Refinement parabolic_mms(const std::vector<int>& cells, const ParabolicCase& mms, double eps, double t_end) {
  ComponentProfile ux;
  ux.base = mms.base;
  ux.slope_x = mms.slope;
  const VelocityProfile profile(1, {mms.length, 1.0}, {ux, ComponentProfile{}});
  auto speed = [&](double x) { return mms.base + mms.slope * x / mms.length; };
  const double div = mms.slope / mms.length;
  Refinement out;
  std::vector<double> hs, errs;
  for (int n : cells) {
    const Mesh mesh = Mesh::interval(n, mms.length);
    std::array<std::vector<double>, 4> unit;
    for (auto& v : unit) v.assign(mesh.boundary_faces().size(), 1.0);
    const FaceVelocity u = face_velocity_from_profile(mesh, profile, BoundaryData::build(mesh, profile, unit));
    const double h = mesh.spacing(0);
    const int steps = static_cast<int>(std::ceil(t_end / (0.5 * h)));
    const double dt = t_end / steps;
    DensityField r;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) r.values.push_back(mms.r(0.0, mesh.center(k)[0]));
    const auto& faces = mesh.boundary_faces();
    for (int step = 1; step <= steps; ++step) {
      const double t = step * dt;
      StepForcing forcing;
      for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const double x = mesh.center(k)[0];
        forcing.source.push_back(mms.r_t(t, x) + mms.r_x(t, x) * speed(x) + mms.r(t, x) * div -
                                 eps * mms.r_xx(t, x));
      }
      std::vector<double> rb(faces.size(), 0.0);
      forcing.boundary_extra.assign(faces.size(), 0.0);
      for (std::size_t f = 0; f < faces.size(); ++f) {
        const double x = faces[f].center[0];
        const double un = speed(x) * faces[f].normal[0];
        const double dn = mms.r_x(t, x) * faces[f].normal[0];
        if (un < 0.0) {
          // Total flux r* u.n - eps dn r* carried by the inflow value.
          rb[f] = mms.r(t, x) - eps * dn / un;
        } else {
          forcing.boundary_extra[f] = -eps * dn * faces[f].area;
        }
      }
      r = parabolic_step(mesh, r, u, eps, dt, rb, &forcing);
    }
    double err = 0.0;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
      const double e = r.values[k] - mms.r(t_end, mesh.center(k)[0]);
      err += mesh.cell_volume() * e * e;
    }
    hs.push_back(h);
    errs.push_back(std::sqrt(err));
  }
  out.cells = cells;
  out.fit = fit_order(hs, errs);
  return out;
}

Refinement transport_mms(const std::vector<int>& cells, TransportVariant variant, double t_end) {
  auto exact = [](double t, double x) {
    return 1.0 + 0.5 * std::sin(2 * kPi * (x + 2.0) * std::exp(-0.5 * t));
  };
  Refinement out;
  std::vector<double> hs, errs;
  for (int n : cells) {
    const Mesh mesh = Mesh::interval(n, 1.0);
    const FaceVelocity u = stretching_faces(mesh);
    const double h = mesh.spacing(0);
    // dt = h/2 keeps the explicit variant inside its limit h/u_max = h/1.5.
    const int steps = static_cast<int>(std::ceil(t_end / (0.5 * h)));
    const double dt = t_end / steps;
    RatioField s;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) s.values.push_back(exact(0.0, mesh.center(k)[0]));
    const auto& faces = mesh.boundary_faces();
    for (int step = 1; step <= steps; ++step) {
      const double t = step * dt;
      std::vector<double> sb(faces.size());
      for (std::size_t f = 0; f < faces.size(); ++f) sb[f] = exact(t, faces[f].center[0]);
      s = transport_step(mesh, s, u, dt, sb, variant);
    }
    double err = 0.0;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
      const double e = s.values[k] - exact(t_end, mesh.center(k)[0]);
      err += mesh.cell_volume() * e * e;
    }
    hs.push_back(h);
    errs.push_back(std::sqrt(err));
  }
  out.cells = cells;
  out.fit = fit_order(hs, errs);
  return out;
}

}  // namespace bifluid::testing
