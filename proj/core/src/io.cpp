#include "bifluid/io.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace bifluid {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  return out;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json vec(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd to_eigen(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json densities(const std::array<std::vector<double>, 4>& d) {
  return json{{"rho", d[0]}, {"z", d[1]}, {"R", d[2]}, {"Z", d[3]}};
}

std::array<std::vector<double>, 4> read_densities(const json& j) {
  return {j.at("rho").get<std::vector<double>>(), j.at("z").get<std::vector<double>>(),
          j.at("R").get<std::vector<double>>(), j.at("Z").get<std::vector<double>>()};
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

const char* rule_name(Certificate::Rule r) {
  switch (r) {
    case Certificate::Rule::AbsAtMost: return "abs_at_most";
    case Certificate::Rule::AtLeast: return "at_least";
    case Certificate::Rule::Info: return "info";
  }
  return "info";
}

}  // namespace

std::string format_exact(double v) { return fmt::format("{}", v); }

std::shared_ptr<const Problem> problem_from_origin(const RunOrigin& origin) {
  Scenario s = parse_scenario(origin.scenario_source, origin.scenario_name.empty() ? "<embedded>" : origin.scenario_name);
  apply_overrides(s, origin.cells, origin.dt);
  return std::make_shared<const Problem>(to_problem_spec(s));
}

void write_trajectory_json(const std::string& path, const Trajectory& traj, const RunOrigin& origin) {
  json j;
  j["format"] = "bifluid-trajectory";
  j["version"] = 1;
  j["scenario"] = {{"name", origin.scenario_name}, {"source", origin.scenario_source}};
  j["overrides"] = json::object();
  if (origin.cells) j["overrides"]["cells"] = *origin.cells;
  if (origin.dt) j["overrides"]["dt"] = *origin.dt;
  j["completed"] = traj.completed;
  j["failure"] = traj.failure;
  j["initial"] = {{"time", traj.initial.time}, {"density", densities(traj.initial.density)},
                  {"coeffs", vec(traj.initial.coeffs)}};
  json steps = json::array();
  for (const auto& st : traj.steps) {
    steps.push_back({{"time", st.time},
                     {"dt", st.dt},
                     {"iterations", st.iterations},
                     {"change", number(st.change)},
                     {"rcond", number(st.rcond)},
                     {"converged", st.converged},
                     {"density", densities(st.density)},
                     {"coeffs", vec(st.coeffs)},
                     {"coeffs_iter", vec(st.coeffs_iter)}});
  }
  j["steps"] = std::move(steps);
  auto out = open_out(path);
  out << j.dump() << '\n';
}

Trajectory read_trajectory_json(const std::string& path, RunOrigin* origin_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trajectory '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
  if (j.value("format", "") != "bifluid-trajectory") {
    throw std::runtime_error(fmt::format("{}: not a trajectory file", path));
  }
  RunOrigin origin;
  origin.scenario_name = j.at("scenario").value("name", "");
  origin.scenario_source = j.at("scenario").at("source").get<std::string>();
  const auto& ov = j.at("overrides");
  if (ov.contains("cells")) origin.cells = ov.at("cells").get<int>();
  if (ov.contains("dt")) origin.dt = ov.at("dt").get<double>();

  Trajectory traj;
  traj.problem = problem_from_origin(origin);
  traj.completed = j.value("completed", true);
  traj.failure = j.value("failure", "");
  const auto& init = j.at("initial");
  traj.initial.time = init.at("time").get<double>();
  traj.initial.density = read_densities(init.at("density"));
  traj.initial.coeffs = to_eigen(init.at("coeffs"));

  const std::size_t cells = traj.problem->mesh().cell_count();
  const std::size_t modes = traj.problem->basis().size();
  auto check = [&](const std::array<std::vector<double>, 4>& d, const Eigen::VectorXd& c) {
    for (const auto& f : d) {
      if (f.size() != cells) throw std::runtime_error(fmt::format("{}: density size mismatch", path));
    }
    if (static_cast<std::size_t>(c.size()) != modes) {
      throw std::runtime_error(fmt::format("{}: coefficient size mismatch", path));
    }
  };
  check(traj.initial.density, traj.initial.coeffs);
  for (const auto& s : j.at("steps")) {
    StepRecord st;
    st.time = s.at("time").get<double>();
    st.dt = s.at("dt").get<double>();
    st.iterations = s.at("iterations").get<int>();
    st.change = s.at("change").is_number() ? s.at("change").get<double>() : NAN;
    st.rcond = s.at("rcond").is_number() ? s.at("rcond").get<double>() : NAN;
    st.converged = s.at("converged").get<bool>();
    st.density = read_densities(s.at("density"));
    st.coeffs = to_eigen(s.at("coeffs"));
    st.coeffs_iter = to_eigen(s.at("coeffs_iter"));
    check(st.density, st.coeffs);
    st.faces = traj.problem->face_velocity(st.coeffs_iter);
    traj.steps.push_back(std::move(st));
  }
  if (origin_out) *origin_out = std::move(origin);
  return traj;
}

std::vector<std::size_t> snapshot_indices(std::size_t steps, int snapshots) {
  std::vector<std::size_t> out{0};
  const int n = std::max(1, snapshots);
  for (int i = 1; i <= n; ++i) {
    const std::size_t idx = (steps * static_cast<std::size_t>(i) + n / 2) / static_cast<std::size_t>(n);
    if (idx > out.back()) out.push_back(idx);
  }
  if (out.back() != steps) out.push_back(steps);
  return out;
}

void write_fields_csv(const std::string& path, const Trajectory& traj, const std::vector<std::size_t>& frames) {
  const Problem& pb = *traj.problem;
  const Mesh& mesh = pb.mesh();
  const auto& spec = pb.spec();
  auto out = open_out(path);
  out << "step,time,cell,x,y,rho,z,R,Z,ux,uy,alpha\n";
  for (std::size_t n : frames) {
    const FluidState s = traj.state(n);
    const auto v = pb.basis().cell_velocity(s.coeffs);
    const auto a =
        reconstruct_alpha(s, pb.closure(), spec.alpha_lo, spec.alpha_hi, pb.ratio_floor(), mesh.cell_volume());
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
      const Vec2 x = mesh.center(k);
      const Vec2 u{v[k][0] + pb.lift_field().value[k][0], v[k][1] + pb.lift_field().value[k][1]};
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", n, format_exact(s.time), k,
                         format_exact(x[0]), format_exact(x[1]), format_exact(s.density[0][k]),
                         format_exact(s.density[1][k]), format_exact(s.density[2][k]),
                         format_exact(s.density[3][k]), format_exact(u[0]), format_exact(u[1]),
                         format_exact(a.alpha[k]));
    }
  }
}

void write_timeseries_csv(const std::string& path, const Trajectory& traj, const EnergyLedger& energy) {
  const Problem& pb = *traj.problem;
  const double vol = pb.mesh().cell_volume();
  auto out = open_out(path);
  out << "step,time,dt,iterations,fp_change,domination_margin,mass_rho,mass_z,mass_R,mass_Z,max_R,min_R,"
         "kinetic,helmholtz,numerical,defect\n";
  for (std::size_t n = 0; n <= traj.steps.size(); ++n) {
    const FluidState s = traj.state(n);
    const auto dom = domination_check(s, pb.bounds());
    std::array<double, 4> mass{};
    for (int i = 0; i < 4; ++i) {
      for (double v : s.density[i]) mass[i] += vol * v;
    }
    const auto [rmin, rmax] = std::minmax_element(s.density[2].begin(), s.density[2].end());
    const double dt = n == 0 ? 0.0 : traj.steps[n - 1].dt;
    const int it = n == 0 ? 0 : traj.steps[n - 1].iterations;
    const double ch = n == 0 ? 0.0 : traj.steps[n - 1].change;
    double kin = 0.0, helm = 0.0, num = 0.0, defect = 0.0;
    if (n > 0 && n - 1 < energy.steps.size()) {
      const auto& e = energy.steps[n - 1];
      kin = e.kinetic;
      helm = e.helmholtz;
      num = e.numerical;
      defect = e.defect;
    }
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", n, format_exact(s.time),
                       format_exact(dt), it, format_exact(ch), format_exact(dom.min_margin),
                       format_exact(mass[0]), format_exact(mass[1]), format_exact(mass[2]),
                       format_exact(mass[3]), format_exact(*rmax), format_exact(*rmin), format_exact(kin),
                       format_exact(helm), format_exact(num), format_exact(defect));
  }
}

void write_report_json(const std::string& path, const CertificateReport& report, const std::string& title) {
  json j;
  j["title"] = title;
  j["passed"] = report.all_passed();
  j["failures"] = report.failures();
  json entries = json::array();
  for (const auto& c : report.entries) {
    entries.push_back({{"name", c.name},
                       {"value", number(c.value)},
                       {"tolerance", number(c.tolerance)},
                       {"rule", rule_name(c.rule)},
                       {"passed", c.passed},
                       {"detail", c.detail}});
  }
  j["certificates"] = std::move(entries);
  write_json(path, j);
}

void write_sweep_json(const std::string& path, const SweepReport& sweep) {
  json j;
  j["parameter"] = sweep.parameter_name;
  json members = json::array();
  for (const auto& m : sweep.members) {
    json o{{"value", number(m.parameter)},
           {"ok", m.ok},
           {"error", m.error},
           {"min_relative_energy_defect", number(m.min_relative_defect)},
           {"ratio_functional", number(m.ratio_functional)},
           {"ratio_boundary_functional", number(m.ratio_boundary_functional)},
           {"cauchy_difference", number(m.cauchy_difference)},
           {"artificial_pressure", number(m.artificial_pressure)},
           {"pressure_difference", number(m.pressure_difference)}};
    if (m.ok) {
      o["steps"] = m.trajectory.steps.size();
      int it = 0;
      for (const auto& st : m.trajectory.steps) it = std::max(it, st.iterations);
      o["max_iterations"] = it;
    }
    members.push_back(std::move(o));
  }
  j["members"] = std::move(members);
  write_json(path, j);
}

void write_sweep_csv(const std::string& path, const SweepReport& sweep) {
  auto out = open_out(path);
  out << sweep.parameter_name
      << ",ok,min_relative_energy_defect,ratio_functional,ratio_boundary_functional,cauchy_difference,"
         "artificial_pressure,pressure_difference\n";
  for (const auto& m : sweep.members) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", format_exact(m.parameter), m.ok ? 1 : 0,
                       format_exact(m.min_relative_defect), format_exact(m.ratio_functional),
                       format_exact(m.ratio_boundary_functional), format_exact(m.cauchy_difference),
                       format_exact(m.artificial_pressure), format_exact(m.pressure_difference));
  }
}

void print_summary(std::ostream& os, const CertificateReport& report, const std::string& title) {
  std::size_t width = 11;
  for (const auto& c : report.entries) width = std::max(width, c.name.size());
  os << title << '\n';
  os << fmt::format("  {:<{}}  {:>13}  {:>10}  {}\n", "certificate", width, "value", "tolerance", "verdict");
  for (const auto& c : report.entries) {
    const char* verdict = c.rule == Certificate::Rule::Info ? "info" : (c.passed ? "pass" : "FAIL");
    const std::string tol = c.rule == Certificate::Rule::Info ? "-" : fmt::format("{:.1e}", c.tolerance);
    os << fmt::format("  {:<{}}  {:>13.6e}  {:>10}  {}\n", c.name, width, c.value, tol, verdict);
  }
  const auto failures = report.failures();
  os << (failures.empty() ? "all certificates passed\n"
                          : fmt::format("{} certificate(s) failed\n", failures.size()));
}

}  // namespace bifluid
