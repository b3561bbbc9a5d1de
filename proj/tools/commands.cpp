#include "commands.hpp"

#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bifluid/diagnostics.hpp"
#include "bifluid/io.hpp"
#include "bifluid/scenario.hpp"

namespace bifluid::cli {

namespace fs = std::filesystem;

namespace {

/// Failure list on stderr as one JSON line, for scripts.
void emit_failures(const std::vector<std::string>& names) {
  std::string s = "{\"failures\": [";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += "\"";
    for (char c : names[i]) {
      if (c == '"' || c == '\\') s += '\\';
      s += c;
    }
    s += "\"";
  }
  s += "]}";
  std::cerr << s << '\n';
}

int finish(const Options& o, const CertificateReport& rep, const std::string& title) {
  fs::create_directories(o.out);
  write_report_json((fs::path(o.out) / "report.json").string(), rep, title);
  if (!o.quiet) print_summary(std::cout, rep, title);
  if (rep.all_passed()) return 0;
  emit_failures(rep.failures());
  return 1;
}

struct Loaded {
  Scenario scenario;
  RunOrigin origin;
  std::shared_ptr<const Problem> problem;
};

Loaded load(const Options& o) {
  Loaded l;
  l.scenario = load_scenario(o.scenario);
  apply_overrides(l.scenario, o.cells, o.dt);
  if (o.snapshots) l.scenario.snapshots = *o.snapshots;
  // Re-validate: overrides can break the mode/cell relation.
  const auto issues = validate_scenario(l.scenario);
  if (!issues.empty()) throw ValidationError(issues);
  l.origin.scenario_source = l.scenario.source;
  l.origin.scenario_name = l.scenario.name;
  l.origin.cells = o.cells;
  l.origin.dt = o.dt;
  l.problem = std::make_shared<const Problem>(to_problem_spec(l.scenario));
  return l;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    std::cerr << e.what() << '\n';
    emit_failures(e.issues());
    return 1;
  } catch (const ScenarioParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    emit_failures({"parse"});
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    emit_failures({"runtime"});
    return 2;
  }
}

std::string label(const std::vector<double>& list) {
  std::string s;
  for (std::size_t i = 0; i < list.size(); ++i) s += (i ? ", " : "") + format_exact(list[i]);
  return s;
}

}  // namespace

int simulate(const Options& o) {
  return guarded([&] {
    auto l = load(o);
    Trajectory traj;
    CertificateReport rep;
    try {
      traj = run_level1(l.problem);
    } catch (const SolverError& e) {
      rep.add_verdict("fixed_point", 0.0, 0.0, false, e.what());
      return finish(o, rep, fmt::format("simulate {}", l.scenario.name));
    }
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_trajectory_json((out / "trajectory.json").string(), traj, l.origin);
    write_fields_csv((out / "fields.csv").string(), traj, snapshot_indices(traj.steps.size(), l.scenario.snapshots));
    write_timeseries_csv((out / "timeseries.csv").string(), traj, energy_ledger(traj));
    rep = certify_trajectory(traj);
    return finish(o, rep, fmt::format("simulate {}", l.scenario.name));
  });
}

int certify(const Options& o) {
  return guarded([&] {
    RunOrigin origin;
    const Trajectory traj = read_trajectory_json(o.trajectory, &origin);
    const auto rep = certify_trajectory(traj);
    return finish(o, rep, fmt::format("certify {}", origin.scenario_name));
  });
}

namespace {

int sweep(const Options& o, bool eps) {
  return guarded([&] {
    const auto& list = eps ? o.eps_list : o.delta_list;
    if (list.empty()) throw std::invalid_argument(eps ? "--eps-list is required" : "--delta-list is required");
    auto l = load(o);
    const SweepReport sw = eps ? sweep_epsilon(*l.problem, list) : sweep_delta(*l.problem, list);
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_sweep_json((out / "sweep.json").string(), sw);
    write_sweep_csv((out / "sweep.csv").string(), sw);

    CertificateReport rep;
    for (const auto& m : sw.members) {
      const std::string tag = fmt::format("{}={}", sw.parameter_name, format_exact(m.parameter));
      rep.add_verdict(fmt::format("run/{}", tag), m.ok ? 1.0 : 0.0, 0.0, m.ok, m.error);
      if (m.ok) rep.add_at_least(fmt::format("energy_defect/{}", tag), m.min_relative_defect, 1e-6);
    }
    bool all_ok = true;
    for (const auto& m : sw.members) all_ok = all_ok && m.ok;
    if (eps) {
      bool decreasing = all_ok;
      for (std::size_t i = 1; i < sw.members.size(); ++i) {
        decreasing = decreasing && sw.members[i].ratio_functional < sw.members[i - 1].ratio_functional;
      }
      const double first = sw.members.empty() ? 0.0 : sw.members.front().ratio_functional;
      rep.add_verdict("ratio_compactness_decrease", first, 0.0, decreasing,
                      fmt::format("functional strictly decreasing along eps = [{}]", label(list)));
      bool cauchy = all_ok;
      for (std::size_t i = 2; i < sw.members.size(); ++i) {
        cauchy = cauchy && sw.members[i].cauchy_difference <= sw.members[i - 1].cauchy_difference;
      }
      rep.add_info("cauchy_nonincreasing", cauchy ? 1.0 : 0.0, "consecutive-level differences");
    } else {
      bool decreasing = all_ok;
      for (std::size_t i = 1; i < sw.members.size(); ++i) {
        decreasing = decreasing && sw.members[i].artificial_pressure < sw.members[i - 1].artificial_pressure;
      }
      const double last = sw.members.empty() ? 0.0 : sw.members.back().artificial_pressure;
      rep.add_verdict("artificial_pressure_decrease", last, 0.0, decreasing,
                      fmt::format("delta sup_t int R^c decreasing along delta = [{}]", label(list)));
      bool pressure = all_ok;
      for (std::size_t i = 2; i < sw.members.size(); ++i) {
        pressure = pressure && sw.members[i].pressure_difference <= sw.members[i - 1].pressure_difference;
      }
      rep.add_info("pressure_difference_nonincreasing", pressure ? 1.0 : 0.0);
    }
    return finish(o, rep, fmt::format("sweep-{} {}", eps ? "eps" : "delta", l.scenario.name));
  });
}

}  // namespace

int sweep_eps(const Options& o) { return sweep(o, true); }
int sweep_delta(const Options& o) { return sweep(o, false); }

int alpha_roundtrip(const Options& o) {
  return guarded([&] {
    auto l = load(o);
    const Trajectory traj = run_level1(l.problem);
    const Problem& pb = *l.problem;
    const auto& spec = pb.spec();
    CertificateReport rep;
    const double vol = pb.mesh().cell_volume();
    const auto a0 = reconstruct_alpha(traj.initial, pb.closure(), spec.alpha_lo, spec.alpha_hi, pb.ratio_floor(), vol);
    rep.add_abs("alpha_roundtrip_initial", a0.rho_residual + a0.z_residual, 1e-12,
                "||f(alpha) rho - R||_L1 + ||g(alpha) z - Z||_L1 at t = 0");
    rep.add_abs("alpha_difference_initial", a0.alpha_difference, 1e-12, "||alpha - alpha~||_L1 at t = 0");
    bool in_range = true;
    int clamped = 0;
    for (std::size_t n = 0; n <= traj.steps.size(); ++n) {
      const auto a = reconstruct_alpha(traj.state(n), pb.closure(), spec.alpha_lo, spec.alpha_hi, pb.ratio_floor(), vol);
      in_range = in_range && a.in_range;
      clamped += a.clamped;
    }
    const auto at = reconstruct_alpha(traj.state(traj.steps.size()), pb.closure(), spec.alpha_lo, spec.alpha_hi,
                                      pb.ratio_floor(), vol);
    rep.add_verdict("alpha_range", at.alpha_min, 0.0, in_range,
                    fmt::format("alpha in [{}, {}] at every state", spec.alpha_lo, spec.alpha_hi));
    rep.add_info("alpha_clamped", clamped, "inverse evaluations outside the closure range");
    rep.add_info("alpha_roundtrip_final", at.rho_residual + at.z_residual, "at t = T");
    rep.add_info("alpha_difference_final", at.alpha_difference, "at t = T");

    fs::create_directories(o.out);
    std::ofstream csv(fs::path(o.out) / "alpha.csv", std::ios::binary);
    csv << "cell,x,y,alpha,alpha_tilde\n";
    for (std::size_t k = 0; k < pb.mesh().cell_count(); ++k) {
      const Vec2 x = pb.mesh().center(k);
      csv << fmt::format("{},{},{},{},{}\n", k, format_exact(x[0]), format_exact(x[1]),
                         format_exact(at.alpha[k]), format_exact(at.alpha_tilde[k]));
    }
    return finish(o, rep, fmt::format("alpha-roundtrip {}", l.scenario.name));
  });
}

int validate(const Options& o) {
  return guarded([&] {
    const auto l = load(o);
    if (!o.quiet) {
      std::cout << fmt::format("{}: valid ({} cells, {} modes, dt = {}, {} steps)\n", l.scenario.name,
                               l.problem->mesh().cell_count(), l.problem->basis().size(),
                               format_exact(l.problem->time_step()), l.problem->step_count());
    }
    return 0;
  });
}

}  // namespace bifluid::cli
