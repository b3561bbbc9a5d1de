#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "bifluid/coupling.hpp"
#include "support.hpp"

using namespace bifluid;
using namespace bifluid::testing;

namespace {

/// Closed box at rest with matched constant data.
Scenario equilibrium(int cells = 30) {
  Scenario s = bundled("constant", cells);
  s.boundary_velocity = {};
  s.initial_velocity.reset();
  s.params.t_end = 0.05;
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

int max_iterations(const Trajectory& t) {
  int m = 0;
  for (const auto& st : t.steps) m = std::max(m, st.iterations);
  return m;
}

}  // namespace

TEST(SchemeParams, ViolationsCarryTags) {
  const PressureLaw law = PressureLaw::isentropic(1.0, 1.0, 2.0, 2.0);
  SchemeParams p;
  EXPECT_TRUE(p.violations(law).empty());
  p.c_exp = 4.0;
  p.viscosity.mu = 0.0;
  p.viscosity.lambda = -1.0;
  p.theta = 1.5;
  const auto v = p.violations(law);
  auto has = [&](const std::string& tag) {
    for (const auto& s : v) {
      if (s.rfind(tag, 0) == 0) return true;
    }
    return false;
  };
  EXPECT_TRUE(has("[artificial-pressure-exponent]"));
  EXPECT_TRUE(has("[viscosity-bounds]"));
  EXPECT_TRUE(has("[scheme-parameters]"));
  p = SchemeParams{};
  p.c_exp = 4.0;
  p.allow_small_exponent = true;
  EXPECT_TRUE(p.violations(law).empty());
}

TEST(Problem, RejectsInvalidParameters) {
  Scenario s = bundled("constant", 20);
  auto spec = to_problem_spec(s);
  spec.params.viscosity.mu = -1.0;
  EXPECT_THROW(Problem{spec}, ValidationError);
}

TEST(Problem, CflTimeStep) {
  // u = 1, c^2 = (R P_R + Z P_Z)/(rho + z) + artificial part, dt = cfl h / (|u| + c).
  Scenario s = bundled("constant", 100);
  const auto pb = make_problem(s);
  const auto& st = pb->initial_state();
  const double r = st.density[2][0], z = st.density[3][0], rho = st.density[0][0] + st.density[1][0];
  const double d = s.params.delta, c = s.params.c_exp;
  const double c2 = (2 * r * r + 2 * z * z + d * c * (std::pow(r, c) + std::pow(z, c))) / rho;
  const double dt = 0.5 * 0.01 / (1.0 + std::sqrt(c2));
  const int steps = static_cast<int>(std::ceil(0.5 / dt - 1e-12));
  EXPECT_EQ(pb->step_count(), steps);
  EXPECT_NEAR(pb->time_step(), 0.5 / steps, 1e-15);
}

TEST(FixedPoint, EquilibriumConvergesInOneIteration) {
  const auto pb = make_problem(equilibrium());
  const auto res = fixed_point_solve(*pb, pb->initial_state(), 0.01);
  EXPECT_EQ(res.record.iterations, 1);
  EXPECT_TRUE(res.record.converged);
  for (int s = 0; s < 4; ++s) EXPECT_LE(max_abs_diff(res.record.density[s], pb->initial_state().density[s]), 1e-14);
  EXPECT_LE(res.record.coeffs.lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(FixedPoint, FrozenRegimeRateIsOneMinusTheta) {
  // With frozen densities and no convection the momentum solve ignores the
  // iterate, so the damped map v -> v + theta (c - v) contracts by 1 - theta.
  for (double theta : {0.7, 0.5}) {
    Scenario s = bundled("viscous-decay", 40);
    s.params.theta = theta;
    const auto pb = make_problem(s);
    const auto res = fixed_point_solve(*pb, pb->initial_state(), pb->time_step());
    EXPECT_TRUE(res.record.converged);
    EXPECT_GT(res.record.iterations, 5);
    EXPECT_LT(res.observed_rate, 1.0);
    EXPECT_NEAR(res.observed_rate, 1.0 - theta, 1e-6);
  }
}

TEST(FixedPoint, HalvingDtNeverIncreasesIterations) {
  for (const char* name : {"constant", "inflow-fill", "compressive", "viscous-decay", "smooth", "two-isentropic-gases"}) {
    Scenario s = bundled(name, 50);
    const double dt = make_problem(s)->time_step();
    s.params.t_end = 20 * dt;
    s.params.dt = dt;
    const int coarse = max_iterations(run_level1(make_problem(s)));
    s.params.dt = dt / 2;
    const int fine = max_iterations(run_level1(make_problem(s)));
    EXPECT_LE(fine, coarse) << name;
  }
}

TEST(FixedPoint, NonConvergenceAbortsOrIsFlagged) {
  Scenario s = bundled("inflow-fill", 30);
  s.params.max_iter = 2;
  s.params.t_end = 0.05;
  EXPECT_THROW(run_level1(make_problem(s)), SolverError);
  s.params.abort_on_nonconvergence = false;
  const auto t = run_level1(make_problem(s));
  bool flagged = false;
  for (const auto& st : t.steps) flagged = flagged || !st.converged;
  EXPECT_TRUE(flagged);
}

TEST(RunLevel1, ConstantScenarioCertifies) {
  const auto t = run_level1(make_problem(bundled("constant", 50)));
  const auto rep = certify_trajectory(t);
  EXPECT_TRUE(rep.all_passed());
  for (const char* sp : {"rho", "z", "R", "Z"}) {
    EXPECT_LE(std::abs(rep.find(std::string("mass/") + sp)->value), 1e-10);
    EXPECT_LE(std::abs(rep.find(std::string("renorm/") + sp)->value), 1e-10);
  }
  const auto led = energy_ledger(t);
  EXPECT_TRUE(led.passed);
  EXPECT_LE(std::abs(led.min_relative_defect), 1e-10);
}

TEST(RunLevel1, InflowFillLedgersAndDomination) {
  const auto t = run_level1(make_problem(bundled("inflow-fill", 80)));
  const auto rep = certify_trajectory(t);
  for (const char* sp : {"rho", "z", "R", "Z"}) EXPECT_LE(std::abs(rep.find(std::string("mass/") + sp)->value), 1e-10);
  const auto dom = domination_series(t);
  EXPECT_EQ(dom.violating_states, 0);
  for (double m : dom.min_margin) EXPECT_GE(m, -1e-12);
  // The denser inflow mixture really enters: total R grows.
  double r0 = 0.0, r1 = 0.0;
  for (double v : t.initial.density[2]) r0 += v;
  for (double v : t.steps.back().density[2]) r1 += v;
  EXPECT_GT(r1, r0);
}

TEST(RunLevel1, CompressiveMaxPrincipleWithRunDivergence) {
  const auto t = run_level1(make_problem(bundled("compressive", 80)));
  const Problem& pb = *t.problem;
  for (Species s : kAllSpecies) {
    const auto h = t.species_history(s);
    const auto rep = maxmin_certificate(pb.mesh(), h, pb.boundary().partition);
    EXPECT_TRUE(rep.passed) << species_name(s);
    EXPECT_GT(rep.max_divergence, 0.1);
    // Direct evaluation of M prod 1/(1 - dt_n D_n).
    double factor = 1.0;
    for (const auto& st : h.steps) factor /= 1.0 - st.dt * max_abs_divergence(pb.mesh(), st.u);
    EXPECT_NEAR(rep.upper_bound.back(), rep.upper_data * factor, 1e-12 * rep.upper_data * factor);
  }
}

TEST(EnergyLedger, EquilibriumHasZeroDefect) {
  const auto t = run_level1(make_problem(equilibrium()));
  const auto led = energy_ledger(t);
  for (const auto& e : led.steps) {
    EXPECT_LE(std::abs(e.defect), 1e-13);
    EXPECT_LE(std::abs(e.viscous), 1e-14);
    EXPECT_LE(std::abs(e.kinetic), 1e-14);
  }
}

TEST(EnergyLedger, InflowRelativeTermIsNonnegative) {
  const auto t = run_level1(make_problem(bundled("inflow-fill", 60)));
  const auto led = energy_ledger(t);
  double total = 0.0;
  for (const auto& e : led.steps) {
    EXPECT_GE(e.inflow_relative, 0.0);
    EXPECT_GE(e.numerical, 0.0);
    total += e.inflow_relative;
  }
  EXPECT_GT(total, 0.0);
  EXPECT_GE(led.min_relative_defect, -1e-6);
  EXPECT_LE(led.max_closure_error, 1e-9);
}

TEST(EnergyLedger, ViscousDecayBalance) {
  // Backward Euler: 1/2|v1|^2 - 1/2|v0|^2 + 1/2|v1 - v0|^2 = -dt a(v1, v1).
  const auto t = run_level1(make_problem(bundled("viscous-decay", 50)));
  const auto led = energy_ledger(t);
  EXPECT_NEAR(led.kinetic_loss, led.viscous_total + led.increment_total, 1e-6 * led.kinetic_loss);
}

TEST(Sweep, EpsIndependentScenarioGivesIdenticalDigests) {
  const auto base = make_problem(bundled("constant", 40));
  const auto sw = sweep_epsilon(*base, {1e-1, 1e-2, 1e-3});
  ASSERT_EQ(sw.members.size(), 3u);
  for (const auto& m : sw.members) {
    EXPECT_TRUE(m.ok);
    EXPECT_LE(m.ratio_functional, 1e-26);
    EXPECT_LE(m.cauchy_difference, 1e-12);
  }
}

TEST(Sweep, SmoothEpsStudy) {
  const auto base = make_problem(bundled("smooth", 60));
  const auto sw = sweep_epsilon(*base, {1e-1, 1e-2, 1e-3, 1e-4});
  for (std::size_t i = 2; i < sw.members.size(); ++i) {
    EXPECT_LE(sw.members[i].cauchy_difference, sw.members[i - 1].cauchy_difference);
  }
  EXPECT_GT(sw.members.front().ratio_functional, sw.members.back().ratio_functional);
  // All members share the time grid.
  for (const auto& m : sw.members) EXPECT_EQ(m.trajectory.steps.size(), sw.members[0].trajectory.steps.size());
}

TEST(Sweep, DeltaZeroEqualsPlainRun) {
  Scenario s = bundled("inflow-fill", 40);
  const auto base = make_problem(s);
  const auto sw = sweep_delta(*base, {1e-2, 0.0});
  auto p = base->params();
  p.delta = 0.0;
  p.dt = base->time_step();
  const auto plain = run_level1(base->with_params(p));
  const auto& m = sw.members.back();
  ASSERT_EQ(m.trajectory.steps.size(), plain.steps.size());
  for (std::size_t n = 0; n < plain.steps.size(); ++n) {
    for (int sp = 0; sp < 4; ++sp) EXPECT_EQ(m.trajectory.steps[n].density[sp], plain.steps[n].density[sp]);
    EXPECT_EQ(m.trajectory.steps[n].coeffs, plain.steps[n].coeffs);
  }
  EXPECT_EQ(m.artificial_pressure, 0.0);
}

TEST(Sweep, DeltaStudy) {
  const auto base = make_problem(bundled("inflow-fill", 40));
  const auto sw = sweep_delta(*base, {1e-1, 5e-2, 2.5e-2, 1.25e-2});
  for (std::size_t i = 1; i < sw.members.size(); ++i) {
    EXPECT_LT(sw.members[i].artificial_pressure, sw.members[i - 1].artificial_pressure);
  }
  for (std::size_t i = 2; i < sw.members.size(); ++i) {
    EXPECT_LT(sw.members[i].pressure_difference, sw.members[i - 1].pressure_difference);
  }
}

TEST(Sweep, FailedMemberIsRecorded) {
  Scenario s = bundled("inflow-fill", 30);
  s.params.max_iter = 2;
  const auto sw = sweep_epsilon(*make_problem(s), {1e-1, 1e-2});
  for (const auto& m : sw.members) {
    EXPECT_FALSE(m.ok);
    EXPECT_FALSE(m.error.empty());
  }
}

TEST(Workers, EnvironmentCap) {
  ::setenv("BIFLUID_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("BIFLUID_WORKERS", "junk", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("BIFLUID_WORKERS");
}
