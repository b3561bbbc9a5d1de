#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bifluid/momentum.hpp"
#include "support.hpp"

using namespace bifluid;
using namespace bifluid::testing;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd coefficients_of(const Trajectory& t) { return t.steps.back().coeffs; }

}  // namespace

TEST(GalerkinBasis, OrthonormalUnderRefinement) {
  for (int n : {20, 50, 200}) {
    const Mesh m = Mesh::interval(n, 1.0);
    const GalerkinBasis b(m, 8);
    EXPECT_LE(b.orthonormality_error(), 1e-12) << n;
    EXPECT_LE(b.drift(), 1e-12) << n;
  }
  const Mesh r = Mesh::rectangle(16, 10, 2.0, 1.0);
  const GalerkinBasis b2(r, 4, 3);
  EXPECT_EQ(b2.size(), 2u * 4 * 3);
  EXPECT_LE(b2.orthonormality_error(), 1e-12);
}

TEST(GalerkinBasis, ModesVanishOnBoundary) {
  // Modes are mirror-(anti)symmetric about x = 1/2 and their linear extrapolation
  // from the two outermost cells to the wall is zero up to O(h^2).
  const Mesh m = Mesh::interval(40, 1.0);
  const GalerkinBasis b(m, 6);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;  // sin(j pi (1 - x)) = -(-1)^j sin(j pi x)
    for (int k = 0; k < 40; ++k) EXPECT_NEAR(b.cell_values()(k, i), sign * b.cell_values()(39 - k, i), 1e-12);
    const double edge = 1.5 * b.cell_values()(0, i) - 0.5 * b.cell_values()(1, i);
    EXPECT_LE(std::abs(edge), 2.0 * std::pow(kPi * (i + 1), 2) * std::pow(m.spacing(0), 2));
  }
}

TEST(ProjectRhs, UnitModesAndLinearity) {
  const Mesh m = Mesh::interval(64, 1.0);
  const GalerkinBasis b(m, 8);
  const Eigen::VectorXd w3 = b.cell_values().col(2);
  const auto e3 = project_rhs(std::span<const double>(w3.data(), w3.size()), b);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(e3[i], i == 2 ? 1.0 : 0.0, 1e-13);

  const Eigen::VectorXd mix = 2.0 * b.cell_values().col(0) + 0.5 * b.cell_values().col(1);
  const auto c = project_rhs(std::span<const double>(mix.data(), mix.size()), b);
  EXPECT_NEAR(c[0], 2.0, 1e-13);
  EXPECT_NEAR(c[1], 0.5, 1e-13);
  for (int i = 2; i < 8; ++i) EXPECT_NEAR(c[i], 0.0, 1e-13);

  // sin(12 pi x) lies outside the span of the first 8 modes.
  std::vector<double> high(64);
  for (int k = 0; k < 64; ++k) high[k] = std::sin(12 * kPi * m.center(k)[0]);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(project_rhs(std::span<const double>(high), b)[i], 0.0, 1e-13);
}

TEST(ViscousStress, Cases) {
  const ViscosityParams visc{1.0, 0.5};
  const Mat2 zero{};
  const Mat2 s0 = viscous_stress(zero, visc);
  for (const auto& row : s0) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
  const Mat2 anti{{{0.0, 2.0}, {-2.0, 0.0}}};
  const Mat2 sa = viscous_stress(anti, visc);
  for (const auto& row : sa) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
  const Mat2 g1{{{3.0, 0.0}, {0.0, 0.0}}};
  EXPECT_DOUBLE_EQ(viscous_stress(g1, visc, 1)[0][0], 7.5);
  // 2D: S = mu (G + G^T) + lambda tr(G) I.
  const Mat2 g{{{1.0, 2.0}, {0.5, -3.0}}};
  const Mat2 s = viscous_stress(g, {0.7, 0.2});
  EXPECT_DOUBLE_EQ(s[0][0], 0.7 * 2.0 + 0.2 * (-2.0));
  EXPECT_DOUBLE_EQ(s[0][1], 0.7 * 2.5);
  EXPECT_DOUBLE_EQ(s[1][1], 0.7 * (-6.0) + 0.2 * (-2.0));
  EXPECT_DOUBLE_EQ(contract(g, g), 1.0 + 4.0 + 0.25 + 9.0);
}

TEST(Lift, MatchesBoundaryVelocity) {
  const Mesh m = Mesh::interval(50, 1.0);
  ComponentProfile ux;
  ux.base = 0.8;
  ux.sine = 0.2;
  const VelocityProfile ub(1, {1.0, 1.0}, {ux, ComponentProfile{}});
  const Lift blend(m, ub, Lift::Kind::Blend, 0.2);
  const Lift full(m, ub, Lift::Kind::Full);
  for (double x : {0.0, 1.0}) EXPECT_NEAR(blend.value({x, 0.5})[0], ub.value({x, 0.5})[0], 1e-15);
  EXPECT_EQ(blend.value({0.5, 0.5})[0], 0.0);
  EXPECT_NEAR(full.value({0.5, 0.5})[0], 1.0, 1e-15);
  // Gradient of the blended lift against finite differences.
  for (double x : {0.05, 0.13, 0.9}) {
    const double e = 1e-6;
    const double fd = (blend.value({x + e, 0.5})[0] - blend.value({x - e, 0.5})[0]) / (2 * e);
    EXPECT_NEAR(blend.gradient({x, 0.5})[0][0], fd, 1e-6);
  }
}

TEST(MomentumStep, ZeroDataStaysAtRest) {
  Scenario s = bundled("viscous-decay", 40);
  s.initial_velocity.reset();
  s.params.frozen_densities = false;
  s.params.convection = true;
  s.params.pressure = true;
  s.params.delta = 0.01;
  s.params.t_end = 0.1;
  const auto t = run_level1(make_problem(s));
  for (const auto& st : t.steps) EXPECT_LE(st.coeffs.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(MomentumStep, SingleModeViscousDecay) {
  // Frozen densities rho + z = 2, mu = 0.05: c' = -nu pi^2 c with nu = 2 mu / 2.
  // Backward Euler gives c_N = c_0 (1 + dt nu pi^2)^{-N} exactly.
  const double nu = 2 * 0.05 / 2.0;
  const double lam = nu * kPi * kPi;
  double previous_error = 1.0;
  for (double dt : {1e-3, 1e-4}) {
    Scenario s = bundled("viscous-decay", 50);
    s.params.dt = dt;
    s.params.t_end = 0.5;
    const auto t = run_level1(make_problem(s));
    const int steps = static_cast<int>(t.steps.size());
    const double c0 = t.initial.coeffs[0];
    EXPECT_NEAR(c0, 1.0 / std::sqrt(2.0), 1e-12);
    const double c = coefficients_of(t)[0];
    EXPECT_NEAR(c, c0 * std::pow(1.0 + dt * lam, -steps), 1e-10);
    for (int i = 1; i < t.initial.coeffs.size(); ++i) EXPECT_NEAR(coefficients_of(t)[i], 0.0, 1e-12);
    const double err = std::abs(c / c0 - std::exp(-lam * 0.5));
    EXPECT_LT(err, previous_error);
    previous_error = err;
  }
  EXPECT_LE(previous_error, 1e-4);
}

TEST(MomentumStep, GalerkinResidualAfterEveryStep) {
  for (const char* name : {"inflow-fill", "two-isentropic-gases", "compressive"}) {
    const auto t = run_level1(make_problem(bundled(name, 50)));
    EXPECT_LE(weak_solution_ledgers(t).momentum_max, 1e-10) << name;
  }
}

TEST(MomentumStep, KineticEnergyNonIncreasingInClosedBox) {
  const auto t = run_level1(make_problem(bundled("viscous-decay", 50)));
  const auto led = energy_ledger(t);
  double prev = 1e300;
  for (const auto& e : led.steps) {
    EXPECT_LE(e.kinetic, prev);
    prev = e.kinetic;
  }
}

TEST(MassFluxes, TelescopeToBoundaryFlux) {
  const Mesh m = Mesh::interval(20, 1.0);
  const auto prof = VelocityProfile::constant(1, {1.0, 1.0}, {0.5, 0.0});
  std::array<std::vector<double>, 4> d;
  for (auto& v : d) v.assign(2, 2.0);
  const auto bd = BoundaryData::build(m, prof, d);
  const auto u = face_velocity_from_profile(m, prof, bd);
  std::vector<double> rho(20);
  for (int k = 0; k < 20; ++k) rho[k] = 1.0 + 0.1 * k;
  const auto fl = mass_fluxes(m, u, 0.01, rho, std::vector<double>(2, 2.0));
  // Upwind convective flux carries the left value; the boundary flux is r_B u.n at inflow.
  EXPECT_NEAR(fl.interior_convective[0], 0.5 * rho[0], 1e-15);
  EXPECT_NEAR(fl.interior_diffusive[0], -0.01 * (rho[1] - rho[0]) / m.spacing(0), 1e-13);
  EXPECT_NEAR(fl.boundary[0], -0.5 * 2.0, 1e-15);
  EXPECT_NEAR(fl.boundary[1], 0.5 * rho[19], 1e-15);
}
