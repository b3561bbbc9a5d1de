#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bifluid/thermo.hpp"

using namespace bifluid;

namespace {

const PressureLaw kPreset = PressureLaw::isentropic(1.0, 1.0, 2.0, 2.0);

// Composite Simpson rule, used as an independent quadrature oracle.
template <class F>
double simpson(F&& f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

PressureLaw linear_law(double c) {
  return PressureLaw::custom([c](double r, double) { return c * r; }, [c](double, double) { return c; },
                             [](double, double) { return 0.0; }, 2.0, 1.0);
}

}  // namespace

TEST(Pressure, PresetValues) {
  EXPECT_EQ(pressure(kPreset, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(pressure(kPreset, 2.0, 1.0), 5.0);
  const PressureLaw law = PressureLaw::isentropic(1.3, 17.0, 2.5, 1.4);
  EXPECT_DOUBLE_EQ(pressure(law, 1.7, 0.0), 1.3 * std::pow(1.7, 2.5));
}

TEST(Pressure, RejectsNegativeDensities) {
  EXPECT_THROW(pressure(kPreset, -1e-3, 1.0), std::invalid_argument);
  EXPECT_THROW(pressure(kPreset, 1.0, -1.0), std::invalid_argument);
}

TEST(Pressure, PartialsMatchFiniteDifferences) {
  const PressureLaw law = PressureLaw::isentropic(1.0, 0.5, 2.4, 1.4);
  const double r = 1.3, z = 0.7, e = 1e-6;
  EXPECT_NEAR(law.d_dr(r, z), (law.value(r + e, z) - law.value(r - e, z)) / (2 * e), 1e-7);
  EXPECT_NEAR(law.d_dz(r, z), (law.value(r, z + e) - law.value(r, z - e)) / (2 * e), 1e-7);
}

TEST(PressureDelta, Values) {
  EXPECT_DOUBLE_EQ(pressure_delta(kPreset, 1.3, 0.4, 0.0, 5.0), pressure(kPreset, 1.3, 0.4));
  EXPECT_EQ(pressure_delta(kPreset, 0.0, 0.0, 0.3, 5.0), 0.0);
  EXPECT_NEAR(pressure_delta(kPreset, 1.0, 1.0, 0.1, 5.0), 2.2, 1e-15);
}

TEST(PressureDelta, ExponentConstraint) {
  EXPECT_DOUBLE_EQ(artificial_exponent_bound(kPreset), 4.5);
  EXPECT_THROW(pressure_delta(kPreset, 1.0, 1.0, 0.1, 4.5), std::invalid_argument);
  EXPECT_THROW(pressure_delta(kPreset, 1.0, 1.0, 0.1, 3.0), std::invalid_argument);
  EXPECT_NEAR(pressure_delta(kPreset, 1.0, 1.0, 0.1, 3.0, true), 2.2, 1e-15);
  const PressureLaw stiff = PressureLaw::isentropic(1.0, 1.0, 6.0, 2.0);
  EXPECT_DOUBLE_EQ(artificial_exponent_bound(stiff), 6.0);
}

TEST(Helmholtz, ExactZeros) {
  for (double z : {0.0, 0.2, 1.0, 4.0}) {
    EXPECT_EQ(helmholtz(kPreset, 1.0, z), 0.0);
    EXPECT_EQ(helmholtz(kPreset, 0.0, z), 0.0);
  }
}

TEST(Helmholtz, PureLawClosedForm) {
  // H(R) = (R^g - R)/(g - 1) for P = R^g.
  const PressureLaw pure = PressureLaw::pure(1.0, 2.0);
  EXPECT_NEAR(helmholtz(pure, 2.0, 0.0), 2.0, 1e-14);
  const PressureLaw p3 = PressureLaw::pure(1.0, 3.0);
  EXPECT_NEAR(helmholtz(p3, 1.7, 0.0), (std::pow(1.7, 3.0) - 1.7) / 2.0, 1e-13);
}

TEST(Helmholtz, PresetAgreesWithIndependentQuadrature) {
  const PressureLaw law = PressureLaw::isentropic(1.0, 0.5, 2.4, 1.4);
  for (double r : {0.3, 1.0, 2.5}) {
    for (double z : {0.1, 0.8, 2.0}) {
      const double oracle =
          r * simpson([&](double s) { return law.value(s, s * z / r) / (s * s); }, 1.0, r);
      EXPECT_NEAR(helmholtz(law, r, z), oracle, 1e-9 * std::max(1.0, std::abs(oracle))) << r << ' ' << z;
    }
  }
}

TEST(Helmholtz, CustomLawUsesQuadrature) {
  const PressureLaw custom = PressureLaw::custom(
      [](double r, double z) { return r * r + z * z; }, [](double r, double) { return 2 * r; },
      [](double, double z) { return 2 * z; }, 2.0, 2.0);
  for (double r : {0.5, 2.0}) {
    for (double z : {0.3, 1.5}) EXPECT_NEAR(helmholtz(custom, r, z), helmholtz(kPreset, r, z), 1e-9);
  }
  const auto q = helmholtz_quadrature(custom, 2.0, 1.5);
  EXPECT_LT(q.error_estimate, 1e-8);
}

TEST(HelmholtzPde, Residuals) {
  EXPECT_LT(helmholtz_pde_residual(kPreset, 1.0, 0.5, 1e-4), 1e-6);
  for (double r : {0.5, 1.0, 3.0}) EXPECT_LT(helmholtz_pde_residual(PressureLaw::pure(1.0, 2.0), r, 0.0), 1e-8);
}

TEST(HelmholtzPde, LinearLawIsExact) {
  // H = c R ln R for P = c R; at R = e the identity reads e(c + c) - c e - c e = 0.
  const double c = 1.7;
  const PressureLaw law = linear_law(c);
  EXPECT_NEAR(helmholtz(law, std::numbers::e, 0.0), c * std::numbers::e, 1e-9);
  EXPECT_LT(helmholtz_pde_residual(law, std::numbers::e, 0.0), 1e-8);
}

TEST(EnergyPotential, BregmanNonnegativeAndConvex) {
  const PressureLaw law = PressureLaw::isentropic(1.0, 0.5, 2.4, 1.4);
  EnergyPotential pot{&law, 1e-3, 5.0};
  for (double ra : {0.2, 1.0, 2.0}) {
    for (double za : {0.1, 0.9}) {
      for (double rb : {0.4, 1.5}) {
        for (double zb : {0.3, 1.2}) EXPECT_GE(pot.bregman(ra, za, rb, zb), -1e-14);
      }
      const Mat2 h = pot.hessian(ra, za);
      EXPECT_GE(h[0][0], 0.0);
      EXPECT_GE(h[0][0] * h[1][1] - h[0][1] * h[1][0], -1e-12);
    }
  }
  // R dH/dR + Z dH/dZ - H = P + delta (R^c + Z^c).
  const double r = 1.3, z = 0.6;
  const Vec2 g = pot.gradient(r, z);
  EXPECT_NEAR(r * g[0] + z * g[1] - pot.value(r, z), pressure_delta(law, r, z, 1e-3, 5.0), 1e-10);
}

TEST(Closure, PresetValues) {
  const Closure cl = Closure::isentropic(2.0, 2.0);
  EXPECT_NEAR(closure_eval(cl, ClosureFunction::SmallF, 0.25), 2.0, 1e-15);
  EXPECT_NEAR(closure_eval(cl, ClosureFunction::SmallG, 0.75), 2.0, 1e-15);
  for (int i = 1; i < 100; ++i) {
    const double a = i / 100.0;
    EXPECT_NEAR(cl.big_f(a) * cl.f(a), 1.0, 1e-15);
    EXPECT_NEAR(cl.big_g(a) * cl.g(a), 1.0, 1e-15);
  }
}

TEST(Closure, StrictMonotonicityAndInverse) {
  const Closure cl = Closure::isentropic(2.4, 1.4);
  double prev_f = 0.0, prev_g = 1e300;
  for (int i = 1; i < 200; ++i) {
    const double a = i / 200.0;
    EXPECT_GT(cl.big_f(a), prev_f);
    EXPECT_LT(cl.big_g(a), prev_g);
    prev_f = cl.big_f(a);
    prev_g = cl.big_g(a);
  }
  for (double a : {0.25, 0.4, 0.75}) {
    EXPECT_NEAR(cl.big_f_inverse(cl.big_f(a), 0.25, 0.75), a, 1e-13);
    EXPECT_NEAR(cl.big_g_inverse(cl.big_g(a), 0.25, 0.75), a, 1e-13);
  }
  bool clamped = false;
  EXPECT_DOUBLE_EQ(cl.big_f_inverse(1e6, 0.25, 0.75, &clamped), 0.75);
  EXPECT_TRUE(clamped);
  const auto b = closure_bounds(cl, 0.25, 0.75);
  EXPECT_DOUBLE_EQ(b.f_lo, cl.big_f(0.25));
  EXPECT_DOUBLE_EQ(b.f_hi, cl.big_f(0.75));
  // G decreases, so its range is [G(alpha_hi), G(alpha_lo)].
  EXPECT_DOUBLE_EQ(b.g_lo, cl.big_g(0.75));
  EXPECT_DOUBLE_EQ(b.g_hi, cl.big_g(0.25));
}

TEST(Closure, RejectsOutOfRange) {
  const Closure cl = Closure::isentropic(2.0, 2.0);
  EXPECT_THROW(closure_eval(cl, ClosureFunction::SmallF, 0.0), std::invalid_argument);
  EXPECT_THROW(closure_eval(cl, ClosureFunction::BigG, 1.0), std::invalid_argument);
  EXPECT_THROW(closure_eval(cl, ClosureFunction::BigF, -0.2), std::invalid_argument);
}

TEST(Truncation, ShapeOfT) {
  EXPECT_EQ(truncation_T(1.0, 0.5), 0.5);
  for (double k : {1.0, 2.5, 10.0}) {
    for (int i = 0; i <= 400; ++i) {
      const double s = 0.01 * i * k;
      if (s <= k) EXPECT_DOUBLE_EQ(truncation_T(k, s), s);
      if (s >= 3 * k) EXPECT_DOUBLE_EQ(truncation_T(k, s), 2 * k);
      const double d = truncation_T_derivative(k, s);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
    }
    // C^1 at the junctions and concave in between.
    EXPECT_NEAR(truncation_T_derivative(k, k), 1.0, 1e-15);
    EXPECT_NEAR(truncation_T_derivative(k, 3 * k), 0.0, 1e-15);
    for (int i = 1; i < 50; ++i) {
      const double s = k * (1.0 + 2.0 * i / 50.0);
      EXPECT_LE(truncation_T_derivative(k, s + 1e-3), truncation_T_derivative(k, s) + 1e-15);
    }
  }
}

TEST(Truncation, LAgainstQuadratureAndIdentity) {
  for (double k : {1.0, 2.0, 5.0}) {
    EXPECT_EQ(truncation_L(k, 1.0), 0.0);
    for (double s : {0.1, 0.7, 1.5, 2.9, 4.0, 12.0, 30.0}) {
      const double oracle = s * simpson([&](double t) { return truncation_T(k, t) / (t * t); }, 1.0, s, 20000);
      EXPECT_NEAR(truncation_L(k, s), oracle, 1e-8 * std::max(1.0, std::abs(oracle)));
      const double e = 1e-5 * std::max(1.0, s);
      const double fd = (truncation_L(k, s + e) - truncation_L(k, s - e)) / (2 * e);
      EXPECT_NEAR(s * fd - truncation_L(k, s), truncation_T(k, s), 1e-6);
      EXPECT_NEAR(truncation_L_derivative(k, s), fd, 1e-7);
    }
  }
}

TEST(MonotoneDecomposition, PresetAtHalfRatio) {
  // Pi(R) = R^2 (1 + 1/4): monotone, and Pi - d R^2 stays monotone up to d = 5/4.
  std::vector<double> rs;
  for (int i = 0; i <= 50; ++i) rs.push_back(0.1 * i);
  const auto rep = monotone_decomposition_check(kPreset, {0.5}, rs);
  EXPECT_TRUE(rep.monotone);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_GE(rep.d_max, 1.0);
  EXPECT_NEAR(rep.d_max, 1.25, 1e-9);
  const auto zero = monotone_decomposition_check(kPreset, {0.0}, rs);
  EXPECT_TRUE(zero.monotone);
}

TEST(MonotoneDecomposition, BruteForcePairs) {
  const PressureLaw law = PressureLaw::isentropic(1.0, 0.5, 2.4, 1.4);
  std::vector<double> rs;
  for (int i = 0; i <= 30; ++i) rs.push_back(0.15 * i);
  const std::vector<double> ratios{0.2, 0.6, 1.4};
  EXPECT_TRUE(monotone_decomposition_check(law, ratios, rs).monotone);
  for (double s : ratios) {
    for (double r1 : rs) {
      for (double r2 : rs) {
        if (r1 < r2) EXPECT_LE(law.value(r1, r1 * s), law.value(r2, r2 * s));
      }
    }
  }
  // A law that decreases in R is caught.
  const PressureLaw bad = PressureLaw::custom([](double r, double) { return r * (2.0 - r); },
                                              [](double r, double) { return 2.0 - 2 * r; },
                                              [](double, double) { return 0.0; }, 2.0, 1.0);
  const auto rep = monotone_decomposition_check(bad, {0.5}, rs);
  EXPECT_FALSE(rep.monotone);
  EXPECT_FALSE(rep.violations.empty());
}

TEST(Hypotheses, PresetPassesAndSubquadraticFails) {
  for (const auto& h : check_pressure_hypotheses(kPreset, 0.2, 5.0)) EXPECT_TRUE(h.passed) << h.tag << ": " << h.detail;
  const PressureLaw soft = PressureLaw::isentropic(1.0, 1.0, 1.4, 1.4);
  bool failed = false;
  for (const auto& h : check_pressure_hypotheses(soft, 0.2, 5.0)) failed = failed || !h.passed;
  EXPECT_TRUE(failed);
}

TEST(Hypotheses, GammaBog) {
  EXPECT_DOUBLE_EQ(kPreset.gamma_bog(), std::min(2.0 * 2.0 / 3.0 - 1.0, 1.0));
  EXPECT_DOUBLE_EQ(PressureLaw::isentropic(1.0, 1.0, 6.0, 2.0).gamma_bog(), 3.0);
}
