#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifluid/geometry.hpp"

namespace bifluid {

/// Barotropic two-component pressure law P(R, Z).
///
/// The isentropic preset is P = a+ R^g+ + a- Z^g-. Custom laws carry their own
/// evaluators; their Helmholtz function is computed by quadrature.
class PressureLaw {
 public:
  enum class Kind { Isentropic, Custom };

  static PressureLaw isentropic(double a_plus, double a_minus, double gamma_plus,
                                double gamma_minus);
  /// Single-component law P = a R^gamma (a- = 0).
  static PressureLaw pure(double a, double gamma);
  static PressureLaw custom(std::function<double(double, double)> p,
                            std::function<double(double, double)> dp_dr,
                            std::function<double(double, double)> dp_dz, double gamma,
                            double beta);

  Kind kind() const { return kind_; }
  double a_plus() const { return a_plus_; }
  double a_minus() const { return a_minus_; }
  double gamma_plus() const { return gamma_plus_; }
  double gamma_minus() const { return gamma_minus_; }

  /// Growth exponent in R.
  double gamma() const { return gamma_; }
  /// Growth exponent in Z (beta).
  double beta() const { return beta_; }
  /// gamma_Bog = min{2 gamma/3 - 1, gamma/2}.
  double gamma_bog() const;

  double value(double r, double z) const;
  double d_dr(double r, double z) const;
  double d_dz(double r, double z) const;

 private:
  Kind kind_ = Kind::Isentropic;
  double a_plus_ = 1.0;
  double a_minus_ = 1.0;
  double gamma_plus_ = 2.0;
  double gamma_minus_ = 2.0;
  double gamma_ = 2.0;
  double beta_ = 2.0;
  std::function<double(double, double)> p_;
  std::function<double(double, double)> dp_dr_;
  std::function<double(double, double)> dp_dz_;
};

/// Rejects negative arguments.
double pressure(const PressureLaw& law, double r, double z);

/// Smallest admissible artificial-pressure exponent bound: max{9/2, beta, gamma}.
double artificial_exponent_bound(const PressureLaw& law);

/// P(R,Z) + delta (R^c + Z^c). Throws for c <= max{9/2, beta, gamma} unless
/// `allow_small_exponent` is set (experiments only).
double pressure_delta(const PressureLaw& law, double r, double z, double delta, double c,
                      bool allow_small_exponent = false);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Simpson evaluation of R \int_1^R P(s, sZ/R)/s^2 ds.
/// Throws QuadratureError when the tolerance cannot be met.
QuadratureResult helmholtz_quadrature(const PressureLaw& law, double r, double z,
                                      double rel_tol = 1e-10);

/// Helmholtz function H(R,Z) = R \int_1^R P(s, sZ/R)/s^2 ds, H(0,Z) = 0.
/// Closed form for the isentropic preset, quadrature otherwise.
double helmholtz(const PressureLaw& law, double r, double z);

/// |R dH/dR + Z dH/dZ - H - P| with central differences of step `step`.
double helmholtz_pde_residual(const PressureLaw& law, double r, double z, double step = 1e-4);

/// Energy potential H_delta used by the energy ledger: a convex solution of
/// R dH/dR + Z dH/dZ - H = P plus delta/(c-1) (R^c + Z^c).
///
/// For the isentropic preset the Z-part is a- Z^g-/(g- - 1) (Z ln Z when g- = 1),
/// which differs from helmholtz() by a degree-one homogeneous term. Custom laws
/// fall back to helmholtz() with finite-difference derivatives.
struct EnergyPotential {
  const PressureLaw* law = nullptr;
  double delta = 0.0;
  double c = 6.0;

  double value(double r, double z) const;
  Vec2 gradient(double r, double z) const;
  Mat2 hessian(double r, double z) const;
  /// Bregman gap H(a) - H(b) - grad H(b).(a - b).
  double bregman(double ra, double za, double rb, double zb) const;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double error_estimate() const { return estimate_; }

 private:
  double estimate_;
};

// ---------------------------------------------------------------------------
// Closures f, g and their reciprocals F = 1/f, G = 1/g.

enum class ClosureFunction { SmallF, SmallG, BigF, BigG };

class Closure {
 public:
  /// f(s) = s^{1/g+ - 1}, g(s) = (1-s)^{1/g- - 1}.
  static Closure isentropic(double gamma_plus, double gamma_minus);
  static Closure custom(std::function<double(double)> f, std::function<double(double)> g);

  double f(double alpha) const;
  double g(double alpha) const;
  double big_f(double alpha) const { return 1.0 / f(alpha); }
  double big_g(double alpha) const { return 1.0 / g(alpha); }

  /// Inverse of F on [lo, hi]; the value is clamped into [F(lo), F(hi)] first.
  /// `clamped` is set when clamping was needed.
  double big_f_inverse(double value, double lo, double hi, bool* clamped = nullptr) const;
  double big_g_inverse(double value, double lo, double hi, bool* clamped = nullptr) const;

  bool is_preset() const { return preset_; }
  double gamma_plus() const { return gamma_plus_; }
  double gamma_minus() const { return gamma_minus_; }

 private:
  bool preset_ = true;
  double gamma_plus_ = 2.0;
  double gamma_minus_ = 2.0;
  std::function<double(double)> f_;
  std::function<double(double)> g_;
};

/// Evaluates f, g, F or G; rejects alpha outside (0,1).
double closure_eval(const Closure& cl, ClosureFunction which, double alpha);

/// Range bounds of F and G over [alpha_lo, alpha_hi] (monotone closures).
struct ClosureBounds {
  double alpha_lo = 0.0;
  double alpha_hi = 1.0;
  double f_lo = 0.0;  ///< lower bound of F
  double f_hi = 0.0;
  double g_lo = 0.0;  ///< lower bound of G
  double g_hi = 0.0;
};
ClosureBounds closure_bounds(const Closure& cl, double alpha_lo, double alpha_hi);

// ---------------------------------------------------------------------------
// Truncations.

/// T_k(s) = k T(s/k), T(s) = s on [0,1], s - (s-1)^2/4 on [1,3], 2 beyond.
double truncation_T(double k, double s);
double truncation_T_derivative(double k, double s);
/// L_k(s) = s \int_1^s T_k(t)/t^2 dt (closed form).
double truncation_L(double k, double s);
double truncation_L_derivative(double k, double s);

// ---------------------------------------------------------------------------
// Validators.

/// Checks Pi(R) = P(R, R s) is non-decreasing in R for each sampled s and
/// reports the largest d for which Pi - d R^gamma is still non-decreasing.
struct MonotoneDecompositionReport {
  bool monotone = true;
  double d_max = 0.0;
  struct Violation {
    double r1, r2, s;
  };
  std::vector<Violation> violations;
};
MonotoneDecompositionReport monotone_decomposition_check(const PressureLaw& law,
                                                         const std::vector<double>& ratios,
                                                         const std::vector<double>& r_samples);

struct HypothesisCheck {
  std::string tag;  ///< hypothesis identifier, e.g. "pressure-growth"
  bool passed = true;
  std::string detail;
  double constant_lower = 0.0;
  double constant_upper = 0.0;
};

/// Sampling-based checks over the cone a_lo < Z/R < a_hi: P(0,0) = 0, growth
/// of P and of the energy potential, monotonicity of P in Z and R, convexity of
/// the energy potential, and gamma >= 2.
std::vector<HypothesisCheck> check_pressure_hypotheses(const PressureLaw& law, double a_lo,
                                                       double a_hi, double r_max = 10.0,
                                                       int samples = 20);

}  // namespace bifluid
