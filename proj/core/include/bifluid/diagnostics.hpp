#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bifluid/coupling.hpp"
#include "bifluid/report.hpp"

namespace bifluid {

// ---------------------------------------------------------------------------
// Domination cone.

struct DominationMargins {
  static constexpr std::array<const char*, 6> kNames{
      "Z - a_lo R", "a_hi R - Z", "rho - F_lo R", "F_hi R - rho", "z - G_lo Z", "G_hi Z - z"};
  std::array<double, 6> margin{};  ///< minimum over cells
  std::array<int, 6> cell{};       ///< cell attaining the minimum
  double min_margin = 0.0;
  int worst = 0;  ///< index into kNames
  bool passed = true;
};

/// Margins of the six cone inequalities; pass iff all are >= -tolerance.
DominationMargins domination_check(const FluidState& state, const DominationBounds& bounds,
                                   double tolerance = 1e-12);

struct DominationSeries {
  std::vector<double> min_margin;  ///< per state, index 0 = initial
  int violating_states = 0;
  std::size_t worst_state = 0;
  DominationMargins worst;
  bool passed = true;
};
DominationSeries domination_series(const Trajectory& traj, double tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Ratio machinery.

struct RatioTransportReport {
  std::vector<double> time;
  std::vector<double> residual;  ///< ||Z/R - s||_L1 per state
  double final_residual = 0.0;
};

/// Evolves s from Z0/R0 with the implicit upwind transport step on the run's
/// face velocities and compares it with the ratio of the evolved densities.
RatioTransportReport ratio_transport_residual(const Trajectory& traj, double floor);

struct CompactnessValue {
  double tau = 0.0;
  double interior = 0.0;  ///< int R_n (s_n - s)^2 (tau)
  double boundary = 0.0;  ///< int_0^tau int_out R_n (s_n - s)^2 |u.n|
};

/// Both trajectories must share the time grid. Each tau is rounded to the
/// nearest recorded step.
std::vector<CompactnessValue> ratio_compactness(const Trajectory& run, const Trajectory& limit,
                                                std::span<const double> taus, double floor);

struct TransportSetup {
  VelocityProfile velocity;
  std::function<double(const Vec2&)> s0;
  std::function<double(const Vec2&)> s_boundary;
  std::function<double(const Vec2&)> rho0;
  std::function<double(const Vec2&)> rho_boundary;
  double t_end = 0.5;
  double cfl = 0.5;
  double threshold = 1e-6;
};

struct AgreementReport {
  std::size_t cells = 0;
  double h = 0.0;
  double dt = 0.0;
  double inside = 0.0;   ///< ||s_explicit - s_implicit||_L1 on {rho > threshold}
  double outside = 0.0;  ///< same on the complement (reported, not asserted)
  double positive_fraction = 0.0;
};

/// Explicit versus implicit upwind for pure transport with a companion
/// density evolved by the same velocity (eps = 0).
AgreementReport almost_uniqueness_test(const Mesh& mesh, const TransportSetup& setup);

struct OrderFit {
  std::vector<double> h;
  std::vector<double> value;
  std::vector<double> pairwise;  ///< log2 ratios of consecutive values
  double order = 0.0;            ///< least-squares slope of log value vs log h
};
OrderFit fit_order(std::vector<double> h, std::vector<double> value);

// ---------------------------------------------------------------------------
// Bogovskii operator and pressure near the boundary.

struct BogovskiiResult {
  std::vector<double> nodes;  ///< B at cell interfaces, size cells + 1
  double mean = 0.0;
  double boundary_residual = 0.0;    ///< max(|B(0)|, |B(L)|)
  double divergence_residual = 0.0;  ///< max |(B_{i+1} - B_i)/h - (r_i - mean)|
};
BogovskiiResult bogovskii_1d(const Mesh& mesh, std::span<const double> r);

/// ||B||_{W^{1,p}} / ||r||_{L^p} over a random ensemble of piecewise-constant fields.
struct BogovskiiConstant {
  double p = 2.0;
  std::vector<double> ratios;
  double fitted = 0.0;  ///< max ratio
};
BogovskiiConstant bogovskii_constant(const Mesh& mesh, double p, int samples, std::uint64_t seed);

struct NearBoundaryFit {
  std::vector<double> h;
  std::vector<double> integral;  ///< int_0^T int_{U_h} P dx dt
  std::vector<double> volume;    ///< |U_h|
  double exponent = 0.0;
  bool passed = false;  ///< exponent > 0
};
/// `pressure[n]` holds the cell pressure on step n with length dt[n].
NearBoundaryFit near_boundary_pressure(const Mesh& mesh, std::span<const double> dt,
                                       const std::vector<std::vector<double>>& pressure,
                                       std::span<const double> h_list);
NearBoundaryFit near_boundary_pressure(const Trajectory& traj, std::span<const double> h_list);

// ---------------------------------------------------------------------------
// Weak formulation and trajectory certificates.

/// Products of {1, x, x^2, sin pi x, cos pi x} (per axis, x scaled by the length)
/// with {1, t, sin(pi t / T)}.
std::vector<TestFunction> test_function_battery(const Mesh& mesh, double t_end);

struct WeakLedgers {
  CertificateReport report;
  /// max over species and test functions of |final residual| / scale
  double continuity_max = 0.0;
  double unit_max = 0.0;       ///< the unit test function only
  double momentum_max = 0.0;   ///< max Galerkin residual over steps
  double alpha_max = 0.0;      ///< volume-fraction transport, relative
  double energy_min = 0.0;     ///< min relative energy defect
};
WeakLedgers weak_solution_ledgers(const Trajectory& traj);

/// Volume fraction alpha = F^{-1}(rho / R) per state. Norms are cell-volume weighted.
struct AlphaReconstruction {
  std::vector<double> alpha;        ///< from rho / R
  std::vector<double> alpha_tilde;  ///< from z / Z
  double alpha_difference = 0.0;    ///< ||alpha - alpha_tilde||_L1
  double rho_residual = 0.0;        ///< ||f(alpha) rho - R||_L1
  double z_residual = 0.0;          ///< ||g(alpha) z - Z||_L1
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  bool in_range = true;
  int clamped = 0;
};
AlphaReconstruction reconstruct_alpha(const FluidState& state, const Closure& closure,
                                      double alpha_lo, double alpha_hi, double floor,
                                      double cell_volume);

struct CertifyOptions {
  double mass_tolerance = 1e-10;
  double domination_tolerance = 1e-12;
  double renorm_tolerance = 1e-8;
  double energy_tolerance = 1e-6;
  double momentum_tolerance = 1e-8;
  bool weak_ledgers = true;
};

/// Every certificate of a level-I run, as a pure function of the recorded data.
CertificateReport certify_trajectory(const Trajectory& traj, const CertifyOptions& options = {});

}  // namespace bifluid
