#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "bifluid/geometry.hpp"
#include "bifluid/momentum.hpp"
#include "bifluid/report.hpp"
#include "bifluid/thermo.hpp"
#include "bifluid/transport.hpp"

namespace bifluid {

/// Thrown by validators; carries every violated hypothesis.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct SchemeParams {
  double eps = 0.01;
  double delta = 0.0;
  double c_exp = 5.0;
  int modes_x = 8;
  int modes_y = 1;
  double dt = 0.0;    ///< 0: chosen from the CFL number
  int steps = 0;      ///< 0: ceil(t_end / dt)
  double t_end = 0.5;
  double cfl = 0.5;
  ViscosityParams viscosity;
  double theta = 0.7;
  double tol_fp = 1e-11;
  int max_iter = 200;
  bool convection = true;
  bool pressure = true;
  bool frozen_densities = false;
  bool allow_small_exponent = false;
  bool abort_on_nonconvergence = true;

  /// Every violated constraint, each prefixed by its hypothesis id.
  std::vector<std::string> violations(const PressureLaw& law) const;
};

/// Pointwise domination bounds a_lo R <= Z <= a_hi R, F_lo R <= rho <= F_hi R,
/// G_lo Z <= z <= G_hi Z.
struct DominationBounds {
  double a_lo = 0.0;
  double a_hi = 1.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  double g_lo = 0.0;
  double g_hi = 0.0;
};

struct FluidState {
  std::array<std::vector<double>, 4> density;  ///< rho, z, R, Z
  Eigen::VectorXd coeffs;
  double time = 0.0;

  const std::vector<double>& field(Species s) const { return density[static_cast<int>(s)]; }
  std::vector<double> total_density() const;  ///< rho + z
};

/// Everything that stays fixed during a run.
struct ProblemSpec {
  Mesh mesh = Mesh::interval(10, 1.0);
  VelocityProfile u_b;
  std::array<std::vector<double>, 4> boundary_density;  ///< per boundary face
  PressureLaw law = PressureLaw::isentropic(1.0, 1.0, 2.0, 2.0);
  Closure closure = Closure::isentropic(2.0, 2.0);
  DominationBounds bounds;
  double alpha_lo = 0.1;
  double alpha_hi = 0.9;
  double ratio_floor = 0.0;  ///< 0: use a_lo
  SchemeParams params;
  Lift::Kind lift_kind = Lift::Kind::Blend;
  double lift_width = 0.2;
  std::array<std::vector<double>, 4> initial_density;
  std::vector<Vec2> initial_velocity;  ///< u_0 at cells; empty means v_0 = 0
};

class Problem {
 public:
  explicit Problem(ProblemSpec spec);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const ProblemSpec& spec() const { return spec_; }
  const Mesh& mesh() const { return spec_.mesh; }
  const BoundaryData& boundary() const { return bd_; }
  const PressureLaw& law() const { return spec_.law; }
  const Closure& closure() const { return spec_.closure; }
  const SchemeParams& params() const { return spec_.params; }
  const GalerkinBasis& basis() const { return *basis_; }
  const Lift& lift() const { return *lift_; }
  const LiftField& lift_field() const { return lift_field_; }
  const DominationBounds& bounds() const { return spec_.bounds; }
  double ratio_floor() const;
  const FluidState& initial_state() const { return initial_; }
  EnergyPotential energy_potential() const;

  /// Same data with different scheme parameters.
  std::shared_ptr<const Problem> with_params(const SchemeParams& params) const;

  /// Time step from the CFL rule at the initial state, or params.dt if set.
  double time_step() const;
  int step_count() const;

  /// Face velocities of v + b.
  FaceVelocity face_velocity(const Eigen::VectorXd& c) const;

 private:
  ProblemSpec spec_;
  BoundaryData bd_;
  std::unique_ptr<GalerkinBasis> basis_;
  std::unique_ptr<Lift> lift_;
  LiftField lift_field_;
  FluidState initial_;
};

struct StepRecord {
  double time = 0.0;
  double dt = 0.0;
  std::array<std::vector<double>, 4> density;
  Eigen::VectorXd coeffs;       ///< momentum solution
  Eigen::VectorXd coeffs_iter;  ///< iterate that produced the face velocities
  FaceVelocity faces;
  int iterations = 0;
  double change = 0.0;  ///< final ||v_{k+1} - v_k||
  double rcond = 0.0;
  bool converged = true;
};

struct FixedPointResult {
  StepRecord record;
  std::vector<double> changes;  ///< per iteration
  double observed_rate = 0.0;   ///< geometric mean of successive change ratios
};

/// One time step: iterate v -> (four parabolic solves, Galerkin solve) with damping.
/// Non-convergence is flagged in the record; the caller decides whether to abort.
FixedPointResult fixed_point_solve(const Problem& problem, const FluidState& state, double dt);

struct Trajectory {
  std::shared_ptr<const Problem> problem;
  FluidState initial;
  std::vector<StepRecord> steps;
  bool completed = true;
  std::string failure;

  FluidState state(std::size_t n) const;  ///< n = 0 is the initial state
  ScalarHistory species_history(Species s) const;
};

/// Runs [0, T]; throws SolverError on fixed-point failure when params ask to abort.
Trajectory run_level1(std::shared_ptr<const Problem> problem);

struct EnergyStep {
  double time = 0.0;
  double kinetic = 0.0;
  double helmholtz = 0.0;
  // Integrated over the step (already multiplied by dt).
  double viscous = 0.0;
  double outflow = 0.0;
  double inflow_relative = 0.0;  ///< -sum_in E_H(r_B|r) u.n |f|, >= 0
  double eps_hessian = 0.0;
  double work_pressure = 0.0;    ///< -sum P_delta div_h b
  double work_convection = 0.0;
  double work_viscous = 0.0;     ///< sum S(grad u) : grad b
  double work_inflow = 0.0;      ///< -sum_in H(r_B) u.n |f|
  double work_eps_lift = 0.0;
  double numerical = 0.0;        ///< dissipation of the discretisation, >= 0
  double kinetic_increment = 0.0;  ///< 1/2 sum rho0 |v - v0|^2 |K|
  double defect = 0.0;           ///< cumulative RHS - LHS
};

struct EnergyLedger {
  std::vector<EnergyStep> steps;
  double initial_energy = 0.0;
  double scale = 0.0;            ///< max(initial total energy, tiny)
  double min_defect = 0.0;
  double min_relative_defect = 0.0;
  double max_closure_error = 0.0;  ///< |defect - cumulative numerical| / scale
  double kinetic_loss = 0.0;
  double viscous_total = 0.0;
  double increment_total = 0.0;
  bool passed = true;
};

EnergyLedger energy_ledger(const Trajectory& traj, double tolerance = 1e-6);

struct SweepMember {
  double parameter = 0.0;
  bool ok = true;
  std::string error;
  Trajectory trajectory;
  double min_relative_defect = 0.0;
  double ratio_functional = 0.0;           ///< int R (s - s_ref)^2 at T
  double ratio_boundary_functional = 0.0;  ///< int int_out R (s - s_ref)^2 |u.n|
  double cauchy_difference = 0.0;          ///< L2 distance to the previous member at T
  double artificial_pressure = 0.0;        ///< delta sup_t int R^c (delta sweeps)
  double pressure_difference = 0.0;        ///< L2 distance of P_delta to the previous member
};

struct SweepReport {
  std::string parameter_name;
  std::vector<SweepMember> members;
};

/// Number of worker threads: BIFLUID_WORKERS if set, else hardware concurrency.
unsigned worker_count();

SweepReport sweep_epsilon(const Problem& base, const std::vector<double>& eps_list);
SweepReport sweep_delta(const Problem& base, const std::vector<double>& delta_list);

}  // namespace bifluid
