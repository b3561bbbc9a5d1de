#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bifluid/geometry.hpp"
#include "bifluid/thermo.hpp"
#include "bifluid/transport.hpp"

namespace bifluid {

/// Tensor sine modes, one scalar mode per (i, j, component):
///   w(x) = e_c (2/sqrt(Lx Ly)) sin(i pi x/Lx) sin(j pi y/Ly)   (2D)
///   w(x) = sqrt(2/L) sin(i pi x/L)                              (1D)
/// Modes vanish on the boundary and are orthonormal in sum_K |K| w_i(x_K) w_j(x_K).
/// After a modified Gram-Schmidt pass the recorded drift measures how far
/// the analytic modes were from exact discrete orthonormality.
class GalerkinBasis {
 public:
  GalerkinBasis(const Mesh& mesh, int modes_x, int modes_y = 1);

  std::size_t size() const { return component_.size(); }
  int component(std::size_t i) const { return component_[i]; }
  const Mesh& mesh() const { return *mesh_; }

  /// Scalar part of each mode at cell centres (cells x modes).
  const Eigen::MatrixXd& cell_values() const { return cells_; }
  /// Scalar part at interior face centres (faces x modes).
  const Eigen::MatrixXd& face_values() const { return faces_; }
  /// d/dx and d/dy of the scalar part at cell centres.
  const Eigen::MatrixXd& gradient(int axis) const { return grad_[axis]; }
  /// div_h of each mode per cell, from face values.
  const Eigen::MatrixXd& discrete_divergence() const { return div_; }

  /// max |<w_i, w_j> - delta_ij| after orthonormalisation.
  double orthonormality_error() const;
  /// max change of any cell value during orthonormalisation.
  double drift() const { return drift_; }

  /// v at cell centres for coefficients c.
  std::vector<Vec2> cell_velocity(const Eigen::VectorXd& c) const;
  /// v.e_axis at interior face centres.
  std::vector<double> face_velocity(const Eigen::VectorXd& c) const;
  /// grad v at cell centres, grad[i][j] = d v_i / d x_j.
  std::vector<Mat2> cell_gradient(const Eigen::VectorXd& c) const;

 private:
  const Mesh* mesh_;
  std::vector<int> component_;
  Eigen::MatrixXd cells_;
  Eigen::MatrixXd faces_;
  Eigen::MatrixXd grad_[2];
  Eigen::MatrixXd div_;
  double drift_ = 0.0;
};

/// Discrete L2 projection of a vector cell field onto the basis.
Eigen::VectorXd project_rhs(std::span<const Vec2> field, const GalerkinBasis& basis);
/// Scalar field projected onto the modes of component 0.
Eigen::VectorXd project_rhs(std::span<const double> field, const GalerkinBasis& basis);

/// Extension of u_B into the domain.
class Lift {
 public:
  enum class Kind { Blend, Full };

  /// Blend: b = u_B(x) max(0, 1 - d(x)/(width L_min)), d = distance to the boundary.
  Lift(const Mesh& mesh, VelocityProfile u_b, Kind kind = Kind::Blend, double width = 0.2);

  Vec2 value(const Vec2& x) const;
  Mat2 gradient(const Vec2& x) const;
  Kind kind() const { return kind_; }

 private:
  const Mesh* mesh_;
  VelocityProfile u_b_;
  Kind kind_;
  double width_;
};

struct ViscosityParams {
  double mu = 1.0;
  double lambda = 0.0;
};

/// S = mu (grad u + grad u^T) + lambda tr(grad u) I, restricted to `dim` components.
Mat2 viscous_stress(const Mat2& grad_u, const ViscosityParams& visc, int dim = 2);

/// Double contraction A : B.
double contract(const Mat2& a, const Mat2& b);

struct MomentumOptions {
  ViscosityParams viscosity;
  double eps = 0.0;
  double delta = 0.0;
  double c_exp = 6.0;
  bool convection = true;
  bool pressure = true;
  /// Densities held fixed: drops every term built from mass fluxes.
  bool frozen_densities = false;
  bool allow_small_exponent = false;
};

/// Everything one Galerkin step needs. Densities at the new level were computed
/// with the face velocities `u_iter` built from `c_iter`.
struct MomentumContext {
  const Mesh* mesh = nullptr;
  const GalerkinBasis* basis = nullptr;
  const Lift* lift = nullptr;
  const PressureLaw* law = nullptr;
  const BoundaryData* bd = nullptr;
  MomentumOptions options;
  double dt = 0.0;

  std::span<const double> rho_old;  ///< rho + z at t^n
  std::span<const double> rho_new;  ///< rho + z at t^{n+1}
  std::span<const double> big_r;    ///< at t^{n+1}
  std::span<const double> big_z;
  const FaceVelocity* u_iter = nullptr;
  const Eigen::VectorXd* c_old = nullptr;
  const Eigen::VectorXd* c_iter = nullptr;
};

/// Mass fluxes of rho + z split into convective and diffusive parts, outward
/// from the left cell on interior faces and outward on boundary faces.
struct MassFluxes {
  std::vector<double> interior_convective;
  std::vector<double> interior_diffusive;
  std::vector<double> boundary;  ///< total (all convective)
};
MassFluxes mass_fluxes(const Mesh& mesh, const FaceVelocity& u, double eps,
                       std::span<const double> rho, std::span<const double> rho_boundary);

/// Precomputed lift data at cell centres.
struct LiftField {
  std::vector<Vec2> value;
  std::vector<Mat2> gradient;
  std::vector<Vec2> face;  ///< at interior faces
  static LiftField sample(const Mesh& mesh, const Lift& lift);
};

struct MomentumSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

MomentumSystem assemble_momentum(const MomentumContext& ctx, const LiftField& lift);

/// Solves the Galerkin system; throws SolverError with a reciprocal condition
/// estimate when it is numerically singular.
Eigen::VectorXd momentum_step(const MomentumContext& ctx, const LiftField& lift,
                              double* rcond = nullptr);

/// max_i |row_i(c)| / max(1, |rhs|_inf): the discrete balance tested against every mode.
double momentum_residual(const MomentumContext& ctx, const LiftField& lift,
                         const Eigen::VectorXd& c);

}  // namespace bifluid
