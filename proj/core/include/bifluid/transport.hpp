#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bifluid/geometry.hpp"

namespace bifluid {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normal velocities on every face of the mesh.
struct FaceVelocity {
  std::vector<double> interior;  ///< u.e_axis on interior faces (left -> right positive)
  std::vector<double> boundary;  ///< u.n on boundary faces (outward positive)
};

/// Samples a profile at interior face centres; boundary normals are taken from `bd`.
FaceVelocity face_velocity_from_profile(const Mesh& mesh, const VelocityProfile& u,
                                        const BoundaryData& bd);

/// Face-based divergence per cell: (1/|K|) sum_f u.n |f|.
std::vector<double> discrete_divergence(const Mesh& mesh, const FaceVelocity& u);
double max_abs_divergence(const Mesh& mesh, const FaceVelocity& u);

/// Cell velocity from the average of the two face values along each axis.
std::vector<Vec2> cell_velocity(const Mesh& mesh, const FaceVelocity& u);

/// Cell gradient from face values (interior: average, boundary: the cell value).
std::vector<Vec2> cell_gradient(const Mesh& mesh, std::span<const double> r);

struct DensityField {
  std::vector<double> values;
  std::optional<Species> species;  ///< empty for a generic scalar
  double time = 0.0;

  /// Throws std::invalid_argument on negative or non-finite entries.
  void validate() const;
};

struct RatioField {
  std::vector<double> values;
  double floor = 0.0;  ///< value used where R vanishes
};

/// s = Z/R where R > 0 and `floor` elsewhere.
RatioField make_ratio(std::span<const double> big_z, std::span<const double> big_r, double floor);

/// Monotonicity certificate of an assembled operator.
struct MMatrixReport {
  bool ok = true;
  double min_diagonal = 0.0;
  double max_offdiagonal = 0.0;
  double min_column_excess = 0.0;  ///< min over columns of diag - sum|offdiag|
};

/// Backward-Euler upwind / centred-diffusion operator for
///   d_t r + div(r u) = eps Lap r
/// with outflow flux r_K u.n, inflow flux r_B u.n and no flux on Gamma_0.
/// The same factorisation serves every species.
class ParabolicOperator {
 public:
  /// Keeps a reference to `mesh`, which must outlive the operator.
  ParabolicOperator(const Mesh& mesh, const FaceVelocity& u, double eps, double dt);

  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  MMatrixReport certify() const;

  /// `r_boundary` is indexed by boundary face; `source` by cell (rate per volume);
  /// `boundary_extra` adds a prescribed outward flux per boundary face.
  std::vector<double> solve(std::span<const double> r_old, std::span<const double> r_boundary,
                            std::span<const double> source = {},
                            std::span<const double> boundary_extra = {}) const;

  double dt() const { return dt_; }
  double eps() const { return eps_; }

 private:
  const Mesh* mesh_;
  std::vector<double> boundary_un_;
  double eps_;
  double dt_;
  Eigen::SparseMatrix<double> matrix_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Optional manufactured-solution forcing.
struct StepForcing {
  std::vector<double> source;          ///< per cell
  std::vector<double> boundary_extra;  ///< per boundary face
};

/// One parabolic step for a generic scalar with explicit boundary values.
/// Throws SolverError when the monotonicity certificate fails.
DensityField parabolic_step(const Mesh& mesh, const DensityField& r, const FaceVelocity& u,
                            double eps, double dt, std::span<const double> r_boundary,
                            const StepForcing* forcing = nullptr);
/// Species-tagged variant; boundary values taken from `bd`.
DensityField parabolic_step(const Mesh& mesh, const DensityField& r, const FaceVelocity& u,
                            double eps, double dt, const BoundaryData& bd);

enum class TransportVariant { Explicit, Implicit };

/// One upwind step of d_t s + u.grad s = 0 with inflow value `s_boundary`.
/// The explicit variant throws SolverError when the CFL condition fails.
RatioField transport_step(const Mesh& mesh, const RatioField& s, const FaceVelocity& u, double dt,
                          std::span<const double> s_boundary,
                          TransportVariant variant = TransportVariant::Implicit);

/// Largest stable explicit step: min_K |K| / sum_f |f| [u.n]^-_in.
double explicit_transport_limit(const Mesh& mesh, const FaceVelocity& u);

// ---------------------------------------------------------------------------
// Histories and ledgers.

/// Evolution record of one scalar: r^0 .. r^N and the data of each step.
struct ScalarHistory {
  double eps = 0.0;
  std::vector<double> boundary;  ///< r_B per boundary face
  std::vector<double> initial;
  double initial_time = 0.0;

  struct Step {
    double dt = 0.0;
    double time = 0.0;  ///< t^{n+1}
    std::vector<double> field;
    FaceVelocity u;
    std::vector<double> source;          ///< optional
    std::vector<double> boundary_extra;  ///< optional
  };
  std::vector<Step> steps;
};

/// Space-time test function phi(t, x).
struct TestFunction {
  std::string name;
  std::function<double(double, const Vec2&)> value;
  std::function<double(double, const Vec2&)> time_derivative;
  std::function<Vec2(double, const Vec2&)> gradient;

  static TestFunction unit();
};

/// Cumulative residual of the weak continuity identity
///   int r(t) phi(t) - int r0 phi(0) - int int (r d_t phi + r u.grad phi - eps grad r.grad phi + S phi)
///   + int int_out r u.n phi + int int_in r_B u.n phi
/// after every step (right-endpoint rule in time, midpoint in space).
std::vector<double> weak_continuity_residual(const Mesh& mesh, const ScalarHistory& h,
                                             const TestFunction& phi);

struct MassLedger {
  std::vector<double> cumulative;  ///< residual after each step
  double scale = 0.0;              ///< normalisation for the relative residual
  double max_relative = 0.0;
};
MassLedger mass_ledger(const Mesh& mesh, const ScalarHistory& h);

struct MaxMinReport {
  double upper_data = 0.0;  ///< M = max(max r0, max_in r_B)
  double lower_data = 0.0;  ///< m = min(min r0, min_in r_B)
  double max_divergence = 0.0;
  std::vector<double> max_value;
  std::vector<double> min_value;
  std::vector<double> upper_bound;        ///< discrete bound M prod 1/(1 - dt D_n)
  std::vector<double> lower_bound;        ///< discrete bound m prod 1/(1 + dt D_n)
  std::vector<double> upper_bound_continuous;  ///< M exp(t D)
  std::vector<double> lower_bound_continuous;  ///< m exp(-t D)
  double worst_upper_margin = 0.0;        ///< min over steps of bound - max (relative)
  double worst_lower_margin = 0.0;
  bool passed = true;
};
MaxMinReport maxmin_certificate(const Mesh& mesh, const ScalarHistory& h,
                                const BoundaryPartition& partition);

/// Convex renormalising function B.
struct Renormalizer {
  enum class Kind { Square, EntropyLog, Truncated };
  Kind kind = Kind::Square;
  double parameter = 0.0;  ///< a for s ln(s + a), k for L_k

  static Renormalizer square() { return {Kind::Square, 0.0}; }
  static Renormalizer entropy(double a = 1e-8) { return {Kind::EntropyLog, a}; }
  static Renormalizer truncated(double k) { return {Kind::Truncated, k}; }

  std::string name() const;
  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  /// E_B(a|b) = B(a) - B'(b)(a - b) - B(b)
  double bregman(double a, double b) const;
};

struct RenormLedger {
  std::string renormalizer;
  /// Per-step terms; the identity is
  ///   storage + dt (diffusion + pressure_like + outflow + inflow + extra - source) + numerical = 0.
  std::vector<double> storage;
  std::vector<double> diffusion;      ///< eps sum |f|/d (B'_R - B'_L)(r_R - r_L), >= 0
  std::vector<double> pressure_like;  ///< sum |K| (r B' - B) div_h u
  std::vector<double> outflow;
  std::vector<double> inflow;         ///< sum_in u.n (B(r_B) - E_B(r_B|r)) |f|
  std::vector<double> extra;
  std::vector<double> source;
  std::vector<double> numerical;      ///< sum |K| E_B(r0|r) + dt sum |w||f| E_B(up|down), >= 0
  std::vector<double> cumulative;
  double scale = 0.0;
  double max_relative = 0.0;
  double min_boundary_bregman = 0.0;  ///< min of E_B(r_B|r) over inflow samples
  bool dissipation_nonnegative = true;
};
RenormLedger renorm_budget(const Mesh& mesh, const ScalarHistory& h, const Renormalizer& b);

}  // namespace bifluid
