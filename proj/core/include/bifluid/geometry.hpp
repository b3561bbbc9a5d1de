#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace bifluid {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Faces with |u_B.n| at or below this value are classified as Gamma_0.
inline constexpr double kBoundaryTolerance = 1e-12;

enum class BoundaryKind { Inflow, Outflow, Neutral };

struct InteriorFace {
  int left = 0;   ///< cell on the negative side of the axis
  int right = 0;  ///< cell on the positive side
  int axis = 0;   ///< normal is +e_axis, pointing from left to right
  double area = 0.0;
  double distance = 0.0;  ///< centre-to-centre distance of the two cells
  Vec2 center{};
};

struct BoundaryFace {
  int cell = 0;
  Vec2 normal{};  ///< outward unit normal
  double area = 0.0;
  Vec2 center{};
};

/// Uniform Cartesian mesh of an interval (dim 1) or a rectangle (dim 2).
///
/// Cells are numbered x-fastest: k = i + nx*j. In 1D ny == 1 and all
/// y-extents are unit so that face areas are 1 and cell volumes are h.
class Mesh {
 public:
  static Mesh interval(int cells, double length);
  static Mesh rectangle(int nx, int ny, double lx, double ly);

  int dimension() const { return dim_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx_) * ny_; }
  double length(int axis) const { return extent_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double cell_volume() const { return h_[0] * h_[1]; }
  double volume() const { return extent_[0] * extent_[1]; }

  Vec2 center(std::size_t cell) const;
  int cell_index(int i, int j) const { return i + nx_ * j; }

  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  /// Distance from a point to the boundary of the domain.
  double distance_to_boundary(const Vec2& x) const;

 private:
  Mesh(int dim, int nx, int ny, double lx, double ly);

  int dim_;
  int nx_;
  int ny_;
  Vec2 extent_;
  Vec2 h_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
};

/// Affine-plus-sine velocity profile, one per component:
///   u_c(x) = base + slope_x * x/Lx + slope_y * y/Ly + sine * sin(pi x/Lx) sin(pi y/Ly)^{dim-1}
struct ComponentProfile {
  double base = 0.0;
  double slope_x = 0.0;
  double slope_y = 0.0;
  double sine = 0.0;
};

class VelocityProfile {
 public:
  VelocityProfile() = default;
  VelocityProfile(int dim, Vec2 lengths, std::array<ComponentProfile, 2> components);

  static VelocityProfile constant(int dim, Vec2 lengths, Vec2 value);

  Vec2 value(const Vec2& x) const;
  /// grad[i][j] = d u_i / d x_j
  Mat2 gradient(const Vec2& x) const;
  int dimension() const { return dim_; }

 private:
  int dim_ = 1;
  Vec2 lengths_{1.0, 1.0};
  std::array<ComponentProfile, 2> comp_{};
};

/// Three disjoint boundary-face index sets.
struct BoundaryPartition {
  std::vector<int> inflow;
  std::vector<int> outflow;
  std::vector<int> neutral;
  std::vector<BoundaryKind> kind;  ///< per boundary face
};

/// Classifies boundary faces by the sign of u_B.n (tolerance kBoundaryTolerance).
BoundaryPartition classify_boundary(const Mesh& mesh, const VelocityProfile& u_b);

/// Midpoint value of \int_faces r u_B.n dS.
/// `r` and `normal_velocity` are indexed by boundary face.
double boundary_flux(const Mesh& mesh, std::span<const double> r,
                     std::span<const double> normal_velocity, std::span<const int> faces);

enum class Species : int { Rho = 0, Z = 1, BigR = 2, BigZ = 3 };
inline constexpr std::array<Species, 4> kAllSpecies{Species::Rho, Species::Z, Species::BigR,
                                                     Species::BigZ};
const char* species_name(Species s);

/// Boundary data: u_B, per-species boundary densities on every boundary face,
/// and the inflow/outflow partition. Immutable after construction.
struct BoundaryData {
  VelocityProfile u_b;
  BoundaryPartition partition;
  /// u_B.n per boundary face; set to 0 on Gamma_0 faces.
  std::vector<double> normal_velocity;
  /// r_B per species, indexed [species][boundary face].
  std::array<std::vector<double>, 4> density;

  const std::vector<double>& values(Species s) const {
    return density[static_cast<int>(s)];
  }

  static BoundaryData build(const Mesh& mesh, const VelocityProfile& u_b,
                            std::array<std::vector<double>, 4> density);
};

}  // namespace bifluid
