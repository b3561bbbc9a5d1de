#include "bifluid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bifluid {

Mesh::Mesh(int dim, int nx, int ny, double lx, double ly)
    : dim_(dim), nx_(nx), ny_(ny), extent_{lx, ly}, h_{lx / nx, ly / ny} {
  if (nx <= 0 || ny <= 0) throw std::invalid_argument("mesh: cell counts must be positive");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("mesh: lengths must be positive");

  const double area_x = (dim == 1) ? 1.0 : h_[1];  // faces normal to x
  const double area_y = h_[0];                    // faces normal to y

  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i + 1 < nx_; ++i) {
      InteriorFace f;
      f.left = cell_index(i, j);
      f.right = cell_index(i + 1, j);
      f.axis = 0;
      f.area = area_x;
      f.distance = h_[0];
      f.center = {(i + 1) * h_[0], (j + 0.5) * h_[1]};
      interior_.push_back(f);
    }
  }
  if (dim == 2) {
    for (int j = 0; j + 1 < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        InteriorFace f;
        f.left = cell_index(i, j);
        f.right = cell_index(i, j + 1);
        f.axis = 1;
        f.area = area_y;
        f.distance = h_[1];
        f.center = {(i + 0.5) * h_[0], (j + 1) * h_[1]};
        interior_.push_back(f);
      }
    }
  }

  // Boundary faces: left, right, then bottom, top.
  for (int j = 0; j < ny_; ++j) {
    boundary_.push_back({cell_index(0, j), {-1.0, 0.0}, area_x, {0.0, (j + 0.5) * h_[1]}});
  }
  for (int j = 0; j < ny_; ++j) {
    boundary_.push_back({cell_index(nx_ - 1, j), {1.0, 0.0}, area_x, {lx, (j + 0.5) * h_[1]}});
  }
  if (dim == 2) {
    for (int i = 0; i < nx_; ++i) {
      boundary_.push_back({cell_index(i, 0), {0.0, -1.0}, area_y, {(i + 0.5) * h_[0], 0.0}});
    }
    for (int i = 0; i < nx_; ++i) {
      boundary_.push_back({cell_index(i, ny_ - 1), {0.0, 1.0}, area_y, {(i + 0.5) * h_[0], ly}});
    }
  }
}

Mesh Mesh::interval(int cells, double length) { return Mesh(1, cells, 1, length, 1.0); }

Mesh Mesh::rectangle(int nx, int ny, double lx, double ly) { return Mesh(2, nx, ny, lx, ly); }

Vec2 Mesh::center(std::size_t cell) const {
  const int k = static_cast<int>(cell);
  const int i = k % nx_;
  const int j = k / nx_;
  return {(i + 0.5) * h_[0], (j + 0.5) * h_[1]};
}

double Mesh::distance_to_boundary(const Vec2& x) const {
  double d = std::min(x[0], extent_[0] - x[0]);
  if (dim_ == 2) d = std::min({d, x[1], extent_[1] - x[1]});
  return std::max(d, 0.0);
}

VelocityProfile::VelocityProfile(int dim, Vec2 lengths, std::array<ComponentProfile, 2> components)
    : dim_(dim), lengths_(lengths), comp_(components) {
  if (dim == 1) comp_[1] = ComponentProfile{};
}

VelocityProfile VelocityProfile::constant(int dim, Vec2 lengths, Vec2 value) {
  std::array<ComponentProfile, 2> c{};
  c[0].base = value[0];
  c[1].base = value[1];
  return VelocityProfile(dim, lengths, c);
}

Vec2 VelocityProfile::value(const Vec2& x) const {
  using std::numbers::pi;
  const double xi = x[0] / lengths_[0];
  const double eta = x[1] / lengths_[1];
  const double bump = std::sin(pi * xi) * (dim_ == 2 ? std::sin(pi * eta) : 1.0);
  Vec2 u{};
  for (int c = 0; c < dim_; ++c) {
    const auto& p = comp_[c];
    u[c] = p.base + p.slope_x * xi + (dim_ == 2 ? p.slope_y * eta : 0.0) + p.sine * bump;
  }
  return u;
}

Mat2 VelocityProfile::gradient(const Vec2& x) const {
  using std::numbers::pi;
  const double xi = x[0] / lengths_[0];
  const double eta = x[1] / lengths_[1];
  const double sx = std::sin(pi * xi);
  const double cx = std::cos(pi * xi);
  const double sy = dim_ == 2 ? std::sin(pi * eta) : 1.0;
  const double cy = dim_ == 2 ? std::cos(pi * eta) : 0.0;
  Mat2 g{};
  for (int c = 0; c < dim_; ++c) {
    const auto& p = comp_[c];
    g[c][0] = p.slope_x / lengths_[0] + p.sine * pi / lengths_[0] * cx * sy;
    if (dim_ == 2) g[c][1] = p.slope_y / lengths_[1] + p.sine * pi / lengths_[1] * sx * cy;
  }
  return g;
}

BoundaryPartition classify_boundary(const Mesh& mesh, const VelocityProfile& u_b) {
  BoundaryPartition part;
  const auto& faces = mesh.boundary_faces();
  part.kind.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec2 u = u_b.value(faces[f].center);
    const double un = u[0] * faces[f].normal[0] + u[1] * faces[f].normal[1];
    const int idx = static_cast<int>(f);
    if (un < -kBoundaryTolerance) {
      part.inflow.push_back(idx);
      part.kind[f] = BoundaryKind::Inflow;
    } else if (un > kBoundaryTolerance) {
      part.outflow.push_back(idx);
      part.kind[f] = BoundaryKind::Outflow;
    } else {
      part.neutral.push_back(idx);
      part.kind[f] = BoundaryKind::Neutral;
    }
  }
  return part;
}

double boundary_flux(const Mesh& mesh, std::span<const double> r,
                     std::span<const double> normal_velocity, std::span<const int> faces) {
  const auto& bf = mesh.boundary_faces();
  double sum = 0.0;
  for (int f : faces) sum += r[f] * normal_velocity[f] * bf[f].area;
  return sum;
}

const char* species_name(Species s) {
  switch (s) {
    case Species::Rho: return "rho";
    case Species::Z: return "z";
    case Species::BigR: return "R";
    case Species::BigZ: return "Z";
  }
  return "?";
}

BoundaryData BoundaryData::build(const Mesh& mesh, const VelocityProfile& u_b,
                                 std::array<std::vector<double>, 4> density) {
  BoundaryData bd;
  bd.u_b = u_b;
  bd.partition = classify_boundary(mesh, u_b);
  const auto& faces = mesh.boundary_faces();
  bd.normal_velocity.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (bd.partition.kind[f] == BoundaryKind::Neutral) {
      bd.normal_velocity[f] = 0.0;
      continue;
    }
    const Vec2 u = u_b.value(faces[f].center);
    bd.normal_velocity[f] = u[0] * faces[f].normal[0] + u[1] * faces[f].normal[1];
  }
  for (auto& d : density) {
    if (d.size() != faces.size()) {
      throw std::invalid_argument("boundary data: density size does not match boundary faces");
    }
  }
  bd.density = std::move(density);
  return bd;
}

}  // namespace bifluid
