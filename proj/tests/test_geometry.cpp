#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "bifluid/geometry.hpp"

using namespace bifluid;

namespace {

std::vector<int> all_faces(const Mesh& m) {
  std::vector<int> f(m.boundary_faces().size());
  std::iota(f.begin(), f.end(), 0);
  return f;
}

std::vector<double> normal_velocity(const Mesh& m, const VelocityProfile& u) {
  std::vector<double> out;
  for (const auto& f : m.boundary_faces()) {
    const Vec2 v = u.value(f.center);
    out.push_back(v[0] * f.normal[0] + v[1] * f.normal[1]);
  }
  return out;
}

}  // namespace

TEST(Mesh, IntervalMeasuresAndNormals) {
  const Mesh m = Mesh::interval(40, 2.5);
  EXPECT_EQ(m.dimension(), 1);
  EXPECT_EQ(m.cell_count(), 40u);
  EXPECT_DOUBLE_EQ(m.spacing(0), 2.5 / 40);
  EXPECT_NEAR(m.cell_volume() * m.cell_count(), m.volume(), 1e-14);
  ASSERT_EQ(m.boundary_faces().size(), 2u);
  for (const auto& f : m.boundary_faces()) {
    EXPECT_DOUBLE_EQ(std::hypot(f.normal[0], f.normal[1]), 1.0);
    EXPECT_DOUBLE_EQ(f.area, 1.0);
  }
  EXPECT_EQ(m.interior_faces().size(), 39u);
  EXPECT_DOUBLE_EQ(m.center(0)[0], 2.5 / 80);
}

TEST(Mesh, RectangleMeasuresAndNormals) {
  const Mesh m = Mesh::rectangle(6, 4, 3.0, 2.0);
  EXPECT_EQ(m.cell_count(), 24u);
  EXPECT_NEAR(m.cell_volume() * m.cell_count(), 6.0, 1e-14);
  ASSERT_EQ(m.boundary_faces().size(), 2u * (6 + 4));
  double perimeter = 0.0;
  for (const auto& f : m.boundary_faces()) {
    EXPECT_DOUBLE_EQ(std::hypot(f.normal[0], f.normal[1]), 1.0);
    perimeter += f.area;
  }
  EXPECT_NEAR(perimeter, 10.0, 1e-14);
  // Interior faces: (nx-1) ny vertical plus nx (ny-1) horizontal.
  EXPECT_EQ(m.interior_faces().size(), 5u * 4 + 6u * 3);
  EXPECT_NEAR(m.distance_to_boundary({0.5, 1.0}), 0.5, 1e-15);
}

TEST(ClassifyBoundary, UnitThroughFlowIn1D) {
  const Mesh m = Mesh::interval(10, 1.0);
  const auto part = classify_boundary(m, VelocityProfile::constant(1, {1.0, 1.0}, {1.0, 0.0}));
  ASSERT_EQ(part.inflow.size(), 1u);
  ASSERT_EQ(part.outflow.size(), 1u);
  EXPECT_TRUE(part.neutral.empty());
  EXPECT_DOUBLE_EQ(m.boundary_faces()[part.inflow[0]].center[0], 0.0);
  EXPECT_DOUBLE_EQ(m.boundary_faces()[part.outflow[0]].center[0], 1.0);
}

TEST(ClassifyBoundary, ZeroVelocityIsAllNeutral) {
  const Mesh m = Mesh::rectangle(3, 3, 1.0, 1.0);
  const auto part = classify_boundary(m, VelocityProfile::constant(2, {1.0, 1.0}, {0.0, 0.0}));
  EXPECT_TRUE(part.inflow.empty());
  EXPECT_TRUE(part.outflow.empty());
  EXPECT_EQ(part.neutral.size(), m.boundary_faces().size());
}

TEST(ClassifyBoundary, RectangleWithHorizontalFlow) {
  const Mesh m = Mesh::rectangle(4, 3, 2.0, 1.0);
  const auto part = classify_boundary(m, VelocityProfile::constant(2, {2.0, 1.0}, {1.0, 0.0}));
  for (int f : part.inflow) EXPECT_DOUBLE_EQ(m.boundary_faces()[f].normal[0], -1.0);
  for (int f : part.outflow) EXPECT_DOUBLE_EQ(m.boundary_faces()[f].normal[0], 1.0);
  for (int f : part.neutral) EXPECT_DOUBLE_EQ(std::abs(m.boundary_faces()[f].normal[1]), 1.0);
  EXPECT_EQ(part.inflow.size(), 3u);
  EXPECT_EQ(part.outflow.size(), 3u);
  EXPECT_EQ(part.neutral.size(), 8u);
}

TEST(ClassifyBoundary, PartitionIsDisjointAndExhaustive) {
  const Mesh m = Mesh::rectangle(5, 4, 1.0, 1.0);
  ComponentProfile ux{0.3, 0.0, -1.0, 0.5};
  ComponentProfile uy{-0.2, 0.7, 0.0, 0.0};
  const auto part = classify_boundary(m, VelocityProfile(2, {1.0, 1.0}, {ux, uy}));
  std::vector<int> seen(m.boundary_faces().size(), 0);
  for (int f : part.inflow) ++seen[f];
  for (int f : part.outflow) ++seen[f];
  for (int f : part.neutral) ++seen[f];
  for (int s : seen) EXPECT_EQ(s, 1);
  ASSERT_EQ(part.kind.size(), seen.size());
  for (int f : part.inflow) EXPECT_EQ(part.kind[f], BoundaryKind::Inflow);
}

TEST(ClassifyBoundary, InvariantUnderPositiveScaling) {
  const Mesh m = Mesh::rectangle(5, 4, 1.0, 1.0);
  ComponentProfile ux{0.3, 0.0, -1.0, 0.5};
  ComponentProfile uy{-0.2, 0.7, 0.0, 0.0};
  const auto a = classify_boundary(m, VelocityProfile(2, {1.0, 1.0}, {ux, uy}));
  for (double c : {1e-3, 7.0}) {
    ComponentProfile sx{c * ux.base, c * ux.slope_x, c * ux.slope_y, c * ux.sine};
    ComponentProfile sy{c * uy.base, c * uy.slope_x, c * uy.slope_y, c * uy.sine};
    const auto b = classify_boundary(m, VelocityProfile(2, {1.0, 1.0}, {sx, sy}));
    EXPECT_EQ(a.inflow, b.inflow);
    EXPECT_EQ(a.outflow, b.outflow);
    EXPECT_EQ(a.neutral, b.neutral);
  }
}

TEST(ClassifyBoundary, TinyNormalVelocityIsNeutral) {
  const Mesh m = Mesh::interval(4, 1.0);
  const auto part = classify_boundary(m, VelocityProfile::constant(1, {1.0, 1.0}, {1e-13, 0.0}));
  EXPECT_EQ(part.neutral.size(), 2u);
}

TEST(BoundaryFlux, ConstantAndZeroIntegrands) {
  const Mesh m = Mesh::rectangle(4, 4, 1.0, 1.0);
  std::vector<int> right;
  for (std::size_t f = 0; f < m.boundary_faces().size(); ++f) {
    if (m.boundary_faces()[f].normal[0] == 1.0) right.push_back(static_cast<int>(f));
  }
  const std::vector<double> un(m.boundary_faces().size(), 1.0);
  EXPECT_NEAR(boundary_flux(m, std::vector<double>(un.size(), 2.0), un, right), 2.0, 1e-15);
  EXPECT_EQ(boundary_flux(m, std::vector<double>(un.size(), 0.0), un, right), 0.0);
}

TEST(BoundaryFlux, LinearProfileOnRightEdge) {
  // \int_0^1 y dy = 1/2; the midpoint rule integrates linear data exactly.
  const Mesh m = Mesh::rectangle(8, 16, 1.0, 1.0);
  std::vector<int> right;
  std::vector<double> r(m.boundary_faces().size(), 0.0);
  for (std::size_t f = 0; f < m.boundary_faces().size(); ++f) {
    const auto& face = m.boundary_faces()[f];
    r[f] = face.center[1];
    if (face.normal[0] == 1.0) right.push_back(static_cast<int>(f));
  }
  const std::vector<double> un(r.size(), 1.0);
  EXPECT_NEAR(boundary_flux(m, r, un, right), 0.5, 1e-14);
}

TEST(BoundaryFlux, LinearAndAdditive) {
  const Mesh m = Mesh::rectangle(3, 5, 1.5, 1.0);
  const auto faces = all_faces(m);
  const auto un = normal_velocity(m, VelocityProfile::constant(2, {1.5, 1.0}, {0.4, -0.9}));
  std::vector<double> a, b, comb;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    a.push_back(1.0 + 0.1 * f);
    b.push_back(std::sin(0.3 * f));
    comb.push_back(2.0 * a.back() - 3.0 * b.back());
  }
  const double lin = 2.0 * boundary_flux(m, a, un, faces) - 3.0 * boundary_flux(m, b, un, faces);
  EXPECT_NEAR(boundary_flux(m, comb, un, faces), lin, 1e-13);
  const std::vector<int> first(faces.begin(), faces.begin() + 7);
  const std::vector<int> rest(faces.begin() + 7, faces.end());
  EXPECT_NEAR(boundary_flux(m, a, un, first) + boundary_flux(m, a, un, rest), boundary_flux(m, a, un, faces), 1e-13);
}

TEST(BoundaryData, NormalVelocityVanishesOnNeutralFaces) {
  const Mesh m = Mesh::rectangle(4, 3, 2.0, 1.0);
  std::array<std::vector<double>, 4> d;
  for (auto& v : d) v.assign(m.boundary_faces().size(), 1.0);
  const auto bd = BoundaryData::build(m, VelocityProfile::constant(2, {2.0, 1.0}, {1.0, 0.0}), d);
  for (int f : bd.partition.neutral) EXPECT_EQ(bd.normal_velocity[f], 0.0);
  for (int f : bd.partition.inflow) EXPECT_DOUBLE_EQ(bd.normal_velocity[f], -1.0);
}
