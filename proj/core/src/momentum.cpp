#include "bifluid/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bifluid {

GalerkinBasis::GalerkinBasis(const Mesh& mesh, int modes_x, int modes_y) : mesh_(&mesh) {
  using std::numbers::pi;
  const int dim = mesh.dimension();
  if (modes_x < 1 || modes_x >= mesh.nx()) {
    throw std::invalid_argument("galerkin basis: need 1 <= modes_x < nx");
  }
  if (dim == 2 && (modes_y < 1 || modes_y >= mesh.ny())) {
    throw std::invalid_argument("galerkin basis: need 1 <= modes_y < ny");
  }
  if (dim == 1) modes_y = 1;
  const double lx = mesh.length(0);
  const double ly = mesh.length(1);
  const double amp = dim == 1 ? std::sqrt(2.0 / lx) : 2.0 / std::sqrt(lx * ly);

  struct Mode {
    int i, j, c;
  };
  std::vector<Mode> modes;
  for (int c = 0; c < dim; ++c) {
    for (int j = 1; j <= modes_y; ++j) {
      for (int i = 1; i <= modes_x; ++i) modes.push_back({i, j, c});
    }
  }
  const std::size_t n = modes.size();
  const std::size_t cells = mesh.cell_count();
  const auto& inner = mesh.interior_faces();

  auto eval = [&](const Mode& m, const Vec2& x, double* dx, double* dy) {
    const double ax = m.i * pi / lx;
    const double sx = std::sin(ax * x[0]);
    const double cx = std::cos(ax * x[0]);
    if (dim == 1) {
      if (dx) *dx = amp * ax * cx;
      if (dy) *dy = 0.0;
      return amp * sx;
    }
    const double ay = m.j * pi / ly;
    const double sy = std::sin(ay * x[1]);
    const double cy = std::cos(ay * x[1]);
    if (dx) *dx = amp * ax * cx * sy;
    if (dy) *dy = amp * sx * ay * cy;
    return amp * sx * sy;
  };

  Eigen::MatrixXd analytic(cells, n);
  Eigen::MatrixXd gx(cells, n);
  Eigen::MatrixXd gy(cells, n);
  Eigen::MatrixXd fv(inner.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    component_.push_back(modes[i].c);
    for (std::size_t k = 0; k < cells; ++k) {
      double dx = 0.0;
      double dy = 0.0;
      analytic(k, i) = eval(modes[i], mesh.center(k), &dx, &dy);
      gx(k, i) = dx;
      gy(k, i) = dy;
    }
    for (std::size_t f = 0; f < inner.size(); ++f) fv(f, i) = eval(modes[i], inner[f].center, nullptr, nullptr);
  }

  // Modified Gram-Schmidt in the weighted inner product; T tracks the
  // change of basis so that faces and gradients stay consistent.
  const double vol = mesh.cell_volume();
  Eigen::MatrixXd q = analytic;
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (component_[i] != component_[j]) continue;
      const double proj = vol * q.col(i).dot(q.col(j));
      q.col(i) -= proj * q.col(j);
      t.col(i) -= proj * t.col(j);
    }
    const double norm = std::sqrt(vol * q.col(i).squaredNorm());
    q.col(i) /= norm;
    t.col(i) /= norm;
  }
  drift_ = (q - analytic).cwiseAbs().maxCoeff();
  cells_ = q;
  faces_ = fv * t;
  grad_[0] = gx * t;
  grad_[1] = gy * t;

  div_ = Eigen::MatrixXd::Zero(cells, n);
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const auto& face = inner[f];
    for (std::size_t i = 0; i < n; ++i) {
      if (component_[i] != face.axis) continue;
      const double q_f = faces_(f, i) * face.area / vol;
      div_(face.left, i) += q_f;
      div_(face.right, i) -= q_f;
    }
  }
}

double GalerkinBasis::orthonormality_error() const {
  const std::size_t n = size();
  const double vol = mesh_->cell_volume();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = component_[i] == component_[j] ? vol * cells_.col(i).dot(cells_.col(j)) : 0.0;
      err = std::max(err, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

std::vector<Vec2> GalerkinBasis::cell_velocity(const Eigen::VectorXd& c) const {
  std::vector<Vec2> v(cells_.rows(), Vec2{0.0, 0.0});
  for (std::size_t i = 0; i < size(); ++i) {
    if (c[i] == 0.0) continue;
    const int comp = component_[i];
    for (Eigen::Index k = 0; k < cells_.rows(); ++k) v[k][comp] += c[i] * cells_(k, i);
  }
  return v;
}

std::vector<double> GalerkinBasis::face_velocity(const Eigen::VectorXd& c) const {
  const auto& inner = mesh_->interior_faces();
  std::vector<double> w(inner.size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    if (c[i] == 0.0) continue;
    for (std::size_t f = 0; f < inner.size(); ++f) {
      if (inner[f].axis == component_[i]) w[f] += c[i] * faces_(f, i);
    }
  }
  return w;
}

std::vector<Mat2> GalerkinBasis::cell_gradient(const Eigen::VectorXd& c) const {
  std::vector<Mat2> g(cells_.rows(), Mat2{});
  for (std::size_t i = 0; i < size(); ++i) {
    if (c[i] == 0.0) continue;
    const int comp = component_[i];
    for (Eigen::Index k = 0; k < cells_.rows(); ++k) {
      g[k][comp][0] += c[i] * grad_[0](k, i);
      g[k][comp][1] += c[i] * grad_[1](k, i);
    }
  }
  return g;
}

Eigen::VectorXd project_rhs(std::span<const Vec2> field, const GalerkinBasis& basis) {
  const auto& cells = basis.cell_values();
  if (field.size() != static_cast<std::size_t>(cells.rows())) {
    throw std::invalid_argument("project_rhs: field size does not match the mesh");
  }
  const double vol = basis.mesh().cell_volume();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const int comp = basis.component(i);
    double s = 0.0;
    for (Eigen::Index k = 0; k < cells.rows(); ++k) s += vol * field[k][comp] * cells(k, i);
    c[i] = s;
  }
  return c;
}

Eigen::VectorXd project_rhs(std::span<const double> field, const GalerkinBasis& basis) {
  std::vector<Vec2> v(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) v[k] = {field[k], 0.0};
  return project_rhs(v, basis);
}

// ---------------------------------------------------------------------------

Lift::Lift(const Mesh& mesh, VelocityProfile u_b, Kind kind, double width)
    : mesh_(&mesh), u_b_(std::move(u_b)), kind_(kind), width_(width) {
  if (kind == Kind::Blend && !(width > 0.0)) throw std::invalid_argument("lift: width must be positive");
}

namespace {

// Cut-off chi(x) = max(0, 1 - d(x)/w) and its gradient.
double cutoff(const Mesh& mesh, const Vec2& x, double w, Vec2* grad) {
  const int dim = mesh.dimension();
  double d = x[0];
  Vec2 dd{1.0, 0.0};
  if (mesh.length(0) - x[0] < d) {
    d = mesh.length(0) - x[0];
    dd = {-1.0, 0.0};
  }
  if (dim == 2) {
    if (x[1] < d) {
      d = x[1];
      dd = {0.0, 1.0};
    }
    if (mesh.length(1) - x[1] < d) {
      d = mesh.length(1) - x[1];
      dd = {0.0, -1.0};
    }
  }
  if (d >= w) {
    if (grad) *grad = {0.0, 0.0};
    return 0.0;
  }
  if (grad) *grad = {-dd[0] / w, -dd[1] / w};
  return 1.0 - std::max(d, 0.0) / w;
}

double min_length(const Mesh& mesh) {
  return mesh.dimension() == 1 ? mesh.length(0) : std::min(mesh.length(0), mesh.length(1));
}

}  // namespace

Vec2 Lift::value(const Vec2& x) const {
  const Vec2 u = u_b_.value(x);
  if (kind_ == Kind::Full) return u;
  const double chi = cutoff(*mesh_, x, width_ * min_length(*mesh_), nullptr);
  return {u[0] * chi, u[1] * chi};
}

Mat2 Lift::gradient(const Vec2& x) const {
  Mat2 g = u_b_.gradient(x);
  if (kind_ == Kind::Full) return g;
  Vec2 dchi{};
  const double chi = cutoff(*mesh_, x, width_ * min_length(*mesh_), &dchi);
  const Vec2 u = u_b_.value(x);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) g[i][j] = g[i][j] * chi + u[i] * dchi[j];
  }
  if (mesh_->dimension() == 1) {
    g[0][1] = g[1][0] = g[1][1] = 0.0;
  }
  return g;
}

Mat2 viscous_stress(const Mat2& grad_u, const ViscosityParams& visc, int dim) {
  Mat2 s{};
  double tr = 0.0;
  for (int i = 0; i < dim; ++i) tr += grad_u[i][i];
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) s[i][j] = visc.mu * (grad_u[i][j] + grad_u[j][i]);
    s[i][i] += visc.lambda * tr;
  }
  return s;
}

double contract(const Mat2& a, const Mat2& b) {
  return a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1];
}

MassFluxes mass_fluxes(const Mesh& mesh, const FaceVelocity& u, double eps,
                       std::span<const double> rho, std::span<const double> rho_boundary) {
  MassFluxes m;
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();
  m.interior_convective.resize(inner.size());
  m.interior_diffusive.resize(inner.size());
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const auto& face = inner[f];
    const double w = u.interior[f];
    m.interior_convective[f] =
        face.area * (std::max(w, 0.0) * rho[face.left] + std::min(w, 0.0) * rho[face.right]);
    m.interior_diffusive[f] = -eps * face.area / face.distance * (rho[face.right] - rho[face.left]);
  }
  m.boundary.assign(outer.size(), 0.0);
  for (std::size_t f = 0; f < outer.size(); ++f) {
    const double un = u.boundary[f];
    if (un > 0.0) {
      m.boundary[f] = rho[outer[f].cell] * un * outer[f].area;
    } else if (un < 0.0) {
      m.boundary[f] = rho_boundary[f] * un * outer[f].area;
    }
  }
  return m;
}

LiftField LiftField::sample(const Mesh& mesh, const Lift& lift) {
  LiftField lf;
  const std::size_t cells = mesh.cell_count();
  lf.value.resize(cells);
  lf.gradient.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const Vec2 x = mesh.center(k);
    lf.value[k] = lift.value(x);
    lf.gradient[k] = lift.gradient(x);
  }
  for (const auto& f : mesh.interior_faces()) lf.face.push_back(lift.value(f.center));
  return lf;
}

MomentumSystem assemble_momentum(const MomentumContext& ctx, const LiftField& lift) {
  const Mesh& mesh = *ctx.mesh;
  const GalerkinBasis& basis = *ctx.basis;
  const MomentumOptions& opt = ctx.options;
  const int dim = mesh.dimension();
  const std::size_t n = basis.size();
  const std::size_t cells = mesh.cell_count();
  const double vol = mesh.cell_volume();
  const auto& phi = basis.cell_values();
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();

  MomentumSystem sys;
  sys.matrix = Eigen::MatrixXd::Zero(n, n);
  sys.rhs = Eigen::VectorXd::Zero(n);
  auto same = [&](std::size_t i, std::size_t j) { return basis.component(i) == basis.component(j); };

  // Time derivative.
  {
    Eigen::VectorXd w(cells);
    for (std::size_t k = 0; k < cells; ++k) w[k] = vol * ctx.rho_new[k] / ctx.dt;
    const Eigen::MatrixXd m = phi.transpose() * w.asDiagonal() * phi;
    const auto v_old = basis.cell_velocity(*ctx.c_old);
    for (std::size_t i = 0; i < n; ++i) {
      const int ci = basis.component(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (same(i, j)) sys.matrix(i, j) += m(i, j);
      }
      double s = 0.0;
      for (std::size_t k = 0; k < cells; ++k) s += vol * ctx.rho_old[k] * v_old[k][ci] * phi(k, i);
      sys.rhs[i] += s / ctx.dt;
    }
  }

  const bool fluxes = !opt.frozen_densities;
  MassFluxes mf;
  if (fluxes) {
    std::vector<double> rho_b(outer.size());
    const auto& rb = ctx.bd->values(Species::Rho);
    const auto& zb = ctx.bd->values(Species::Z);
    for (std::size_t f = 0; f < outer.size(); ++f) rho_b[f] = rb[f] + zb[f];
    mf = mass_fluxes(mesh, *ctx.u_iter, opt.eps, ctx.rho_new, rho_b);
  }

  // Upwind convection of v with the convective mass flux.
  if (fluxes && opt.convection) {
    for (std::size_t f = 0; f < inner.size(); ++f) {
      const double flux = mf.interior_convective[f];
      if (flux == 0.0) continue;
      const int l = inner[f].left;
      const int r = inner[f].right;
      const int up = flux > 0.0 ? l : r;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = flux * (phi(l, i) - phi(r, i));
        if (d == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (same(i, j)) sys.matrix(i, j) += d * phi(up, j);
        }
      }
    }
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double flux = mf.boundary[f];
      if (!(flux > 0.0)) continue;
      const int k = outer[f].cell;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (same(i, j)) sys.matrix(i, j) += flux * phi(k, i) * phi(k, j);
        }
      }
    }
  }

  // eps grad(rho).grad(v) in face-difference form.
  if (fluxes && opt.eps != 0.0) {
    for (const auto& face : inner) {
      const double coef =
          opt.eps * face.area / face.distance * (ctx.rho_new[face.right] - ctx.rho_new[face.left]);
      if (coef == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const double avg = 0.5 * coef * (phi(face.left, i) + phi(face.right, i));
        for (std::size_t j = 0; j < n; ++j) {
          if (same(i, j)) sys.matrix(i, j) += avg * (phi(face.right, j) - phi(face.left, j));
        }
      }
    }
  }

  // Lift contributions (moved to the right-hand side).
  {
    std::vector<Vec2> force(cells, Vec2{0.0, 0.0});
    if (fluxes) {
      std::vector<double> net_diffusive(cells, 0.0);
      for (std::size_t f = 0; f < inner.size(); ++f) {
        net_diffusive[inner[f].left] += mf.interior_diffusive[f];
        net_diffusive[inner[f].right] -= mf.interior_diffusive[f];
      }
      std::vector<Vec2> grad_rho;
      if (opt.eps != 0.0) grad_rho = cell_gradient(mesh, ctx.rho_new);
      for (std::size_t k = 0; k < cells; ++k) {
        const Mat2& gb = lift.gradient[k];
        for (int a = 0; a < dim; ++a) {
          force[k][a] += -net_diffusive[k] * lift.value[k][a];
          if (opt.eps != 0.0) {
            force[k][a] += vol * opt.eps * (gb[a][0] * grad_rho[k][0] + gb[a][1] * grad_rho[k][1]);
          }
        }
      }
    }
    if (opt.convection) {
      const auto v_it = basis.cell_velocity(*ctx.c_iter);
      for (std::size_t k = 0; k < cells; ++k) {
        const Vec2 u{v_it[k][0] + lift.value[k][0], v_it[k][1] + lift.value[k][1]};
        const Mat2& gb = lift.gradient[k];
        for (int a = 0; a < dim; ++a) {
          force[k][a] += vol * ctx.rho_new[k] * (gb[a][0] * u[0] + gb[a][1] * u[1]);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int ci = basis.component(i);
      double s = 0.0;
      for (std::size_t k = 0; k < cells; ++k) s += force[k][ci] * phi(k, i);
      sys.rhs[i] -= s;
    }
  }

  // Pressure.
  if (opt.pressure) {
    Eigen::VectorXd p(cells);
    for (std::size_t k = 0; k < cells; ++k) {
      p[k] = vol * pressure_delta(*ctx.law, ctx.big_r[k], ctx.big_z[k], opt.delta, opt.c_exp,
                                  opt.allow_small_exponent);
    }
    sys.rhs += basis.discrete_divergence().transpose() * p;
  }

  // Viscosity: implicit stiffness and the lift part on the right-hand side.
  {
    const auto& gx = basis.gradient(0);
    const auto& gy = basis.gradient(1);
    const Eigen::MatrixXd* g[2] = {&gx, &gy};
    Eigen::MatrixXd m[2][2];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) m[a][b] = vol * g[a]->transpose() * *g[b];
    }
    const double mu = opt.viscosity.mu;
    const double lambda = opt.viscosity.lambda;
    for (std::size_t i = 0; i < n; ++i) {
      const int ci = basis.component(i);
      for (std::size_t j = 0; j < n; ++j) {
        const int cj = basis.component(j);
        double kij = mu * m[cj][ci](i, j) + lambda * m[ci][cj](i, j);
        if (ci == cj) kij += mu * (m[0][0](i, j) + m[1][1](i, j));
        sys.matrix(i, j) += kij;
      }
      double s = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        const Mat2 sb = viscous_stress(lift.gradient[k], opt.viscosity, dim);
        s += vol * (sb[ci][0] * gx(k, i) + sb[ci][1] * gy(k, i));
      }
      sys.rhs[i] -= s;
    }
  }
  return sys;
}

Eigen::VectorXd momentum_step(const MomentumContext& ctx, const LiftField& lift, double* rcond) {
  const MomentumSystem sys = assemble_momentum(ctx, lift);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
  const double rc = lu.rcond();
  if (rcond) *rcond = rc;
  if (!(rc > 1e-14)) {
    throw SolverError("momentum step: singular Galerkin system (reciprocal condition " +
                      std::to_string(rc) + ")");
  }
  return lu.solve(sys.rhs);
}

double momentum_residual(const MomentumContext& ctx, const LiftField& lift, const Eigen::VectorXd& c) {
  const MomentumSystem sys = assemble_momentum(ctx, lift);
  const double scale = std::max(1.0, sys.rhs.cwiseAbs().maxCoeff());
  return (sys.matrix * c - sys.rhs).cwiseAbs().maxCoeff() / scale;
}

}  // namespace bifluid
