#include "bifluid/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bifluid/thermo.hpp"

namespace bifluid {

namespace {

double neg(double x) { return std::min(x, 0.0); }
double pos(double x) { return std::max(x, 0.0); }

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

}  // namespace

FaceVelocity face_velocity_from_profile(const Mesh& mesh, const VelocityProfile& u,
                                        const BoundaryData& bd) {
  FaceVelocity fv;
  fv.interior.reserve(mesh.interior_faces().size());
  for (const auto& f : mesh.interior_faces()) fv.interior.push_back(u.value(f.center)[f.axis]);
  fv.boundary = bd.normal_velocity;
  return fv;
}

std::vector<double> discrete_divergence(const Mesh& mesh, const FaceVelocity& u) {
  std::vector<double> div(mesh.cell_count(), 0.0);
  const auto& inner = mesh.interior_faces();
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const double q = u.interior[f] * inner[f].area;
    div[inner[f].left] += q;
    div[inner[f].right] -= q;
  }
  const auto& outer = mesh.boundary_faces();
  for (std::size_t f = 0; f < outer.size(); ++f) div[outer[f].cell] += u.boundary[f] * outer[f].area;
  const double vol = mesh.cell_volume();
  for (double& d : div) d /= vol;
  return div;
}

double max_abs_divergence(const Mesh& mesh, const FaceVelocity& u) {
  double m = 0.0;
  for (double d : discrete_divergence(mesh, u)) m = std::max(m, std::abs(d));
  return m;
}

std::vector<Vec2> cell_velocity(const Mesh& mesh, const FaceVelocity& u) {
  std::vector<Vec2> out(mesh.cell_count(), Vec2{0.0, 0.0});
  const auto& inner = mesh.interior_faces();
  for (std::size_t f = 0; f < inner.size(); ++f) {
    out[inner[f].left][inner[f].axis] += 0.5 * u.interior[f];
    out[inner[f].right][inner[f].axis] += 0.5 * u.interior[f];
  }
  const auto& outer = mesh.boundary_faces();
  for (std::size_t f = 0; f < outer.size(); ++f) {
    const auto& bf = outer[f];
    const int axis = bf.normal[0] != 0.0 ? 0 : 1;
    // u.n with n = +-e_axis gives the axis component back after multiplying by n.
    out[bf.cell][axis] += 0.5 * u.boundary[f] * bf.normal[axis];
  }
  return out;
}

std::vector<Vec2> cell_gradient(const Mesh& mesh, std::span<const double> r) {
  std::vector<Vec2> g(mesh.cell_count(), Vec2{0.0, 0.0});
  const auto& inner = mesh.interior_faces();
  for (const auto& f : inner) {
    const double face = 0.5 * (r[f.left] + r[f.right]) * f.area;
    g[f.left][f.axis] += face;
    g[f.right][f.axis] -= face;
  }
  for (const auto& bf : mesh.boundary_faces()) {
    const int axis = bf.normal[0] != 0.0 ? 0 : 1;
    g[bf.cell][axis] += r[bf.cell] * bf.normal[axis] * bf.area;
  }
  const double vol = mesh.cell_volume();
  for (auto& v : g) {
    v[0] /= vol;
    v[1] /= vol;
  }
  return g;
}

void DensityField::validate() const {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k]) || values[k] < 0.0) {
      throw std::invalid_argument("density field: negative or non-finite value in cell " +
                                  std::to_string(k));
    }
  }
}

RatioField make_ratio(std::span<const double> big_z, std::span<const double> big_r, double floor) {
  require_size(big_z.size(), big_r.size(), "make_ratio");
  RatioField s;
  s.floor = floor;
  s.values.resize(big_r.size());
  for (std::size_t k = 0; k < big_r.size(); ++k) {
    s.values[k] = big_r[k] > 0.0 ? big_z[k] / big_r[k] : floor;
  }
  return s;
}

// ---------------------------------------------------------------------------

ParabolicOperator::ParabolicOperator(const Mesh& mesh, const FaceVelocity& u, double eps, double dt)
    : mesh_(&mesh), boundary_un_(u.boundary), eps_(eps), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("parabolic operator: dt must be positive");
  if (!(eps >= 0.0)) throw std::invalid_argument("parabolic operator: eps must be nonnegative");
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();
  require_size(u.interior.size(), inner.size(), "parabolic operator interior velocity");
  require_size(u.boundary.size(), outer.size(), "parabolic operator boundary velocity");

  const std::size_t n = mesh.cell_count();
  std::vector<double> diag(n, mesh.cell_volume() / dt);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 2 * inner.size());
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const auto& face = inner[f];
    const double w = u.interior[f];
    const double diff = eps * face.area / face.distance;
    diag[face.left] += pos(w) * face.area + diff;
    diag[face.right] += -neg(w) * face.area + diff;
    trip.emplace_back(face.left, face.right, neg(w) * face.area - diff);
    trip.emplace_back(face.right, face.left, -pos(w) * face.area - diff);
  }
  for (std::size_t f = 0; f < outer.size(); ++f) {
    if (u.boundary[f] > 0.0) diag[outer[f].cell] += u.boundary[f] * outer[f].area;
  }
  for (std::size_t k = 0; k < n; ++k) trip.emplace_back(k, k, diag[k]);
  matrix_.resize(n, n);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();

  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(matrix_);
  lu_->factorize(matrix_);
  if (lu_->info() != Eigen::Success) {
    throw SolverError("parabolic operator: factorisation failed");
  }
}

MMatrixReport ParabolicOperator::certify() const {
  MMatrixReport rep;
  const std::size_t n = matrix_.rows();
  std::vector<double> col_excess(n, 0.0);
  rep.min_diagonal = std::numeric_limits<double>::infinity();
  rep.max_offdiagonal = -std::numeric_limits<double>::infinity();
  for (int col = 0; col < matrix_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, col); it; ++it) {
      if (it.row() == it.col()) {
        rep.min_diagonal = std::min(rep.min_diagonal, it.value());
        col_excess[col] += it.value();
      } else {
        rep.max_offdiagonal = std::max(rep.max_offdiagonal, it.value());
        col_excess[col] -= std::abs(it.value());
      }
    }
  }
  if (!std::isfinite(rep.max_offdiagonal)) rep.max_offdiagonal = 0.0;
  rep.min_column_excess = *std::min_element(col_excess.begin(), col_excess.end());
  // Column excess equals |K|/dt plus outflow and is compared against round-off.
  const double tol = 1e-12 * mesh_->cell_volume() / dt_;
  rep.ok = rep.min_diagonal > 0.0 && rep.max_offdiagonal <= 0.0 &&
           rep.min_column_excess > -tol;
  return rep;
}

std::vector<double> ParabolicOperator::solve(std::span<const double> r_old,
                                             std::span<const double> r_boundary,
                                             std::span<const double> source,
                                             std::span<const double> boundary_extra) const {
  const std::size_t n = mesh_->cell_count();
  const auto& outer = mesh_->boundary_faces();
  require_size(r_old.size(), n, "parabolic solve r_old");
  require_size(r_boundary.size(), outer.size(), "parabolic solve r_boundary");
  const double vol = mesh_->cell_volume();
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) rhs[k] = vol / dt_ * r_old[k];
  if (!source.empty()) {
    require_size(source.size(), n, "parabolic solve source");
    for (std::size_t k = 0; k < n; ++k) rhs[k] += vol * source[k];
  }
  for (std::size_t f = 0; f < outer.size(); ++f) {
    if (boundary_un_[f] < 0.0) rhs[outer[f].cell] -= r_boundary[f] * boundary_un_[f] * outer[f].area;
  }
  if (!boundary_extra.empty()) {
    require_size(boundary_extra.size(), outer.size(), "parabolic solve boundary_extra");
    for (std::size_t f = 0; f < outer.size(); ++f) rhs[outer[f].cell] -= boundary_extra[f];
  }
  const Eigen::VectorXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) throw SolverError("parabolic operator: solve failed");
  return std::vector<double>(x.data(), x.data() + n);
}

DensityField parabolic_step(const Mesh& mesh, const DensityField& r, const FaceVelocity& u,
                            double eps, double dt, std::span<const double> r_boundary,
                            const StepForcing* forcing) {
  ParabolicOperator op(mesh, u, eps, dt);
  const MMatrixReport cert = op.certify();
  if (!cert.ok) {
    throw SolverError("parabolic step rejected: monotonicity certificate failed (min column excess " +
                      std::to_string(cert.min_column_excess) + ")");
  }
  DensityField out;
  out.species = r.species;
  out.time = r.time + dt;
  if (forcing) {
    out.values = op.solve(r.values, r_boundary, forcing->source, forcing->boundary_extra);
  } else {
    out.values = op.solve(r.values, r_boundary);
  }
  return out;
}

DensityField parabolic_step(const Mesh& mesh, const DensityField& r, const FaceVelocity& u,
                            double eps, double dt, const BoundaryData& bd) {
  if (!r.species) throw std::invalid_argument("parabolic_step: field has no species tag");
  return parabolic_step(mesh, r, u, eps, dt, bd.values(*r.species));
}

double explicit_transport_limit(const Mesh& mesh, const FaceVelocity& u) {
  std::vector<double> inflow(mesh.cell_count(), 0.0);
  const auto& inner = mesh.interior_faces();
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const double w = u.interior[f] * inner[f].area;
    inflow[inner[f].right] += pos(w);
    inflow[inner[f].left] += -neg(w);
  }
  const auto& outer = mesh.boundary_faces();
  for (std::size_t f = 0; f < outer.size(); ++f) inflow[outer[f].cell] += -neg(u.boundary[f]) * outer[f].area;
  double limit = std::numeric_limits<double>::infinity();
  for (double q : inflow) {
    if (q > 0.0) limit = std::min(limit, mesh.cell_volume() / q);
  }
  return limit;
}

RatioField transport_step(const Mesh& mesh, const RatioField& s, const FaceVelocity& u, double dt,
                          std::span<const double> s_boundary, TransportVariant variant) {
  const std::size_t n = mesh.cell_count();
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();
  require_size(s.values.size(), n, "transport_step field");
  require_size(s_boundary.size(), outer.size(), "transport_step boundary");
  if (!(dt > 0.0)) throw std::invalid_argument("transport_step: dt must be positive");
  const double vol = mesh.cell_volume();

  RatioField out;
  out.floor = s.floor;
  if (variant == TransportVariant::Explicit) {
    const double limit = explicit_transport_limit(mesh, u);
    if (dt > limit * (1.0 + 1e-12)) {
      throw SolverError("transport_step: explicit CFL violated (dt = " + std::to_string(dt) +
                        ", limit = " + std::to_string(limit) + ")");
    }
    out.values = s.values;
    for (std::size_t f = 0; f < inner.size(); ++f) {
      const auto& face = inner[f];
      const double q = u.interior[f] * face.area * dt / vol;
      if (q > 0.0) {
        out.values[face.right] += q * (s.values[face.left] - s.values[face.right]);
      } else if (q < 0.0) {
        out.values[face.left] += -q * (s.values[face.right] - s.values[face.left]);
      }
    }
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double q = -neg(u.boundary[f]) * outer[f].area * dt / vol;
      const int k = outer[f].cell;
      if (q > 0.0) out.values[k] += q * (s_boundary[f] - s.values[k]);
    }
    return out;
  }

  std::vector<double> diag(n, 1.0);
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) rhs[k] = s.values[k];
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + inner.size());
  for (std::size_t f = 0; f < inner.size(); ++f) {
    const auto& face = inner[f];
    const double q = u.interior[f] * face.area * dt / vol;
    if (q > 0.0) {
      diag[face.right] += q;
      trip.emplace_back(face.right, face.left, -q);
    } else if (q < 0.0) {
      diag[face.left] += -q;
      trip.emplace_back(face.left, face.right, q);
    }
  }
  for (std::size_t f = 0; f < outer.size(); ++f) {
    const double q = -neg(u.boundary[f]) * outer[f].area * dt / vol;
    const int k = outer[f].cell;
    if (q > 0.0) {
      diag[k] += q;
      rhs[k] += q * s_boundary[f];
    }
  }
  for (std::size_t k = 0; k < n; ++k) trip.emplace_back(k, k, diag[k]);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("transport_step: factorisation failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolverError("transport_step: solve failed");
  out.values.assign(x.data(), x.data() + n);
  return out;
}

// ---------------------------------------------------------------------------

TestFunction TestFunction::unit() {
  TestFunction t;
  t.name = "1";
  t.value = [](double, const Vec2&) { return 1.0; };
  t.time_derivative = [](double, const Vec2&) { return 0.0; };
  t.gradient = [](double, const Vec2&) { return Vec2{0.0, 0.0}; };
  return t;
}

std::vector<double> weak_continuity_residual(const Mesh& mesh, const ScalarHistory& h,
                                             const TestFunction& phi) {
  const std::size_t n = mesh.cell_count();
  const auto& outer = mesh.boundary_faces();
  const double vol = mesh.cell_volume();

  std::vector<Vec2> centers(n);
  for (std::size_t k = 0; k < n; ++k) centers[k] = mesh.center(k);

  double initial = 0.0;
  for (std::size_t k = 0; k < n; ++k) initial += vol * h.initial[k] * phi.value(h.initial_time, centers[k]);

  std::vector<double> out;
  out.reserve(h.steps.size());
  double flux_integral = 0.0;  // accumulated space-time terms
  for (const auto& st : h.steps) {
    const double t = st.time;
    const auto u_cell = cell_velocity(mesh, st.u);
    std::vector<Vec2> grad_r;
    if (h.eps != 0.0) grad_r = cell_gradient(mesh, st.field);

    double volume_terms = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 g = phi.gradient(t, centers[k]);
      double integrand = st.field[k] * phi.time_derivative(t, centers[k]) +
                         st.field[k] * (u_cell[k][0] * g[0] + u_cell[k][1] * g[1]);
      if (h.eps != 0.0) integrand -= h.eps * (grad_r[k][0] * g[0] + grad_r[k][1] * g[1]);
      if (!st.source.empty()) integrand += st.source[k] * phi.value(t, centers[k]);
      volume_terms += vol * integrand;
    }
    double boundary_terms = 0.0;
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double un = st.u.boundary[f];
      const double pv = phi.value(t, outer[f].center);
      if (un > 0.0) {
        boundary_terms += st.field[outer[f].cell] * un * pv * outer[f].area;
      } else if (un < 0.0) {
        boundary_terms += h.boundary[f] * un * pv * outer[f].area;
      }
      if (!st.boundary_extra.empty()) boundary_terms += st.boundary_extra[f] * pv;
    }
    flux_integral += st.dt * (boundary_terms - volume_terms);

    double current = 0.0;
    for (std::size_t k = 0; k < n; ++k) current += vol * st.field[k] * phi.value(t, centers[k]);
    out.push_back(current - initial + flux_integral);
  }
  return out;
}

MassLedger mass_ledger(const Mesh& mesh, const ScalarHistory& h) {
  MassLedger ledger;
  ledger.cumulative = weak_continuity_residual(mesh, h, TestFunction::unit());

  // Scale: largest of the stored mass and the accumulated boundary transfer.
  const double vol = mesh.cell_volume();
  double scale = 0.0;
  for (double r : h.initial) scale += vol * std::abs(r);
  const auto& outer = mesh.boundary_faces();
  double transfer = 0.0;
  for (const auto& st : h.steps) {
    double mass = 0.0;
    for (double r : st.field) mass += vol * std::abs(r);
    scale = std::max(scale, mass);
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double un = st.u.boundary[f];
      const double r = un > 0.0 ? st.field[outer[f].cell] : h.boundary[f];
      transfer += st.dt * std::abs(r * un) * outer[f].area;
    }
  }
  ledger.scale = std::max({scale, transfer, std::numeric_limits<double>::min()});
  for (double c : ledger.cumulative) {
    ledger.max_relative = std::max(ledger.max_relative, std::abs(c) / ledger.scale);
  }
  return ledger;
}

MaxMinReport maxmin_certificate(const Mesh& mesh, const ScalarHistory& h,
                                const BoundaryPartition& partition) {
  MaxMinReport rep;
  rep.upper_data = *std::max_element(h.initial.begin(), h.initial.end());
  rep.lower_data = *std::min_element(h.initial.begin(), h.initial.end());
  for (int f : partition.inflow) {
    rep.upper_data = std::max(rep.upper_data, h.boundary[f]);
    rep.lower_data = std::min(rep.lower_data, h.boundary[f]);
  }
  double up_factor = 1.0;
  double lo_factor = 1.0;
  double elapsed = 0.0;
  rep.worst_upper_margin = std::numeric_limits<double>::infinity();
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  for (const auto& st : h.steps) {
    const double d = max_abs_divergence(mesh, st.u);
    rep.max_divergence = std::max(rep.max_divergence, d);
    elapsed += st.dt;
    const double shrink = 1.0 - st.dt * d;
    up_factor = shrink > 0.0 ? up_factor / shrink : std::numeric_limits<double>::infinity();
    lo_factor /= (1.0 + st.dt * d);

    const double mx = *std::max_element(st.field.begin(), st.field.end());
    const double mn = *std::min_element(st.field.begin(), st.field.end());
    rep.max_value.push_back(mx);
    rep.min_value.push_back(mn);
    rep.upper_bound.push_back(rep.upper_data * up_factor);
    rep.lower_bound.push_back(rep.lower_data * lo_factor);
    rep.upper_bound_continuous.push_back(rep.upper_data * std::exp(elapsed * rep.max_divergence));
    rep.lower_bound_continuous.push_back(rep.lower_data * std::exp(-elapsed * rep.max_divergence));

    const double scale = std::max(std::abs(rep.upper_data), std::numeric_limits<double>::min());
    const double upper_margin =
        std::isfinite(rep.upper_bound.back()) ? (rep.upper_bound.back() - mx) / scale
                                              : std::numeric_limits<double>::infinity();
    const double lower_margin = (mn - rep.lower_bound.back()) / scale;
    rep.worst_upper_margin = std::min(rep.worst_upper_margin, upper_margin);
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, lower_margin);
  }
  if (h.steps.empty()) {
    rep.worst_upper_margin = 0.0;
    rep.worst_lower_margin = 0.0;
  }
  rep.passed = rep.worst_upper_margin >= -1e-12 && rep.worst_lower_margin >= -1e-12;
  return rep;
}

// ---------------------------------------------------------------------------

std::string Renormalizer::name() const {
  switch (kind) {
    case Kind::Square: return "s^2";
    case Kind::EntropyLog: return "s*ln(s+a)";
    case Kind::Truncated: return "L_k";
  }
  return "?";
}

double Renormalizer::value(double s) const {
  switch (kind) {
    case Kind::Square: return s * s;
    case Kind::EntropyLog: return s * std::log(s + parameter);
    case Kind::Truncated: return truncation_L(parameter, s);
  }
  return 0.0;
}

double Renormalizer::derivative(double s) const {
  switch (kind) {
    case Kind::Square: return 2.0 * s;
    case Kind::EntropyLog: return std::log(s + parameter) + s / (s + parameter);
    case Kind::Truncated: return truncation_L_derivative(parameter, s);
  }
  return 0.0;
}

double Renormalizer::second_derivative(double s) const {
  switch (kind) {
    case Kind::Square: return 2.0;
    case Kind::EntropyLog: {
      const double q = s + parameter;
      return 1.0 / q + parameter / (q * q);
    }
    case Kind::Truncated: return truncation_T_derivative(parameter, s) / s;
  }
  return 0.0;
}

double Renormalizer::bregman(double a, double b) const {
  if (kind == Kind::Square) return (a - b) * (a - b);
  return value(a) - derivative(b) * (a - b) - value(b);
}

RenormLedger renorm_budget(const Mesh& mesh, const ScalarHistory& h, const Renormalizer& b) {
  RenormLedger led;
  led.renormalizer = b.name();
  const std::size_t n = mesh.cell_count();
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();
  const double vol = mesh.cell_volume();

  led.min_boundary_bregman = std::numeric_limits<double>::infinity();
  double cumulative = 0.0;
  double scale = 0.0;
  std::vector<double> prev = h.initial;
  for (double r : prev) scale += vol * std::abs(b.value(r));

  std::vector<double> bp(n);
  for (const auto& st : h.steps) {
    const auto& r = st.field;
    for (std::size_t k = 0; k < n; ++k) bp[k] = b.derivative(r[k]);

    double storage = 0.0;
    double numerical = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      storage += vol * (b.value(r[k]) - b.value(prev[k]));
      numerical += vol * b.bregman(prev[k], r[k]);
    }

    double diffusion = 0.0;
    double upwind = 0.0;
    for (std::size_t f = 0; f < inner.size(); ++f) {
      const auto& face = inner[f];
      const double rl = r[face.left];
      const double rr = r[face.right];
      if (h.eps != 0.0) {
        diffusion += h.eps * face.area / face.distance * (bp[face.right] - bp[face.left]) * (rr - rl);
      }
      const double w = st.u.interior[f];
      if (w > 0.0) {
        upwind += w * face.area * b.bregman(rl, rr);
      } else if (w < 0.0) {
        upwind += -w * face.area * b.bregman(rr, rl);
      }
    }
    numerical += st.dt * upwind;

    const auto div = discrete_divergence(mesh, st.u);
    double pressure_like = 0.0;
    for (std::size_t k = 0; k < n; ++k) pressure_like += vol * (r[k] * bp[k] - b.value(r[k])) * div[k];

    double outflow = 0.0;
    double inflow = 0.0;
    double extra = 0.0;
    for (std::size_t f = 0; f < outer.size(); ++f) {
      const double un = st.u.boundary[f];
      const int k = outer[f].cell;
      if (un > 0.0) {
        outflow += b.value(r[k]) * un * outer[f].area;
      } else if (un < 0.0) {
        const double e = b.bregman(h.boundary[f], r[k]);
        led.min_boundary_bregman = std::min(led.min_boundary_bregman, e);
        inflow += un * (b.value(h.boundary[f]) - e) * outer[f].area;
      }
      if (!st.boundary_extra.empty()) extra += bp[k] * st.boundary_extra[f];
    }
    double source = 0.0;
    if (!st.source.empty()) {
      for (std::size_t k = 0; k < n; ++k) source += vol * bp[k] * st.source[k];
    }

    const double step_total =
        storage + st.dt * (diffusion + pressure_like + outflow + inflow + extra - source) + numerical;
    cumulative += step_total;

    led.storage.push_back(storage);
    led.diffusion.push_back(diffusion);
    led.pressure_like.push_back(pressure_like);
    led.outflow.push_back(outflow);
    led.inflow.push_back(inflow);
    led.extra.push_back(extra);
    led.source.push_back(source);
    led.numerical.push_back(numerical);
    led.cumulative.push_back(cumulative);
    if (diffusion < 0.0 || numerical < 0.0) led.dissipation_nonnegative = false;

    double stored = 0.0;
    for (double v : r) stored += vol * std::abs(b.value(v));
    scale = std::max({scale, stored,
                      std::abs(st.dt * (std::abs(diffusion) + std::abs(pressure_like) +
                                        std::abs(outflow) + std::abs(inflow))) +
                          std::abs(numerical)});
    prev = r;
  }
  if (!std::isfinite(led.min_boundary_bregman)) led.min_boundary_bregman = 0.0;
  led.scale = std::max(scale, std::numeric_limits<double>::min());
  for (double c : led.cumulative) led.max_relative = std::max(led.max_relative, std::abs(c) / led.scale);
  return led;
}

}  // namespace bifluid
