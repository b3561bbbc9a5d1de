#include "bifluid/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <limits>
#include <thread>

namespace bifluid {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "validation failed:";
  for (const auto& s : issues) out += "\n  - " + s;
  return out;
}

double l2(const Eigen::VectorXd& v) { return v.norm(); }

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> SchemeParams::violations(const PressureLaw& law) const {
  std::vector<std::string> out;
  if (!(eps >= 0.0)) out.push_back(fmt::format("[scheme-parameters] eps = {} must be >= 0", eps));
  if (!(delta >= 0.0)) out.push_back(fmt::format("[scheme-parameters] delta = {} must be >= 0", delta));
  if (!allow_small_exponent && !(c_exp > artificial_exponent_bound(law))) {
    out.push_back(fmt::format(
        "[artificial-pressure-exponent] c = {} must exceed max(9/2, beta, gamma) = {}", c_exp,
        artificial_exponent_bound(law)));
  }
  if (!(viscosity.mu > 0.0)) {
    out.push_back(fmt::format("[viscosity-bounds] mu = {} must be > 0", viscosity.mu));
  }
  if (!(viscosity.lambda + 2.0 / 3.0 * viscosity.mu >= 0.0)) {
    out.push_back(fmt::format("[viscosity-bounds] lambda + 2 mu/3 = {} must be >= 0",
                              viscosity.lambda + 2.0 / 3.0 * viscosity.mu));
  }
  if (modes_x < 1 || modes_y < 1) out.push_back("[scheme-parameters] mode counts must be >= 1");
  if (!(t_end > 0.0)) out.push_back("[scheme-parameters] t_end must be > 0");
  if (dt < 0.0) out.push_back("[scheme-parameters] dt must be >= 0");
  if (!(cfl > 0.0)) out.push_back("[scheme-parameters] cfl must be > 0");
  if (!(theta > 0.0 && theta <= 1.0)) out.push_back("[scheme-parameters] theta must lie in (0, 1]");
  if (!(tol_fp > 0.0)) out.push_back("[scheme-parameters] tol_fp must be > 0");
  if (max_iter < 1) out.push_back("[scheme-parameters] max_iter must be >= 1");
  return out;
}

std::vector<double> FluidState::total_density() const {
  std::vector<double> rho(density[0].size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = density[0][k] + density[1][k];
  return rho;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {
  const auto problems = spec_.params.violations(spec_.law);
  if (!problems.empty()) throw ValidationError(problems);
  bd_ = BoundaryData::build(spec_.mesh, spec_.u_b, spec_.boundary_density);
  basis_ = std::make_unique<GalerkinBasis>(spec_.mesh, spec_.params.modes_x, spec_.params.modes_y);
  lift_ = std::make_unique<Lift>(spec_.mesh, spec_.u_b, spec_.lift_kind, spec_.lift_width);
  lift_field_ = LiftField::sample(spec_.mesh, *lift_);

  const std::size_t cells = spec_.mesh.cell_count();
  for (const auto& d : spec_.initial_density) {
    if (d.size() != cells) throw std::invalid_argument("problem: initial density size mismatch");
  }
  initial_.density = spec_.initial_density;
  initial_.time = 0.0;
  if (spec_.initial_velocity.empty()) {
    initial_.coeffs = Eigen::VectorXd::Zero(basis_->size());
  } else {
    if (spec_.initial_velocity.size() != cells) {
      throw std::invalid_argument("problem: initial velocity size mismatch");
    }
    std::vector<Vec2> v(cells);
    for (std::size_t k = 0; k < cells; ++k) {
      v[k] = {spec_.initial_velocity[k][0] - lift_field_.value[k][0],
              spec_.initial_velocity[k][1] - lift_field_.value[k][1]};
    }
    initial_.coeffs = project_rhs(v, *basis_);
  }
}

double Problem::ratio_floor() const {
  return spec_.ratio_floor > 0.0 ? spec_.ratio_floor : spec_.bounds.a_lo;
}

EnergyPotential Problem::energy_potential() const {
  return EnergyPotential{&spec_.law, spec_.params.delta, spec_.params.c_exp};
}

std::shared_ptr<const Problem> Problem::with_params(const SchemeParams& params) const {
  ProblemSpec s = spec_;
  s.params = params;
  return std::make_shared<const Problem>(std::move(s));
}

double Problem::time_step() const {
  const auto& p = spec_.params;
  if (p.dt > 0.0) return p.dt;
  if (p.steps > 0) return p.t_end / p.steps;
  const Mesh& m = spec_.mesh;
  double h = m.spacing(0);
  if (m.dimension() == 2) h = std::min(h, m.spacing(1));
  double umax = 0.0;
  const auto v0 = basis_->cell_velocity(initial_.coeffs);
  for (std::size_t k = 0; k < m.cell_count(); ++k) {
    const double ux = v0[k][0] + lift_field_.value[k][0];
    const double uy = v0[k][1] + lift_field_.value[k][1];
    umax = std::max(umax, std::hypot(ux, uy));
  }
  for (double un : bd_.normal_velocity) umax = std::max(umax, std::abs(un));
  double c2 = 0.0;
  if (p.pressure) {
    const auto rho = initial_.total_density();
    for (std::size_t k = 0; k < m.cell_count(); ++k) {
      const double r = initial_.density[2][k];
      const double z = initial_.density[3][k];
      double stiff = r * spec_.law.d_dr(r, z) + z * spec_.law.d_dz(r, z);
      if (p.delta > 0.0) stiff += p.delta * p.c_exp * (std::pow(r, p.c_exp) + std::pow(z, p.c_exp));
      if (rho[k] > 0.0) c2 = std::max(c2, stiff / rho[k]);
    }
  }
  const double speed = std::max(umax + std::sqrt(c2), 1e-12);
  const double dt_cfl = p.cfl * h / speed;
  const int n = std::max(1, static_cast<int>(std::ceil(p.t_end / dt_cfl - 1e-12)));
  return p.t_end / n;
}

int Problem::step_count() const {
  const auto& p = spec_.params;
  if (p.steps > 0) return p.steps;
  return std::max(1, static_cast<int>(std::llround(p.t_end / time_step())));
}

FaceVelocity Problem::face_velocity(const Eigen::VectorXd& c) const {
  FaceVelocity fv;
  fv.interior = basis_->face_velocity(c);
  const auto& inner = spec_.mesh.interior_faces();
  for (std::size_t f = 0; f < inner.size(); ++f) fv.interior[f] += lift_field_.face[f][inner[f].axis];
  fv.boundary = bd_.normal_velocity;
  return fv;
}

FixedPointResult fixed_point_solve(const Problem& problem, const FluidState& state, double dt) {
  const auto& p = problem.params();
  const Mesh& mesh = problem.mesh();
  FixedPointResult res;
  Eigen::VectorXd v = state.coeffs;
  const auto rho_old = state.total_density();

  MomentumContext ctx;
  ctx.mesh = &mesh;
  ctx.basis = &problem.basis();
  ctx.lift = &problem.lift();
  ctx.law = &problem.law();
  ctx.bd = &problem.boundary();
  ctx.options.viscosity = p.viscosity;
  ctx.options.eps = p.eps;
  ctx.options.delta = p.delta;
  ctx.options.c_exp = p.c_exp;
  ctx.options.convection = p.convection;
  ctx.options.pressure = p.pressure;
  ctx.options.frozen_densities = p.frozen_densities;
  ctx.options.allow_small_exponent = p.allow_small_exponent;
  ctx.dt = dt;
  ctx.rho_old = rho_old;
  ctx.c_old = &state.coeffs;

  for (int k = 1; k <= p.max_iter; ++k) {
    FaceVelocity faces = problem.face_velocity(v);
    std::array<std::vector<double>, 4> dens;
    if (p.frozen_densities) {
      dens = state.density;
    } else {
      ParabolicOperator op(mesh, faces, p.eps, dt);
      const auto cert = op.certify();
      if (!cert.ok) throw SolverError("fixed point: parabolic operator is not monotone");
      for (Species s : kAllSpecies) {
        dens[static_cast<int>(s)] = op.solve(state.field(s), problem.boundary().values(s));
      }
    }
    std::vector<double> rho_new(dens[0].size());
    for (std::size_t c = 0; c < rho_new.size(); ++c) rho_new[c] = dens[0][c] + dens[1][c];

    ctx.rho_new = rho_new;
    ctx.big_r = dens[2];
    ctx.big_z = dens[3];
    ctx.u_iter = &faces;
    ctx.c_iter = &v;
    double rcond = 0.0;
    const Eigen::VectorXd c_hat = momentum_step(ctx, problem.lift_field(), &rcond);

    const double change = p.theta * l2(c_hat - v);
    res.changes.push_back(change);
    const bool done = change <= p.tol_fp * std::max(1.0, l2(c_hat));
    if (done || k == p.max_iter) {
      auto& r = res.record;
      r.time = state.time + dt;
      r.dt = dt;
      r.density = std::move(dens);
      r.coeffs = c_hat;
      r.coeffs_iter = v;
      r.faces = std::move(faces);
      r.iterations = k;
      r.change = change;
      r.rcond = rcond;
      r.converged = done;
      break;
    }
    v = p.theta * c_hat + (1.0 - p.theta) * v;
  }

  // Geometric mean of successive contraction ratios.
  double log_sum = 0.0;
  int count = 0;
  for (std::size_t i = 1; i < res.changes.size(); ++i) {
    if (res.changes[i - 1] > 0.0 && res.changes[i] > 0.0) {
      log_sum += std::log(res.changes[i] / res.changes[i - 1]);
      ++count;
    }
  }
  res.observed_rate = count > 0 ? std::exp(log_sum / count) : 0.0;
  return res;
}

FluidState Trajectory::state(std::size_t n) const {
  if (n == 0) return initial;
  const auto& st = steps.at(n - 1);
  FluidState s;
  s.density = st.density;
  s.coeffs = st.coeffs;
  s.time = st.time;
  return s;
}

ScalarHistory Trajectory::species_history(Species s) const {
  const auto& params = problem->params();
  ScalarHistory h;
  h.eps = params.frozen_densities ? 0.0 : params.eps;
  h.boundary = problem->boundary().values(s);
  h.initial = initial.field(s);
  h.initial_time = initial.time;
  h.steps.reserve(steps.size());
  for (const auto& st : steps) {
    ScalarHistory::Step hs;
    hs.dt = st.dt;
    hs.time = st.time;
    hs.field = st.density[static_cast<int>(s)];
    if (params.frozen_densities) {
      // Frozen fields are the solution of the same scheme with zero velocity.
      hs.u.interior.assign(st.faces.interior.size(), 0.0);
      hs.u.boundary.assign(st.faces.boundary.size(), 0.0);
    } else {
      hs.u = st.faces;
    }
    h.steps.push_back(std::move(hs));
  }
  return h;
}

Trajectory run_level1(std::shared_ptr<const Problem> problem) {
  Trajectory traj;
  traj.problem = problem;
  traj.initial = problem->initial_state();
  const double dt = problem->time_step();
  const int n = problem->step_count();
  traj.steps.reserve(n);
  FluidState state = traj.initial;
  for (int i = 0; i < n; ++i) {
    FixedPointResult fp = fixed_point_solve(*problem, state, dt);
    // Pin the final time to avoid drift from repeated addition.
    fp.record.time = traj.initial.time + (i + 1) * dt;
    if (!fp.record.converged) {
      traj.completed = false;
      traj.failure = fmt::format("fixed point did not converge at step {} (change {:.3e} after {} iterations)",
                                 i + 1, fp.record.change, fp.record.iterations);
      if (problem->params().abort_on_nonconvergence) {
        traj.steps.push_back(std::move(fp.record));
        throw SolverError(traj.failure);
      }
    }
    state.density = fp.record.density;
    state.coeffs = fp.record.coeffs;
    state.time = fp.record.time;
    traj.steps.push_back(std::move(fp.record));
  }
  return traj;
}

// ---------------------------------------------------------------------------

EnergyLedger energy_ledger(const Trajectory& traj, double tolerance) {
  const Problem& pb = *traj.problem;
  const Mesh& mesh = pb.mesh();
  const auto& params = pb.params();
  const auto& basis = pb.basis();
  const auto& lift = pb.lift_field();
  const auto& bd = pb.boundary();
  const auto& inner = mesh.interior_faces();
  const auto& outer = mesh.boundary_faces();
  const int dim = mesh.dimension();
  const std::size_t cells = mesh.cell_count();
  const double vol = mesh.cell_volume();
  const EnergyPotential pot = pb.energy_potential();
  const bool with_h = params.pressure && !params.frozen_densities;
  const bool fluxes = !params.frozen_densities;

  // Lift divergence from face values (interior) and u_B.n (boundary).
  FaceVelocity lift_faces;
  lift_faces.interior.resize(inner.size());
  for (std::size_t f = 0; f < inner.size(); ++f) lift_faces.interior[f] = lift.face[f][inner[f].axis];
  lift_faces.boundary = bd.normal_velocity;
  const auto div_b = discrete_divergence(mesh, lift_faces);

  std::vector<double> rho_b(outer.size());
  for (std::size_t f = 0; f < outer.size(); ++f) {
    rho_b[f] = bd.values(Species::Rho)[f] + bd.values(Species::Z)[f];
  }

  auto kinetic = [&](const std::vector<double>& rho, const std::vector<Vec2>& v) {
    double e = 0.0;
    for (std::size_t k = 0; k < cells; ++k) e += vol * 0.5 * rho[k] * (v[k][0] * v[k][0] + v[k][1] * v[k][1]);
    return e;
  };
  auto helm = [&](const std::array<std::vector<double>, 4>& d) {
    double e = 0.0;
    if (!with_h) return e;
    for (std::size_t k = 0; k < cells; ++k) e += vol * pot.value(d[2][k], d[3][k]);
    return e;
  };

  EnergyLedger led;
  FluidState prev = traj.initial;
  std::vector<double> rho_prev = prev.total_density();
  std::vector<Vec2> v_prev = basis.cell_velocity(prev.coeffs);
  const double ke0 = kinetic(rho_prev, v_prev);
  const double h0 = helm(prev.density);
  led.initial_energy = ke0 + h0;
  double abs_h0 = 0.0;
  if (with_h) {
    for (std::size_t k = 0; k < cells; ++k) abs_h0 += vol * std::abs(pot.value(prev.density[2][k], prev.density[3][k]));
  }
  led.scale = std::max(ke0 + abs_h0, std::numeric_limits<double>::min());

  double lhs_flux = 0.0;
  double rhs_work = 0.0;
  double numerical_total = 0.0;
  led.min_defect = traj.steps.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& st : traj.steps) {
    const double dt = st.dt;
    const auto& d = st.density;
    std::vector<double> rho(cells);
    for (std::size_t k = 0; k < cells; ++k) rho[k] = d[0][k] + d[1][k];
    const auto v = basis.cell_velocity(st.coeffs);
    const auto gv = basis.cell_gradient(st.coeffs);

    EnergyStep e;
    e.time = st.time;
    e.kinetic = kinetic(rho, v);
    e.helmholtz = helm(d);

    double visc = 0.0;
    double work_visc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
      Mat2 gu = gv[k];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) gu[a][b] += lift.gradient[k][a][b];
      }
      const Mat2 s = viscous_stress(gu, params.viscosity, dim);
      visc += vol * contract(s, gu);
      work_visc += vol * contract(s, lift.gradient[k]);
    }
    e.viscous = dt * visc;
    e.work_viscous = dt * work_visc;

    if (with_h) {
      double out = 0.0;
      double in_rel = 0.0;
      double in_work = 0.0;
      const auto& rb = bd.values(Species::BigR);
      const auto& zb = bd.values(Species::BigZ);
      for (std::size_t f = 0; f < outer.size(); ++f) {
        const double un = st.faces.boundary[f];
        const int k = outer[f].cell;
        if (un > 0.0) {
          out += pot.value(d[2][k], d[3][k]) * un * outer[f].area;
        } else if (un < 0.0) {
          in_rel += -pot.bregman(rb[f], zb[f], d[2][k], d[3][k]) * un * outer[f].area;
          in_work += -pot.value(rb[f], zb[f]) * un * outer[f].area;
        }
      }
      e.outflow = dt * out;
      e.inflow_relative = dt * in_rel;
      e.work_inflow = dt * in_work;

      double hess = 0.0;
      if (params.eps != 0.0) {
        for (const auto& face : inner) {
          const Vec2 gl = pot.gradient(d[2][face.left], d[3][face.left]);
          const Vec2 gr = pot.gradient(d[2][face.right], d[3][face.right]);
          hess += params.eps * face.area / face.distance *
                  ((gr[0] - gl[0]) * (d[2][face.right] - d[2][face.left]) +
                   (gr[1] - gl[1]) * (d[3][face.right] - d[3][face.left]));
        }
      }
      e.eps_hessian = dt * hess;

      double wp = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        wp += vol * pressure_delta(pb.law(), d[2][k], d[3][k], params.delta, params.c_exp,
                                   params.allow_small_exponent) * div_b[k];
      }
      e.work_pressure = -dt * wp;
    }

    MassFluxes mf;
    if (fluxes) mf = mass_fluxes(mesh, st.faces, params.eps, rho, rho_b);

    if (params.convection) {
      const auto v_it = basis.cell_velocity(st.coeffs_iter);
      double w = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        const Vec2 u{v_it[k][0] + lift.value[k][0], v_it[k][1] + lift.value[k][1]};
        const Mat2& gb = lift.gradient[k];
        for (int a = 0; a < dim; ++a) {
          w += vol * rho[k] * (gb[a][0] * u[0] + gb[a][1] * u[1]) * v[k][a];
        }
      }
      e.work_convection = -dt * w;
    }

    if (fluxes) {
      std::vector<double> net(cells, 0.0);
      for (std::size_t f = 0; f < inner.size(); ++f) {
        net[inner[f].left] += mf.interior_diffusive[f];
        net[inner[f].right] -= mf.interior_diffusive[f];
      }
      std::vector<Vec2> grad_rho;
      if (params.eps != 0.0) grad_rho = cell_gradient(mesh, rho);
      double w = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        const Mat2& gb = lift.gradient[k];
        for (int a = 0; a < dim; ++a) {
          double force = -net[k] * lift.value[k][a];
          if (params.eps != 0.0) force += vol * params.eps * (gb[a][0] * grad_rho[k][0] + gb[a][1] * grad_rho[k][1]);
          w += force * v[k][a];
        }
      }
      e.work_eps_lift = -dt * w;
    }

    // Numerical dissipation of the discretisation.
    double incr = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
      const double dx = v[k][0] - v_prev[k][0];
      const double dy = v[k][1] - v_prev[k][1];
      incr += vol * 0.5 * rho_prev[k] * (dx * dx + dy * dy);
    }
    e.kinetic_increment = incr;
    double num = incr;
    if (fluxes && params.convection) {
      double kin = 0.0;
      for (std::size_t f = 0; f < inner.size(); ++f) {
        const double dx = v[inner[f].left][0] - v[inner[f].right][0];
        const double dy = v[inner[f].left][1] - v[inner[f].right][1];
        kin += 0.5 * std::abs(mf.interior_convective[f]) * (dx * dx + dy * dy);
      }
      for (std::size_t f = 0; f < outer.size(); ++f) {
        const int k = outer[f].cell;
        kin += 0.5 * std::abs(mf.boundary[f]) * (v[k][0] * v[k][0] + v[k][1] * v[k][1]);
      }
      num += dt * kin;
    }
    if (with_h) {
      double hn = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        hn += vol * pot.bregman(prev.density[2][k], prev.density[3][k], d[2][k], d[3][k]);
      }
      double up = 0.0;
      for (std::size_t f = 0; f < inner.size(); ++f) {
        const double w = st.faces.interior[f];
        const int l = inner[f].left;
        const int r = inner[f].right;
        if (w > 0.0) {
          up += w * inner[f].area * pot.bregman(d[2][l], d[3][l], d[2][r], d[3][r]);
        } else if (w < 0.0) {
          up += -w * inner[f].area * pot.bregman(d[2][r], d[3][r], d[2][l], d[3][l]);
        }
      }
      num += hn + dt * up;
    }
    e.numerical = num;
    numerical_total += num;

    lhs_flux += e.viscous + e.outflow + e.inflow_relative + e.eps_hessian;
    rhs_work += e.work_pressure + e.work_convection + e.work_viscous + e.work_inflow + e.work_eps_lift;
    const double lhs = (e.kinetic + e.helmholtz) - (ke0 + h0) + lhs_flux;
    e.defect = rhs_work - lhs;
    led.min_defect = std::min(led.min_defect, e.defect);
    led.max_closure_error = std::max(led.max_closure_error, std::abs(e.defect - numerical_total) / led.scale);
    led.viscous_total += e.viscous;
    led.increment_total += e.kinetic_increment;
    led.steps.push_back(e);

    prev.density = d;
    rho_prev = std::move(rho);
    v_prev = v;
  }
  if (!led.steps.empty()) led.kinetic_loss = ke0 - led.steps.back().kinetic;
  led.min_relative_defect = led.min_defect / led.scale;
  led.passed = led.min_defect >= -tolerance * led.scale;
  return led;
}

// ---------------------------------------------------------------------------

unsigned worker_count() {
  if (const char* env = std::getenv("BIFLUID_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double field_distance(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += mesh.cell_volume() * (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double state_distance(const Problem& pb, const FluidState& a, const FluidState& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += field_distance(pb.mesh(), a.density[i], b.density[i]);
  // The basis is orthonormal, so coefficient distance is the L2 velocity distance.
  s += (a.coeffs - b.coeffs).squaredNorm();
  return std::sqrt(s);
}

std::vector<double> pressure_field(const Problem& pb, const FluidState& s) {
  const auto& p = pb.params();
  std::vector<double> out(s.density[2].size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = pressure_delta(pb.law(), s.density[2][k], s.density[3][k], p.delta, p.c_exp,
                            p.allow_small_exponent);
  }
  return out;
}

SweepReport run_sweep(const Problem& base, const std::vector<double>& values, bool is_eps) {
  SweepReport rep;
  rep.parameter_name = is_eps ? "eps" : "delta";
  rep.members.resize(values.size());
  // A common time grid keeps the members comparable step by step.
  const double dt = base.time_step();
  const int steps = base.step_count();
  parallel_for(values.size(), [&](std::size_t i) {
    SweepMember& m = rep.members[i];
    m.parameter = values[i];
    try {
      SchemeParams p = base.params();
      if (is_eps) {
        p.eps = values[i];
      } else {
        p.delta = values[i];
      }
      p.dt = dt;
      p.steps = steps;
      m.trajectory = run_level1(base.with_params(p));
      m.min_relative_defect = energy_ledger(m.trajectory).min_relative_defect;
    } catch (const std::exception& e) {
      m.ok = false;
      m.error = e.what();
    }
  });

  // Reference: the smallest parameter among successful members.
  int ref = -1;
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    if (!rep.members[i].ok) continue;
    if (ref < 0 || rep.members[i].parameter < rep.members[ref].parameter) ref = static_cast<int>(i);
  }
  if (ref < 0) return rep;
  const auto& rt = rep.members[ref].trajectory;
  const Mesh& mesh = base.mesh();
  const double floor = base.ratio_floor();
  const auto& outer = mesh.boundary_faces();

  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    SweepMember& m = rep.members[i];
    if (!m.ok) continue;
    const auto& tr = m.trajectory;
    const std::size_t n = std::min(tr.steps.size(), rt.steps.size());
    if (n == 0) continue;
    const FluidState a = tr.state(n);
    const FluidState b = rt.state(n);
    const auto sa = make_ratio(a.field(Species::BigZ), a.field(Species::BigR), floor);
    const auto sb = make_ratio(b.field(Species::BigZ), b.field(Species::BigR), floor);
    double fn = 0.0;
    for (std::size_t k = 0; k < sa.values.size(); ++k) {
      const double ds = sa.values[k] - sb.values[k];
      fn += mesh.cell_volume() * a.field(Species::BigR)[k] * ds * ds;
    }
    m.ratio_functional = fn;
    double bf = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const auto& za = tr.steps[s].density[3];
      const auto& ra = tr.steps[s].density[2];
      const auto& zb = rt.steps[s].density[3];
      const auto& rb = rt.steps[s].density[2];
      for (std::size_t f = 0; f < outer.size(); ++f) {
        const double un = tr.steps[s].faces.boundary[f];
        if (!(un > 0.0)) continue;
        const int k = outer[f].cell;
        const double s1 = ra[k] > 0.0 ? za[k] / ra[k] : floor;
        const double s2 = rb[k] > 0.0 ? zb[k] / rb[k] : floor;
        bf += tr.steps[s].dt * ra[k] * (s1 - s2) * (s1 - s2) * un * outer[f].area;
      }
    }
    m.ratio_boundary_functional = bf;

    if (!is_eps) {
      double sup = 0.0;
      for (std::size_t s = 0; s <= tr.steps.size(); ++s) {
        const auto& r = s == 0 ? tr.initial.density[2] : tr.steps[s - 1].density[2];
        double integral = 0.0;
        for (double v : r) integral += mesh.cell_volume() * std::pow(v, base.params().c_exp);
        sup = std::max(sup, integral);
      }
      m.artificial_pressure = m.parameter * sup;
    }
  }
  for (std::size_t i = 1; i < rep.members.size(); ++i) {
    SweepMember& m = rep.members[i];
    const SweepMember& prev = rep.members[i - 1];
    if (!m.ok || !prev.ok) continue;
    const std::size_t n = std::min(m.trajectory.steps.size(), prev.trajectory.steps.size());
    const FluidState a = m.trajectory.state(n);
    const FluidState b = prev.trajectory.state(n);
    m.cauchy_difference = state_distance(base, a, b);
    if (!is_eps) {
      const auto pa = pressure_field(*m.trajectory.problem, a);
      const auto pb = pressure_field(*prev.trajectory.problem, b);
      m.pressure_difference = std::sqrt(field_distance(mesh, pa, pb));
    }
  }
  return rep;
}

}  // namespace

SweepReport sweep_epsilon(const Problem& base, const std::vector<double>& eps_list) {
  return run_sweep(base, eps_list, true);
}

SweepReport sweep_delta(const Problem& base, const std::vector<double>& delta_list) {
  return run_sweep(base, delta_list, false);
}

}  // namespace bifluid
