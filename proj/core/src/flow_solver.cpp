#include "hemoda/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hemoda/errors.hpp"

namespace hemoda {

namespace {

// Thomas algorithm; `rhs` is overwritten with the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t k = 1; k < n; ++k) {
    const double m = lower[k] / diag[k - 1];
    diag[k] -= m * upper[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - upper[k] * rhs[k + 1]) / diag[k];
}

// Derivative from two one-sided samples (value, distance from the center).
double two_sided(double lo_value, double lo_dist, double hi_value, double hi_dist) {
  const double span = lo_dist + hi_dist;
  return span > 0.0 ? (hi_value - lo_value) / span : 0.0;
}

}  // namespace

FlowSolver::FlowSolver(const Mesh& mesh, const FluidModel& model, SolverOptions options)
    : mesh_(mesh), model_(model), options_(options), pressure_(mesh, options.poisson) {
  model_.validate();
  build_stencils();
}

void FlowSolver::build_stencils() {
  const int nx = mesh_.nx();
  const int ny = mesh_.ny();
  auto u_neighbour_y = [&](int i, int j) -> Neighbour {
    if (j < 0 || j >= ny || mesh_.u_kind(i, j) == FaceKind::kDead) return {Link::kMirror, -1};
    return {Link::kValue, mesh_.u_index(i, j)};
  };
  auto v_neighbour_x = [&](int i, int j) -> Neighbour {
    if (i < 0) return {Link::kMirror, -1};
    if (i >= nx) return {Link::kZeroGradient, -1};
    if (mesh_.v_kind(i, j) == FaceKind::kDead) return {Link::kMirror, -1};
    return {Link::kValue, mesh_.v_index(i, j)};
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      if (mesh_.u_kind(i, j) != FaceKind::kActive) continue;
      FaceStencil f{};
      f.index = mesh_.u_index(i, j);
      f.i = i;
      f.j = j;
      f.west = {Link::kValue, mesh_.u_index(i - 1, j)};
      f.east = {Link::kValue, mesh_.u_index(i + 1, j)};
      f.south = u_neighbour_y(i, j - 1);
      f.north = u_neighbour_y(i, j + 1);
      f.cross[0] = mesh_.v_index(i - 1, j);
      f.cross[1] = mesh_.v_index(i, j);
      f.cross[2] = mesh_.v_index(i - 1, j + 1);
      f.cross[3] = mesh_.v_index(i, j + 1);
      u_faces_.push_back(f);
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (mesh_.v_kind(i, j) != FaceKind::kActive) continue;
      FaceStencil f{};
      f.index = mesh_.v_index(i, j);
      f.i = i;
      f.j = j;
      f.west = v_neighbour_x(i - 1, j);
      f.east = v_neighbour_x(i + 1, j);
      f.south = {Link::kValue, mesh_.v_index(i, j - 1)};
      f.north = {Link::kValue, mesh_.v_index(i, j + 1)};
      f.cross[0] = mesh_.u_index(i, j - 1);
      f.cross[1] = mesh_.u_index(i + 1, j - 1);
      f.cross[2] = mesh_.u_index(i, j);
      f.cross[3] = mesh_.u_index(i + 1, j);
      v_faces_.push_back(f);
    }
  }
}

void FlowSolver::apply_boundary(FlowState& s, double t, const InletSpec& inlet) const {
  const int nx = mesh_.nx();
  const int ny = mesh_.ny();
  const double height = mesh_.shape().total_height;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int f = mesh_.u_index(i, j);
      switch (mesh_.u_kind(i, j)) {
        case FaceKind::kInlet:
          s.u[f] = inlet.velocity(t, (j + 0.5) * mesh_.dy(), height);
          break;
        case FaceKind::kOutlet:
          s.u[f] = s.u[mesh_.u_index(i - 1, j)];
          break;
        case FaceKind::kWall:
        case FaceKind::kDead:
          s.u[f] = 0.0;
          break;
        case FaceKind::kActive:
          break;
      }
    }
  }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mesh_.v_kind(i, j) != FaceKind::kActive) s.v[mesh_.v_index(i, j)] = 0.0;
}

FlowState FlowSolver::predict(const FlowState& s, double dt) const {
  const double dx = mesh_.dx();
  const double dy = mesh_.dy();
  const bool explicit_viscosity = model_.kind == Rheology::kNewtonian;
  const double nu = model_.mu / model_.density;
  const double idx2 = 1.0 / (dx * dx);
  const double idy2 = 1.0 / (dy * dy);

  auto value = [](const std::vector<double>& a, const Neighbour& n, double self) {
    switch (n.link) {
      case Link::kValue:
        return a[n.index];
      case Link::kMirror:
        return -self;
      case Link::kZeroGradient:
        return self;
    }
    return self;
  };

  FlowState w = s;
  for (const auto& f : u_faces_) {
    const double a = s.u[f.index];
    const double b = 0.25 * (s.v[f.cross[0]] + s.v[f.cross[1]] + s.v[f.cross[2]] + s.v[f.cross[3]]);
    const double uw = value(s.u, f.west, a);
    const double ue = value(s.u, f.east, a);
    const double us = value(s.u, f.south, a);
    const double un = value(s.u, f.north, a);
    const double dudx = a >= 0.0 ? (a - uw) / dx : (ue - a) / dx;
    const double dudy = b >= 0.0 ? (a - us) / dy : (un - a) / dy;
    double rate = -(a * dudx + b * dudy);
    if (explicit_viscosity) rate += nu * ((uw - 2.0 * a + ue) * idx2 + (us - 2.0 * a + un) * idy2);
    w.u[f.index] = a + dt * rate;
  }
  for (const auto& f : v_faces_) {
    const double b = s.v[f.index];
    const double a = 0.25 * (s.u[f.cross[0]] + s.u[f.cross[1]] + s.u[f.cross[2]] + s.u[f.cross[3]]);
    const double vw = value(s.v, f.west, b);
    const double ve = value(s.v, f.east, b);
    const double vs = value(s.v, f.south, b);
    const double vn = value(s.v, f.north, b);
    const double dvdx = a >= 0.0 ? (b - vw) / dx : (ve - b) / dx;
    const double dvdy = b >= 0.0 ? (b - vs) / dy : (vn - b) / dy;
    double rate = -(a * dvdx + b * dvdy);
    if (explicit_viscosity) rate += nu * ((vw - 2.0 * b + ve) * idx2 + (vs - 2.0 * b + vn) * idy2);
    w.v[f.index] = b + dt * rate;
  }
  return w;
}

void FlowSolver::implicit_viscosity(FlowState& w, const FlowState& from, double dt) const {
  const int nx = mesh_.nx();
  const int ny = mesh_.ny();
  const double dx = mesh_.dx();
  const double dy = mesh_.dy();

  const std::vector<double> rate = shear_rate(from, mesh_);
  std::vector<double> mu_cell(mesh_.cell_count(), model_.mu_inf);
  for (int c : mesh_.fluid_cells()) mu_cell[c] = effective_viscosity(rate[c], model_);
  auto cell_mu = [&](int i, int j) { return mu_cell[mesh_.cell_index(i, j)]; };
  // Node (i, j) sits at (x_i, y_j); average over its fluid neighbours.
  auto node_mu = [&](int i, int j) {
    double sum = 0.0;
    int n = 0;
    for (int di = -1; di <= 0; ++di)
      for (int dj = -1; dj <= 0; ++dj)
        if (mesh_.is_fluid(i + di, j + dj)) {
          sum += cell_mu(i + di, j + dj);
          ++n;
        }
    return n > 0 ? sum / n : model_.mu_inf;
  };

  const double k = dt / model_.density;
  std::vector<double> lower, diag, upper, rhs;
  auto reset = [&](std::size_t n) {
    lower.assign(n, 0.0);
    diag.assign(n, 1.0);
    upper.assign(n, 0.0);
    rhs.assign(n, 0.0);
  };
  // Adds the coupling to one neighbour of line position `pos`.
  auto couple = [&](std::size_t pos, const Neighbour& nb, double c, bool towards_lower) {
    switch (nb.link) {
      case Link::kValue:
        diag[pos] += c;
        (towards_lower ? lower[pos] : upper[pos]) = -c;
        break;
      case Link::kMirror:
        diag[pos] += 2.0 * c;
        break;
      case Link::kZeroGradient:
        break;
    }
  };

  std::vector<int> u_slot(mesh_.u_face_count(), -1);
  for (std::size_t s = 0; s < u_faces_.size(); ++s) u_slot[u_faces_[s].index] = static_cast<int>(s);
  std::vector<int> v_slot(mesh_.v_face_count(), -1);
  for (std::size_t s = 0; s < v_faces_.size(); ++s) v_slot[v_faces_[s].index] = static_cast<int>(s);

  // u, x-direction lines.
  for (int j = 0; j < ny; ++j) {
    reset(nx + 1);
    for (int i = 0; i <= nx; ++i) {
      const int f = mesh_.u_index(i, j);
      rhs[i] = w.u[f];
      if (u_slot[f] < 0) continue;
      const auto& st = u_faces_[u_slot[f]];
      couple(i, st.west, k * cell_mu(i - 1, j) / (dx * dx), true);
      couple(i, st.east, k * cell_mu(i, j) / (dx * dx), false);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    for (int i = 0; i <= nx; ++i) w.u[mesh_.u_index(i, j)] = rhs[i];
  }
  // u, y-direction lines.
  for (int i = 1; i < nx; ++i) {
    reset(ny);
    for (int j = 0; j < ny; ++j) {
      const int f = mesh_.u_index(i, j);
      rhs[j] = w.u[f];
      if (u_slot[f] < 0) continue;
      const auto& st = u_faces_[u_slot[f]];
      couple(j, st.south, k * node_mu(i, j) / (dy * dy), true);
      couple(j, st.north, k * node_mu(i, j + 1) / (dy * dy), false);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    for (int j = 0; j < ny; ++j) w.u[mesh_.u_index(i, j)] = rhs[j];
  }
  // v, x-direction lines.
  for (int j = 1; j < ny; ++j) {
    reset(nx);
    for (int i = 0; i < nx; ++i) {
      const int f = mesh_.v_index(i, j);
      rhs[i] = w.v[f];
      if (v_slot[f] < 0) continue;
      const auto& st = v_faces_[v_slot[f]];
      couple(i, st.west, k * node_mu(i, j) / (dx * dx), true);
      couple(i, st.east, k * node_mu(i + 1, j) / (dx * dx), false);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    for (int i = 0; i < nx; ++i) w.v[mesh_.v_index(i, j)] = rhs[i];
  }
  // v, y-direction lines.
  for (int i = 0; i < nx; ++i) {
    reset(ny + 1);
    for (int j = 0; j <= ny; ++j) {
      const int f = mesh_.v_index(i, j);
      rhs[j] = w.v[f];
      if (v_slot[f] < 0) continue;
      const auto& st = v_faces_[v_slot[f]];
      couple(j, st.south, k * cell_mu(i, j - 1) / (dy * dy), true);
      couple(j, st.north, k * cell_mu(i, j) / (dy * dy), false);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    for (int j = 0; j <= ny; ++j) w.v[mesh_.v_index(i, j)] = rhs[j];
  }
}

void FlowSolver::project_in_place(FlowState& w, double dt_eff, double p_outlet) const {
  const int nx = mesh_.nx();
  const double dx = mesh_.dx();
  const double dy = mesh_.dy();
  const double to_q = dt_eff / model_.density;

  const std::vector<double> div = divergence(w, mesh_);
  std::vector<double> q(mesh_.cell_count(), 0.0);
  for (int c : mesh_.fluid_cells()) q[c] = w.p[c] * to_q;
  const double q_out = p_outlet * to_q;
  pressure_.solve(div, q_out, q);

  for (const auto& f : u_faces_) {
    w.u[f.index] -= (q[mesh_.cell_index(f.i, f.j)] - q[mesh_.cell_index(f.i - 1, f.j)]) / dx;
  }
  for (int j = 0; j < mesh_.ny(); ++j) {
    if (mesh_.u_kind(nx, j) != FaceKind::kOutlet) continue;
    w.u[mesh_.u_index(nx, j)] -= (q_out - q[mesh_.cell_index(nx - 1, j)]) / (0.5 * dx);
  }
  for (const auto& f : v_faces_) {
    w.v[f.index] -= (q[mesh_.cell_index(f.i, f.j)] - q[mesh_.cell_index(f.i, f.j - 1)]) / dy;
  }
  for (int c = 0; c < mesh_.cell_count(); ++c) w.p[c] = mesh_.is_fluid(c) ? q[c] / to_q : 0.0;
}

double FlowSolver::max_face_speed(const FlowState& s) const {
  double m = 0.0;
  for (double x : s.u) m = std::max(m, std::abs(x));
  for (double x : s.v) m = std::max(m, std::abs(x));
  return m;
}

double FlowSolver::max_inlet_speed(const InletSpec& inlet, double t) const {
  double m = 0.0;
  const double height = mesh_.shape().total_height;
  for (int j = 0; j < mesh_.ny(); ++j)
    if (mesh_.u_kind(0, j) == FaceKind::kInlet)
      m = std::max(m, std::abs(inlet.velocity(t, (j + 0.5) * mesh_.dy(), height)));
  return m;
}

double FlowSolver::stable_dt(const FlowState& state, const InletSpec& inlet, double t_next,
                             double cfl) const {
  const double h = std::min(mesh_.dx(), mesh_.dy());
  const double speed = std::max(max_face_speed(state), max_inlet_speed(inlet, t_next));
  double dt = std::numeric_limits<double>::infinity();
  if (speed > 0.0) dt = cfl * h / speed;
  const double nu = model_.nominal_viscosity() / model_.density;
  dt = std::min(dt, (cfl / options_.max_cfl) * options_.max_diffusion * h * h / nu);
  return dt;
}

FlowState FlowSolver::step(const FlowState& state, double dt, const InletSpec& inlet,
                           const OutletSpec& outlet) const {
  if (!state.matches(mesh_)) throw std::invalid_argument("flow state does not match the mesh");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
  const double t1 = state.t + dt;
  const double h = std::min(mesh_.dx(), mesh_.dy());
  const double speed = std::max(max_face_speed(state), max_inlet_speed(inlet, t1));
  const double cfl = speed * dt / h;
  if (!(cfl <= options_.max_cfl * (1.0 + 1e-12)))
    throw CflViolation("advective CFL " + std::to_string(cfl) + " exceeds " +
                       std::to_string(options_.max_cfl));
  const double fourier = model_.nominal_viscosity() / model_.density * dt / (h * h);
  if (fourier > options_.max_diffusion * (1.0 + 1e-12))
    throw CflViolation("diffusive number " + std::to_string(fourier) + " exceeds " +
                       std::to_string(options_.max_diffusion));

  const double p_out = outlet.pressure(t1);
  auto stage = [&](const FlowState& from) {
    FlowState w = predict(from, dt);
    apply_boundary(w, t1, inlet);
    if (model_.kind == Rheology::kCasson) {
      implicit_viscosity(w, from, dt);
      apply_boundary(w, t1, inlet);
    }
    return w;
  };

  FlowState first = stage(state);
  project_in_place(first, dt, p_out);
  if (options_.scheme == TimeScheme::kEuler) {
    first.t = t1;
    return first;
  }

  FlowState second = stage(first);
  for (std::size_t k = 0; k < second.u.size(); ++k) second.u[k] = 0.5 * (state.u[k] + second.u[k]);
  for (std::size_t k = 0; k < second.v.size(); ++k) second.v[k] = 0.5 * (state.v[k] + second.v[k]);
  apply_boundary(second, t1, inlet);
  second.p = first.p;
  // The averaged update carries half of the second stage's pressure impulse.
  for (double& p : second.p) p *= 0.5;
  project_in_place(second, 0.5 * dt, p_out);
  second.t = t1;
  return second;
}

FlowState FlowSolver::advance(const FlowState& state, double duration, const InletSpec& inlet,
                              const OutletSpec& outlet) const {
  if (!(duration > 0.0)) throw std::invalid_argument("advance duration must be positive");
  const double t_end = state.t + duration;
  FlowState x = state;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (t_end - x.t > eps) {
    const double remaining = t_end - x.t;
    const double h = stable_dt(x, inlet, t_end, options_.target_cfl);
    const double n = std::max(1.0, std::ceil(remaining / h - 1e-9));
    x = step(x, remaining / n, inlet, outlet);
  }
  x.t = t_end;
  return x;
}

FlowState FlowSolver::project(const FlowState& state, double dt, const OutletSpec& outlet) const {
  FlowState w = state;
  project_in_place(w, dt, outlet.pressure(state.t));
  return w;
}

FlowState step(const FlowState& state, double dt, const Mesh& mesh, const FluidModel& model,
               const InletSpec& inlet, const OutletSpec& outlet) {
  return FlowSolver(mesh, model).step(state, dt, inlet, outlet);
}

std::vector<double> divergence(const FlowState& state, const Mesh& mesh) {
  std::vector<double> div(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) {
    const int i = c % mesh.nx();
    const int j = c / mesh.nx();
    div[c] = (state.u[mesh.u_index(i + 1, j)] - state.u[mesh.u_index(i, j)]) / mesh.dx() +
             (state.v[mesh.v_index(i, j + 1)] - state.v[mesh.v_index(i, j)]) / mesh.dy();
  }
  return div;
}

std::vector<double> cell_velocity_u(const FlowState& state, const Mesh& mesh) {
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) {
    const int i = c % mesh.nx();
    const int j = c / mesh.nx();
    out[c] = 0.5 * (state.u[mesh.u_index(i, j)] + state.u[mesh.u_index(i + 1, j)]);
  }
  return out;
}

std::vector<double> cell_velocity_v(const FlowState& state, const Mesh& mesh) {
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) {
    const int i = c % mesh.nx();
    const int j = c / mesh.nx();
    out[c] = 0.5 * (state.v[mesh.v_index(i, j)] + state.v[mesh.v_index(i, j + 1)]);
  }
  return out;
}

std::vector<double> shear_rate(const FlowState& state, const Mesh& mesh) {
  const auto uc = cell_velocity_u(state, mesh);
  const auto vc = cell_velocity_v(state, mesh);
  const double dx = mesh.dx();
  const double dy = mesh.dy();
  std::vector<double> rate(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) {
    const int i = c % mesh.nx();
    const int j = c / mesh.nx();
    const double dudx = (state.u[mesh.u_index(i + 1, j)] - state.u[mesh.u_index(i, j)]) / dx;
    const double dvdy = (state.v[mesh.v_index(i, j + 1)] - state.v[mesh.v_index(i, j)]) / dy;

    // Cross derivatives: neighbour center values, or the wall value 0 half a
    // cell away. At the outlet the gradient is one-sided.
    auto sample_y = [&](int nj) -> std::pair<double, double> {
      if (mesh.is_fluid(i, nj)) return {uc[mesh.cell_index(i, nj)], dy};
      return {0.0, 0.5 * dy};
    };
    auto sample_x = [&](int ni) -> std::pair<double, double> {
      if (mesh.is_fluid(ni, j)) return {vc[mesh.cell_index(ni, j)], dx};
      if (ni >= mesh.nx()) return {vc[c], 0.0};
      return {0.0, 0.5 * dx};
    };
    const auto [us, ds] = sample_y(j - 1);
    const auto [un, dn] = sample_y(j + 1);
    const auto [vw, dw] = sample_x(i - 1);
    const auto [ve, de] = sample_x(i + 1);
    const double dudy = two_sided(us, ds, un, dn);
    const double dvdx = two_sided(vw, dw, ve, de);

    const double d12 = 0.5 * (dudy + dvdx);
    const double contraction = dudx * dudx + dvdy * dvdy + 2.0 * d12 * d12;
    rate[c] = std::sqrt(0.5 * contraction);
  }
  return rate;
}

std::vector<WallShear> wall_shear_stress(const FlowState& state, const Mesh& mesh,
                                         const FluidModel& model) {
  const auto uc = cell_velocity_u(state, mesh);
  const auto vc = cell_velocity_v(state, mesh);
  const auto rate = shear_rate(state, mesh);
  std::vector<WallShear> out;
  for (const auto& face : mesh.boundary_faces()) {
    if (face.patch != Patch::kWall) continue;
    const double mu = effective_viscosity(rate[face.cell], model);
    const bool horizontal = face.normal == Axis::kY;
    const double tangential = horizontal ? uc[face.cell] : vc[face.cell];
    const double distance = 0.5 * (horizontal ? mesh.dy() : mesh.dx());
    out.push_back({face, mu * std::abs(tangential) / distance});
  }
  return out;
}

std::vector<double> cell_wall_shear(const FlowState& state, const Mesh& mesh,
                                    const FluidModel& model) {
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (const auto& w : wall_shear_stress(state, mesh, model))
    out[w.face.cell] = std::max(out[w.face.cell], w.tau);
  return out;
}

double inlet_flux(const FlowState& state, const Mesh& mesh) {
  double flux = 0.0;
  for (int j = 0; j < mesh.ny(); ++j)
    if (mesh.u_kind(0, j) == FaceKind::kInlet) flux += state.u[mesh.u_index(0, j)] * mesh.dy();
  return flux;
}

double outlet_flux(const FlowState& state, const Mesh& mesh) {
  double flux = 0.0;
  for (int j = 0; j < mesh.ny(); ++j)
    if (mesh.u_kind(mesh.nx(), j) == FaceKind::kOutlet)
      flux += state.u[mesh.u_index(mesh.nx(), j)] * mesh.dy();
  return flux;
}

}  // namespace hemoda
