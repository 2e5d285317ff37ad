#pragma once

#include <span>
#include <vector>

#include "hemoda/flow_state.hpp"
#include "hemoda/geometry.hpp"
#include "hemoda/pressure.hpp"
#include "hemoda/rheology.hpp"

namespace hemoda {

enum class TimeScheme {
  kEuler,  // one predictor + projection per step
  kHeun,   // two-stage strong-stability-preserving Runge-Kutta
};

struct SolverOptions {
  PoissonOptions poisson;
  TimeScheme scheme = TimeScheme::kEuler;
  double max_cfl = 0.5;        // max|U| dt / min(dx, dy)
  double max_diffusion = 0.25; // nu dt / min(dx, dy)^2, explicit viscosity only
  double target_cfl = 0.4;     // used by advance() when choosing substeps
};

/// Chorin projection on the staggered grid of a Mesh. Convection is first-order
/// upwind; Newtonian viscosity is explicit central, Casson viscosity is
/// integrated implicitly with directional splitting because the regularized
/// law is stiff at low shear. The solver is immutable after construction and
/// step() may be called concurrently.
class FlowSolver {
 public:
  FlowSolver(const Mesh& mesh, const FluidModel& model, SolverOptions options = {});

  /// One step to t + dt. Throws CflViolation when dt breaks the stability
  /// bounds and PoissonNonConvergence when the pressure solve fails.
  FlowState step(const FlowState& state, double dt, const InletSpec& inlet,
                 const OutletSpec& outlet) const;

  /// Advances by `duration` using the fewest equal substeps that satisfy the
  /// target CFL number. The result time is exactly state.t + duration.
  FlowState advance(const FlowState& state, double duration, const InletSpec& inlet,
                    const OutletSpec& outlet) const;

  /// Largest dt satisfying both stability bounds for the current velocities and
  /// the inlet velocity at `t_next`, scaled by `cfl` / max_cfl.
  double stable_dt(const FlowState& state, const InletSpec& inlet, double t_next,
                   double cfl) const;

  /// Pressure projection of an arbitrary face field with the given outlet
  /// pressure; boundary faces are left as they are.
  FlowState project(const FlowState& state, double dt, const OutletSpec& outlet) const;

  /// Writes inlet, outlet, wall and dead face velocities for time t.
  void apply_boundary(FlowState& s, double t, const InletSpec& inlet) const;

  const Mesh& mesh() const { return mesh_; }
  const FluidModel& model() const { return model_; }
  const SolverOptions& options() const { return options_; }

 private:
  enum class Link : unsigned char { kValue, kMirror, kZeroGradient };
  struct Neighbour {
    Link link = Link::kValue;
    int index = -1;
  };
  struct FaceStencil {
    int index;               // face index in its own array
    int i;
    int j;
    Neighbour west, east, south, north;
    int cross[4];            // the four faces of the other array around this one
  };

  void build_stencils();
  // Predictor for one stage: convection and viscosity over dt from `s`.
  FlowState predict(const FlowState& s, double dt) const;
  void implicit_viscosity(FlowState& w, const FlowState& from, double dt) const;
  void project_in_place(FlowState& w, double dt_eff, double p_outlet) const;
  double max_face_speed(const FlowState& s) const;
  double max_inlet_speed(const InletSpec& inlet, double t) const;

  Mesh mesh_;
  FluidModel model_;
  SolverOptions options_;
  PressureSolver pressure_;
  std::vector<FaceStencil> u_faces_;
  std::vector<FaceStencil> v_faces_;
};

/// Convenience wrapper building a solver for a single step.
FlowState step(const FlowState& state, double dt, const Mesh& mesh, const FluidModel& model,
               const InletSpec& inlet, const OutletSpec& outlet);

/// Staggered face-flux divergence per cell (1/s); solid cells hold 0.
std::vector<double> divergence(const FlowState& state, const Mesh& mesh);

/// Shear rate sqrt(0.5 D_ij D_ij) per cell (1/s); solid cells hold 0. Normal
/// strain rates use the cell's own faces, cross derivatives use centered
/// differences of center-interpolated velocities, one-sided towards walls.
std::vector<double> shear_rate(const FlowState& state, const Mesh& mesh);

/// Cell-centered velocity components (solid cells hold 0).
std::vector<double> cell_velocity_u(const FlowState& state, const Mesh& mesh);
std::vector<double> cell_velocity_v(const FlowState& state, const Mesh& mesh);

struct WallShear {
  BoundaryFace face;
  double tau;  // Pa, magnitude
};

/// Wall shear stress on every wall-patch face: the active viscosity at the
/// adjacent cell's shear rate times the tangential cell-center velocity over
/// the half-cell wall distance.
std::vector<WallShear> wall_shear_stress(const FlowState& state, const Mesh& mesh,
                                         const FluidModel& model);

/// Largest wall shear magnitude on each cell's wall faces (0 elsewhere).
std::vector<double> cell_wall_shear(const FlowState& state, const Mesh& mesh,
                                    const FluidModel& model);

double inlet_flux(const FlowState& state, const Mesh& mesh);
double outlet_flux(const FlowState& state, const Mesh& mesh);

}  // namespace hemoda
