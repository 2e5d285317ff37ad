#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hemoda/errors.hpp"
#include "hemoda/flow_solver.hpp"
#include "hemoda/pressure.hpp"
#include "poiseuille.hpp"

using namespace hemoda;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Fills every face from analytic u(x, y) and v(x, y).
template <class U, class V>
FlowState manufactured(const Mesh& mesh, U u, V v) {
  FlowState s = FlowState::zeros(mesh);
  for (int j = 0; j < mesh.ny(); ++j)
    for (int i = 0; i <= mesh.nx(); ++i)
      s.u[mesh.u_index(i, j)] = u(i * mesh.dx(), (j + 0.5) * mesh.dy());
  for (int j = 0; j <= mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i)
      s.v[mesh.v_index(i, j)] = v((i + 0.5) * mesh.dx(), j * mesh.dy());
  return s;
}

double wave(double t) { return 0.05 + 0.25 * std::exp(-std::pow((t - 0.24) / 0.09, 2)); }

}  // namespace

TEST(FlowSolver, NullDynamicsStayZero) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const FlowState z = FlowState::zeros(mesh);
  const FlowState s =
      step(z, 1e-3, mesh, FluidModel::newtonian(), InletSpec::constant(0.0), OutletSpec{});
  EXPECT_EQ(max_abs(s.u), 0.0);
  EXPECT_EQ(max_abs(s.v), 0.0);
  EXPECT_EQ(max_abs(s.p), 0.0);
  EXPECT_DOUBLE_EQ(s.t, 1e-3);
}

TEST(FlowSolver, PoiseuilleCenterlineAndWallShear) {
  const auto r = oracle::run_poiseuille();
  EXPECT_NEAR(r.centerline, 0.15, 0.02 * 0.15);
  EXPECT_NEAR(r.wall_shear, 6 * 0.0035 * 0.1 / 0.016, 0.05 * 0.13125);
  EXPECT_LE(max_abs(divergence(r.state, r.mesh)), 1e-8);

  // Shear rate vanishes on the axis and peaks next to the walls.
  const auto g = shear_rate(r.state, r.mesh);
  const int ny = r.mesh.ny();
  std::vector<double> column(ny);
  for (int j = 0; j < ny; ++j) column[j] = g[r.mesh.cell_index(r.column, j)];
  const auto top = std::max_element(column.begin(), column.end()) - column.begin();
  const auto low = std::min_element(column.begin(), column.end()) - column.begin();
  EXPECT_TRUE(top == 0 || top == ny - 1);
  EXPECT_TRUE(low == ny / 2 - 1 || low == ny / 2);
}

TEST(FlowSolver, SensorAveragesMatchThePoiseuilleProfile) {
  const auto r = oracle::run_poiseuille(0.1, 0.8, 0.016, 80, 20);
  const Mesh coarse(VesselShape::plain_channel(0.8, 0.016), 40, 10);
  SensorSet sensors;
  for (int j = 1; j < 9; ++j) sensors.sensor_cells.push_back(coarse.cell_index(30, j));
  const auto got = interpolate_to_sensors(cell_velocity_u(r.state, r.mesh), sensors, r.mesh, coarse);
  for (std::size_t k = 0; k < got.size(); ++k) {
    const double y = coarse.cell_center(sensors.sensor_cells[k]).y;
    const double exact = 0.15 * (1.0 - std::pow((y - 0.008) / 0.008, 2));
    EXPECT_NEAR(got[k], exact, 0.02 * exact);
  }
}

TEST(FlowSolver, PulsatileMassBalance) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  for (bool casson : {false, true}) {
    SolverOptions o;
    if (casson) o.scheme = TimeScheme::kHeun;
    const FlowSolver solver(mesh, casson ? FluidModel::casson() : FluidModel::newtonian(), o);
    const InletSpec inlet = InletSpec::parabolic(wave, 0.008);
    FlowState s = FlowState::zeros(mesh);
    for (int k = 0; k < 30; ++k) {
      s = solver.advance(s, 0.01, inlet, OutletSpec{});
      const double in = inlet_flux(s, mesh);
      EXPECT_LE(std::abs(in - outlet_flux(s, mesh)), 1e-8 * in);
      EXPECT_LE(max_abs(divergence(s, mesh)), 1e-8);
    }
  }
}

TEST(FlowSolver, CflViolationIsReported) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  EXPECT_THROW(step(FlowState::zeros(mesh), 0.1, mesh, FluidModel::newtonian(),
                    InletSpec::constant(1.0), OutletSpec{}),
               CflViolation);
}

TEST(FlowSolver, ProjectionIsIdempotent) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const FlowSolver solver(mesh, FluidModel::newtonian());
  FlowState s = manufactured(
      mesh, [](double x, double y) { return std::sin(90 * x) * y * 20; },
      [](double x, double y) { return std::cos(300 * y) * x; });
  solver.apply_boundary(s, 0.0, InletSpec::constant(0.05));
  const FlowState once = solver.project(s, 1e-3, OutletSpec{});
  EXPECT_LE(max_abs(divergence(once, mesh)), 1e-8);
  const FlowState twice = solver.project(once, 1e-3, OutletSpec{});
  for (std::size_t f = 0; f < once.u.size(); ++f) EXPECT_NEAR(twice.u[f], once.u[f], 1e-12);
  for (std::size_t f = 0; f < once.v.size(); ++f) EXPECT_NEAR(twice.v[f], once.v[f], 1e-12);
}

TEST(FlowSolver, RelaxationAgreesWithCholesky) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  std::vector<double> div(mesh.cell_count(), 0.0);
  for (int c : mesh.fluid_cells()) div[c] = std::sin(0.1 * c);
  std::vector<double> a(mesh.cell_count(), 0.0), b(mesh.cell_count(), 0.0);
  PressureSolver(mesh, {PoissonMethod::kCholesky, 1e-10, 50000}).solve(div, 0.0, a);
  PressureSolver(mesh, {PoissonMethod::kRelaxation, 1e-10, 200000}).solve(div, 0.0, b);
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  for (int c : mesh.fluid_cells()) EXPECT_NEAR(a[c], b[c], 1e-6 * scale);
}

TEST(Diagnostics, DivergenceOfManufacturedFields) {
  const Mesh mesh(VesselShape::plain_channel(0.08, 0.016), 20, 8);
  const auto c = manufactured(mesh, [](double, double) { return 0.3; },
                              [](double, double) { return -0.1; });
  for (double d : divergence(c, mesh)) EXPECT_EQ(d, 0.0);
  const auto s = manufactured(mesh, [](double x, double) { return x; },
                              [](double, double y) { return -y; });
  EXPECT_LE(max_abs(divergence(s, mesh)), 1e-12);
}

TEST(Diagnostics, ShearRateOfUniformAndPureShear) {
  const Mesh mesh(VesselShape::plain_channel(0.08, 0.016), 20, 8);
  const auto uniform = manufactured(mesh, [](double, double) { return 0.2; },
                                    [](double, double) { return 0.0; });
  const double k = 3.0;
  const auto shear = manufactured(mesh, [k](double, double y) { return k * y; },
                                  [](double, double) { return 0.0; });
  const auto g0 = shear_rate(uniform, mesh);
  const auto g1 = shear_rate(shear, mesh);
  // Wall rows see the no-slip value, which neither field satisfies.
  for (int j = 1; j + 1 < mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i) {
      EXPECT_NEAR(g0[mesh.cell_index(i, j)], 0.0, 1e-12);
      EXPECT_NEAR(g1[mesh.cell_index(i, j)], k / 2, 1e-9);
    }
}

TEST(Diagnostics, WallShearIsLinearInViscosity) {
  const auto r = oracle::run_poiseuille(0.1, 0.4, 0.016, 20, 10);
  const auto one = wall_shear_stress(r.state, r.mesh, FluidModel::newtonian(0.0035));
  const auto two = wall_shear_stress(r.state, r.mesh, FluidModel::newtonian(0.007));
  ASSERT_EQ(one.size(), two.size());
  for (std::size_t f = 0; f < one.size(); ++f) EXPECT_EQ(two[f].tau, 2.0 * one[f].tau);
  for (const auto& w : wall_shear_stress(FlowState::zeros(r.mesh), r.mesh, FluidModel::newtonian()))
    EXPECT_EQ(w.tau, 0.0);
}

TEST(Inlet, TimeSeriesInterpolates) {
  const auto in = InletSpec::time_series({{0.0, 0.0}, {1.0, 2.0}});
  EXPECT_DOUBLE_EQ(in.amplitude(0.25), 0.5);
  EXPECT_DOUBLE_EQ(in.velocity(0.5, 0.001, 0.016), 1.0);
}
