#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "hemoda/config.hpp"
#include "hemoda/errors.hpp"
#include "hemoda/io.hpp"
#include "hemoda/state_layout.hpp"

using namespace hemoda;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hemoda_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string message_of(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  EXPECT_EQ(parse_config_text(""), default_config());
  EXPECT_EQ(parse_config_text("{}"), default_config());
  const auto path = scratch("empty.json");
  std::ofstream(path) << "";
  EXPECT_EQ(parse_config(path), default_config());
}

TEST(Config, ScenarioSelectsItsDefaults) {
  const auto c = parse_config_text(R"({"scenario": "timespace", "observation_span": 4})");
  EXPECT_EQ(c.scenario.kind, ScenarioKind::kTimeSpaceDependent);
  EXPECT_EQ(c.scenario.observation_span, 4);
  EXPECT_EQ(c.scenario.prior, Scenario::defaults(ScenarioKind::kTimeSpaceDependent).prior);
}

TEST(Config, InvalidValuesAreRejected) {
  EXPECT_NE(message_of(R"({"observation_span": 0})").find("observation_span"), std::string::npos);
  EXPECT_NE(message_of(R"({"mesh": {"fine": [20, 64]}})").find("mesh.fine"), std::string::npos);
  EXPECT_NE(message_of(R"({"scenario": "steady"})"), "");
  EXPECT_NE(message_of(R"({"dt": "fast"})").find("dt"), std::string::npos);
  EXPECT_NE(message_of("{"), "");
}

TEST(Config, UnknownKeyIsNamed) {
  EXPECT_NE(message_of(R"({"observaton_span": 2})").find("observaton_span"), std::string::npos);
  EXPECT_NE(message_of(R"({"noise": {"proces": 1}})").find("noise.proces"), std::string::npos);
}

TEST(Config, SerializeRoundTrip) {
  RunConfig c = default_config(ScenarioKind::kTimeDependent);
  c.scenario.observation_span = 5;
  c.scenario.noise.parameter = 2e-5;
  c.sensor_count.reset();
  c.seed_truth = 99;
  c.threads = 4;
  c.output = "somewhere/else";
  EXPECT_EQ(parse_config_text(serialize_config(c)), c);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23})
    EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(phase_label(0.24), "0.24");
}

TEST(Io, TruthCsvRoundTrip) {
  TruthRecord t;
  for (int k = 0; k < 3; ++k) {
    t.times.push_back(0.01 * k);
    t.parameter.push_back(0.02);
    t.probe_u.push_back(0.1 * k);
    t.probe_v.push_back(-0.01 * k);
    t.probe_p.push_back(1.0 / 3.0);
    t.sensors.push_back({0.1 + k, 0.2, 0.3, 0.4});
    t.stabilization.push_back({1.0 / 7.0, 0.5});
  }
  const auto path = scratch("truth.csv");
  write_truth_csv(path, t);
  const auto back = read_truth_csv(path);
  EXPECT_EQ(back.times, t.times);
  EXPECT_EQ(back.parameter, t.parameter);
  EXPECT_EQ(back.probe_u, t.probe_u);
  EXPECT_EQ(back.probe_p, t.probe_p);
  EXPECT_EQ(back.sensors, t.sensors);
  EXPECT_EQ(back.stabilization, t.stabilization);
}

TEST(Io, MetricsRoundTrip) {
  AssimilationRecord rec;
  rec.error.mre_percent = 1.25;
  rec.error.n_steps = 100;
  const auto path = scratch("metrics.txt");
  write_metrics(path, rec, {{"scenario", "constant"}});
  const auto kv = read_metrics(path);
  ASSERT_EQ(kv.size(), 5u);
  EXPECT_EQ(kv[0].first, "mre_percent");
  EXPECT_EQ(std::stod(kv[0].second), 1.25);
  EXPECT_EQ(kv[4], (std::pair<std::string, std::string>{"scenario", "constant"}));
}

TEST(Io, VtkHasOneFlagPerCell) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const auto path = scratch("mesh.vtk");
  write_mesh_vtk(path, mesh);
  std::ifstream in(path);
  std::string line;
  bool found = false;
  while (std::getline(in, line))
    if (line == "CELL_DATA 640") found = true;
  EXPECT_TRUE(found);
}

TEST(StateLayout, PackUnpackRoundTrip) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const StateLayout layout(mesh);
  FlowState s = FlowState::zeros(mesh);
  for (int j = 0; j < mesh.ny(); ++j)
    for (int i = 0; i <= mesh.nx(); ++i) {
      const auto k = mesh.u_kind(i, j);
      if (k == FaceKind::kActive || k == FaceKind::kOutlet) s.u[mesh.u_index(i, j)] = 0.01 * i + j;
    }
  for (int j = 0; j <= mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i)
      if (mesh.v_kind(i, j) == FaceKind::kActive) s.v[mesh.v_index(i, j)] = -0.02 * j + i;
  for (int c : mesh.fluid_cells()) s.p[c] = 0.5 * c;
  const auto packed = layout.pack(s);
  ASSERT_EQ(static_cast<int>(packed.size()), layout.size());
  EXPECT_EQ(layout.unpack(packed, 0.0), s);
}

TEST(StateLayout, SensorRowsEvaluateCellVelocities) {
  const Mesh mesh = build_vessel_mesh(VesselShape{}, 40, 16);
  const StateLayout layout(mesh);
  FlowState s = FlowState::zeros(mesh);
  for (std::size_t f = 0; f < s.u.size(); ++f) s.u[f] = 0.001 * static_cast<double>(f % 17);
  for (std::size_t f = 0; f < s.v.size(); ++f) s.v[f] = 0.002 * static_cast<double>(f % 13);
  const double parameter = 0.3;
  // Prescribed faces: inlet carries the parameter, walls and dead faces are zero.
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i <= mesh.nx(); ++i) {
      const auto k = mesh.u_kind(i, j);
      if (k == FaceKind::kInlet) s.u[mesh.u_index(i, j)] = parameter;
      if (k == FaceKind::kWall || k == FaceKind::kDead) s.u[mesh.u_index(i, j)] = 0.0;
    }
  }
  for (int j = 0; j <= mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i)
      if (mesh.v_kind(i, j) != FaceKind::kActive) s.v[mesh.v_index(i, j)] = 0.0;

  std::vector<int> cells(mesh.fluid_cells().begin(), mesh.fluid_cells().end());
  const auto h = sensor_observation(layout, 1, cells, [](double) { return 1.0; });
  Eigen::VectorXd psi(1 + layout.size());
  psi[0] = parameter;
  const auto packed = layout.pack(s);
  for (int k = 0; k < layout.size(); ++k) psi[1 + k] = packed[k];
  const Eigen::VectorXd y = h.apply(psi);
  const auto uc = cell_velocity_u(s, mesh);
  const auto vc = cell_velocity_v(s, mesh);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    EXPECT_NEAR(y[2 * k], uc[cells[k]], 1e-15);
    EXPECT_NEAR(y[2 * k + 1], vc[cells[k]], 1e-15);
  }
}
