#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hemoda/ensisf.hpp"
#include "hemoda/flow_solver.hpp"
#include "hemoda/flow_state.hpp"
#include "hemoda/geometry.hpp"
#include "hemoda/metrics.hpp"
#include "hemoda/rheology.hpp"

namespace hemoda {

enum class ScenarioKind { kConstant, kTimeDependent, kTimeSpaceDependent };

/// "constant", "time" and "timespace".
std::string_view scenario_name(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

/// Systolic bump on a diastolic plateau, periodic in `period`.
struct Waveform {
  double base = 0.05;
  double amplitude = 0.25;
  double width = 0.09;
  double peak = 0.24;  // phase of the systolic maximum
  double period = 1.0;

  double operator()(double t) const;
  friend bool operator==(const Waveform&, const Waveform&) = default;
};

double cardiac_waveform(double t, double period);

/// Phases (t / T) at which field snapshots are kept.
inline constexpr std::array<double, 5> kSnapshotPhases{0.24, 0.4, 0.6, 0.74, 0.96};

/// Probe point for state plots; it lies in the divider, so the nearest fluid
/// cell is used.
inline constexpr Point2 kProbePoint{0.035147, 0.007069};

struct Scenario {
  ScenarioKind kind = ScenarioKind::kConstant;
  double dt = 0.01;
  double t_final = 1.0;
  int observation_span = 2;
  int ensemble_size = 80;
  PriorSpec prior;
  NoiseSpec noise;
  UpdateConfig update;
  double constant_truth = 0.02;
  Waveform waveform;
  FluidModel truth_model = FluidModel::casson();
  FluidModel forward_model = FluidModel::newtonian();
  double outlet_pressure = 0.0;

  static Scenario defaults(ScenarioKind kind);

  int steps() const;
  void validate() const;
  double true_parameter(double t) const;
  InletSpec true_inlet(double vessel_height) const;
  InletSpec member_inlet(double parameter, double vessel_height) const;
  /// Ratio of the mean inlet velocity over the inlet faces to the parameter.
  double parameter_scale(const Mesh& mesh) const;
  bool observed(int step) const {
    return step >= observation_span && step % observation_span == 0;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Coarse and fine meshes of one vessel with the coarse sensor layout.
struct TwinSetup {
  Mesh coarse;
  Mesh fine;
  SensorSet sensors;
  int probe_cell;
};

TwinSetup make_setup(const VesselShape& shape, std::array<int, 2> coarse, std::array<int, 2> fine,
                     double sensor_fraction, std::optional<int> sensor_count, std::uint64_t seed);

struct TruthRecord {
  std::vector<double> times;
  std::vector<double> parameter;
  std::vector<std::vector<double>> sensors;        // (u, v) per sensor cell
  std::vector<std::vector<double>> stabilization;  // (u, v) per stabilization cell
  std::vector<double> probe_u;
  std::vector<double> probe_v;
  std::vector<double> probe_p;
  std::vector<std::pair<double, FlowState>> snapshots;  // (phase, fine state)

  int steps() const { return static_cast<int>(times.size()) - 1; }
};

inline SolverOptions truth_solver_options() {
  SolverOptions o;
  o.scheme = TimeScheme::kHeun;
  return o;
}

/// Steps the fine solver from rest with the true inlet and records the
/// noiseless coarse-cell averages at every step.
TruthRecord generate_truth(const Scenario& scenario, const TwinSetup& setup,
                           const SolverOptions& options = truth_solver_options());

struct Observations {
  std::vector<std::vector<double>> sensors;
  std::vector<std::vector<double>> stabilization;
};

/// Adds N(0, R) noise to every recorded sensor and stabilization value.
Observations make_observations(const TruthRecord& truth, const NoiseSpec& noise,
                               std::uint64_t seed);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  bool observed = false;
  double true_parameter = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double member_min = 0.0;
  double member_max = 0.0;
  double bound_lo = 0.0;  // constraint bounds, NaN when no constraint was applied
  double bound_hi = 0.0;
  double probe_true = 0.0;
  double probe_mean = 0.0;
  double probe_lo = 0.0;
  double probe_hi = 0.0;
  double sensor_rmse = 0.0;  // ensemble-mean prediction against noiseless truth
};

struct AssimilationRecord {
  std::vector<StepRecord> steps;                     // k = 0..N, k = 0 is the prior
  ErrorReport error;                                 // over k = 1..N
  double sensor_rmse = 0.0;                          // RMS over k = 1..N
  std::optional<double> open_loop_rmse;              // same ensemble, no updates
  std::vector<std::pair<double, FlowState>> recon;   // (phase, coarse mean state)
  std::optional<JointEnsemble> final_ensemble;
};

struct AssimilationOptions {
  int threads = 1;
  bool open_loop = true;
  bool keep_final_ensemble = false;
};

/// Runs the filter on the coarse mesh against `observations`.
AssimilationRecord run_assimilation(const Scenario& scenario, const TwinSetup& setup,
                                    const Observations& observations, const TruthRecord& truth,
                                    std::uint64_t seed, const AssimilationOptions& options = {});

}  // namespace hemoda
