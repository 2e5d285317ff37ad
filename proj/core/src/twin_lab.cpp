#include "hemoda/twin_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hemoda/errors.hpp"
#include "hemoda/random.hpp"
#include "hemoda/state_layout.hpp"

namespace hemoda {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int phase_step(double phase, const Scenario& s) {
  return static_cast<int>(std::lround(phase * s.t_final / s.dt));
}

std::vector<double> interleave(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(2 * a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.push_back(a[k]);
    out.push_back(b[k]);
  }
  return out;
}

}  // namespace

std::string_view scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kConstant:
      return "constant";
    case ScenarioKind::kTimeDependent:
      return "time";
    case ScenarioKind::kTimeSpaceDependent:
      return "timespace";
  }
  return "constant";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "constant") return ScenarioKind::kConstant;
  if (name == "time") return ScenarioKind::kTimeDependent;
  if (name == "timespace") return ScenarioKind::kTimeSpaceDependent;
  throw std::invalid_argument("unknown scenario '" + std::string(name) +
                              "' (expected constant, time or timespace)");
}

double Waveform::operator()(double t) const {
  double phase = std::fmod(t / period, 1.0);
  if (phase < 0.0) phase += 1.0;
  const double x = (phase - peak) / width;
  return base + amplitude * std::exp(-x * x);
}

double cardiac_waveform(double t, double period) {
  Waveform w;
  w.period = period;
  return w(t);
}

Scenario Scenario::defaults(ScenarioKind kind) {
  Scenario s;
  s.kind = kind;
  if (kind == ScenarioKind::kConstant) {
    s.prior = {0.01, 1e-10, 0.015, 4e-6};
    s.noise = {1e-8, 1e-10};
  } else {
    s.prior = {0.1, 1e-4, 0.1, 4e-4};
    s.noise = {1e-4, 1e-8, 3e-5};
  }
  s.waveform.period = s.t_final;
  return s;
}

int Scenario::steps() const {
  const double n = t_final / dt;
  const long r = std::lround(n);
  if (r < 1 || std::abs(n - static_cast<double>(r)) > 1e-9 * n)
    throw std::invalid_argument("t_final must be a whole number of time steps");
  return static_cast<int>(r);
}

void Scenario::validate() const {
  if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("dt and t_final must be positive");
  steps();
  if (observation_span < 1) throw std::invalid_argument("observation_span must be at least 1");
  if (ensemble_size < 2) throw std::invalid_argument("ensemble_size must be at least 2");
  prior.validate();
  noise.validate();
  update.validate();
  truth_model.validate();
  forward_model.validate();
  if (!std::isfinite(constant_truth) || constant_truth < 0.0)
    throw std::invalid_argument("constant truth must be finite and non-negative");
  if (!(waveform.period > 0.0) || !(waveform.width > 0.0) || !(waveform.base > 0.0) ||
      waveform.amplitude < 0.0)
    throw std::invalid_argument("waveform needs positive base, width and period");
  if (!std::isfinite(outlet_pressure)) throw std::invalid_argument("outlet pressure must be finite");
}

double Scenario::true_parameter(double t) const {
  return kind == ScenarioKind::kConstant ? constant_truth : waveform(t);
}

InletSpec Scenario::true_inlet(double vessel_height) const {
  switch (kind) {
    case ScenarioKind::kConstant:
      return InletSpec::constant(constant_truth);
    case ScenarioKind::kTimeDependent:
      return InletSpec::time_function(waveform);
    case ScenarioKind::kTimeSpaceDependent:
      return InletSpec::parabolic(waveform, 0.5 * vessel_height);
  }
  return InletSpec::constant(constant_truth);
}

InletSpec Scenario::member_inlet(double parameter, double vessel_height) const {
  auto held = [parameter](double) { return parameter; };
  if (kind == ScenarioKind::kTimeSpaceDependent)
    return InletSpec::parabolic(held, 0.5 * vessel_height);
  return InletSpec::time_function(held);
}

double Scenario::parameter_scale(const Mesh& mesh) const {
  const InletSpec unit = member_inlet(1.0, mesh.shape().total_height);
  double sum = 0.0;
  int n = 0;
  for (int j = 0; j < mesh.ny(); ++j)
    if (mesh.u_kind(0, j) == FaceKind::kInlet) {
      sum += unit.shape((j + 0.5) * mesh.dy(), mesh.shape().total_height);
      ++n;
    }
  if (n == 0) throw std::invalid_argument("mesh has no inlet faces");
  return sum / n;
}

TwinSetup make_setup(const VesselShape& shape, std::array<int, 2> coarse, std::array<int, 2> fine,
                     double sensor_fraction, std::optional<int> sensor_count, std::uint64_t seed) {
  if (fine[0] < coarse[0] || fine[1] < coarse[1])
    throw std::invalid_argument("fine resolution must not be below the coarse resolution");
  Mesh c = build_vessel_mesh(shape, coarse[0], coarse[1]);
  Mesh f = build_vessel_mesh(shape, fine[0], fine[1]);
  SensorSet sensors = select_sensors(c, sensor_fraction, seed, sensor_count);
  const int probe = c.nearest_fluid_cell(kProbePoint);
  return TwinSetup{std::move(c), std::move(f), std::move(sensors), probe};
}

TruthRecord generate_truth(const Scenario& scenario, const TwinSetup& setup,
                           const SolverOptions& options) {
  scenario.validate();
  const int n = scenario.steps();
  const Mesh& fine = setup.fine;
  const FlowSolver solver(fine, scenario.truth_model, options);
  const InletSpec inlet = scenario.true_inlet(fine.shape().total_height);
  const OutletSpec outlet = OutletSpec::constant(scenario.outlet_pressure);

  const CellAverager at_sensors(fine, setup.coarse, setup.sensors.sensor_cells);
  const CellAverager at_stab(fine, setup.coarse, setup.sensors.stabilization_cells);
  const std::vector<int> probe_cells{setup.probe_cell};
  const CellAverager at_probe(fine, setup.coarse, probe_cells);

  std::vector<int> snapshot_steps;
  for (double phase : kSnapshotPhases) snapshot_steps.push_back(phase_step(phase, scenario));

  TruthRecord rec;
  FlowState s = FlowState::zeros(fine, 0.0);
  for (int k = 0; k <= n; ++k) {
    if (k > 0) s = solver.advance(s, scenario.dt, inlet, outlet);
    const double t = k * scenario.dt;
    s.t = t;
    const auto uc = cell_velocity_u(s, fine);
    const auto vc = cell_velocity_v(s, fine);
    rec.times.push_back(t);
    rec.parameter.push_back(scenario.true_parameter(t));
    rec.sensors.push_back(interleave(at_sensors.apply(uc), at_sensors.apply(vc)));
    rec.stabilization.push_back(interleave(at_stab.apply(uc), at_stab.apply(vc)));
    rec.probe_u.push_back(at_probe.apply(uc)[0]);
    rec.probe_v.push_back(at_probe.apply(vc)[0]);
    rec.probe_p.push_back(at_probe.apply(s.p)[0]);
    for (std::size_t p = 0; p < snapshot_steps.size(); ++p)
      if (snapshot_steps[p] == k) rec.snapshots.emplace_back(kSnapshotPhases[p], s);
  }
  return rec;
}

Observations make_observations(const TruthRecord& truth, const NoiseSpec& noise,
                               std::uint64_t seed) {
  noise.validate();
  const double sr = std::sqrt(noise.measurement);
  Observations obs{truth.sensors, truth.stabilization};
  if (sr == 0.0) return obs;
  for (std::size_t k = 0; k < obs.sensors.size(); ++k) {
    KeyedStream rng(seed, StreamTag::kMeasurementNoise, {static_cast<std::uint64_t>(k)});
    for (double& y : obs.sensors[k]) y += sr * rng.normal();
    for (double& y : obs.stabilization[k]) y += sr * rng.normal();
  }
  return obs;
}

namespace {

struct FilterRun {
  std::vector<StepRecord> steps;
  std::vector<std::pair<double, FlowState>> recon;
  std::vector<double> sensor_sq;  // mean squared sensor error per step
  JointEnsemble ensemble;
};

FilterRun run_filter(const Scenario& scenario, const TwinSetup& setup,
                     const Observations& observations, const TruthRecord& truth,
                     std::uint64_t seed, int threads, bool assimilate) {
  const Mesh& mesh = setup.coarse;
  const int n = scenario.steps();
  const double height = mesh.shape().total_height;
  const StateLayout layout(mesh);
  const EnsembleLayout joint{1, layout.size()};
  const SolverOptions options{};
  const FlowSolver solver(mesh, scenario.forward_model, options);
  const OutletSpec outlet = OutletSpec::constant(scenario.outlet_pressure);
  const double scale = scenario.parameter_scale(mesh);

  const InletSpec unit = scenario.member_inlet(1.0, height);
  auto shape = [&](double y) { return unit.shape(y, height); };
  const LinearObservation h = sensor_observation(layout, 1, setup.sensors.sensor_cells, shape);

  const std::vector<int> probe_cells{setup.probe_cell};
  const LinearObservation probe = sensor_observation(layout, 1, probe_cells, shape);

  if (static_cast<int>(truth.sensors.size()) != n + 1 ||
      static_cast<int>(observations.sensors.size()) != n + 1)
    throw std::invalid_argument("truth and observations must cover every step");
  if (!truth.sensors.empty() && static_cast<int>(truth.sensors[0].size()) != h.rows())
    throw std::invalid_argument("truth sensor count does not match the sensor set");

  std::vector<int> snapshot_steps;
  for (double phase : kSnapshotPhases) snapshot_steps.push_back(phase_step(phase, scenario));

  FilterRun run{{}, {}, {}, init_ensemble(scenario.prior, scenario.ensemble_size, joint, seed)};
  JointEnsemble& ens = run.ensemble;

  double t0 = 0.0;
  const ForwardModel forward = [&](int, std::span<const double> params, std::span<double> state) {
    const InletSpec inlet = scenario.member_inlet(params[0], height);
    FlowState s = layout.unpack(state, t0);
    solver.apply_boundary(s, t0, inlet);
    s = solver.advance(s, scenario.dt, inlet, outlet);
    layout.pack(s, state);
  };

  auto record = [&](int k, bool observed, std::optional<ParameterBounds> bounds) {
    StepRecord r;
    r.step = k;
    r.t = k * scenario.dt;
    r.observed = observed;
    r.true_parameter = truth.parameter[k];
    std::vector<double> params(ens.size());
    for (int i = 0; i < ens.size(); ++i) params[i] = ens.members(0, i);
    const Band b = confidence_band(params);
    r.mean = b.mean;
    r.lo = b.lo;
    r.hi = b.hi;
    r.member_min = *std::min_element(params.begin(), params.end());
    r.member_max = *std::max_element(params.begin(), params.end());
    r.bound_lo = bounds ? bounds->lower : kNaN;
    r.bound_hi = bounds ? bounds->upper : kNaN;

    const Eigen::MatrixXd pu = probe.apply(ens);
    std::vector<double> probe_members(pu.cols());
    for (int i = 0; i < pu.cols(); ++i) probe_members[i] = pu(0, i);
    const Band pb = confidence_band(probe_members);
    r.probe_true = truth.probe_u[k];
    r.probe_mean = pb.mean;
    r.probe_lo = pb.lo;
    r.probe_hi = pb.hi;

    const Eigen::VectorXd mean = ensemble_mean(ens);
    const Eigen::VectorXd pred = h.apply(mean);
    double sq = 0.0;
    for (int e = 0; e < pred.size(); ++e) {
      const double d = pred[e] - truth.sensors[k][e];
      sq += d * d;
    }
    sq /= std::max<Eigen::Index>(pred.size(), 1);
    r.sensor_rmse = std::sqrt(sq);
    run.sensor_sq.push_back(sq);
    run.steps.push_back(r);

    for (std::size_t p = 0; p < snapshot_steps.size(); ++p) {
      if (snapshot_steps[p] != k) continue;
      FlowState s = layout.unpack(std::span<const double>(mean.data() + 1, layout.size()), r.t);
      solver.apply_boundary(s, r.t, scenario.member_inlet(mean[0], height));
      run.recon.emplace_back(kSnapshotPhases[p], std::move(s));
    }
  };

  record(0, false, std::nullopt);
  for (int k = 1; k <= n; ++k) {
    try {
      t0 = (k - 1) * scenario.dt;
      forecast(ens, forward, scenario.noise, seed, k, threads);
      const bool observed = assimilate && scenario.observed(k);
      std::optional<ParameterBounds> bounds;
      if (observed) {
        const auto& yk = observations.sensors[k];
        const Eigen::Map<const Eigen::VectorXd> y(yk.data(), static_cast<Eigen::Index>(yk.size()));
        assimilate_observation(ens, h, y, scenario.noise, scenario.update, seed, k);
        if (scenario.update.constraint_enabled) {
          const auto& stab = observations.stabilization[k];
          std::vector<double> magnitude;
          for (std::size_t e = 0; e + 1 < stab.size(); e += 2)
            magnitude.push_back(std::hypot(stab[e], stab[e + 1]));
          bounds = constrain_parameters(ens, magnitude, scenario.update, scale);
        }
      }
      record(k, observed, bounds);
    } catch (const std::exception& e) {
      throw AssimilationError(k, e.what());
    }
  }
  return run;
}

double rms_over_steps(const std::vector<double>& sq) {
  double sum = 0.0;
  for (std::size_t k = 1; k < sq.size(); ++k) sum += sq[k];
  return std::sqrt(sum / static_cast<double>(std::max<std::size_t>(sq.size() - 1, 1)));
}

}  // namespace

AssimilationRecord run_assimilation(const Scenario& scenario, const TwinSetup& setup,
                                    const Observations& observations, const TruthRecord& truth,
                                    std::uint64_t seed, const AssimilationOptions& options) {
  scenario.validate();
  FilterRun run = run_filter(scenario, setup, observations, truth, seed, options.threads, true);

  AssimilationRecord rec;
  const std::size_t n = run.steps.size() - 1;
  std::vector<double> t(n), m(n), lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    const StepRecord& r = run.steps[k + 1];
    t[k] = r.true_parameter;
    m[k] = r.mean;
    lo[k] = r.lo;
    hi[k] = r.hi;
  }
  rec.error = error_report(t, m, lo, hi);
  rec.sensor_rmse = rms_over_steps(run.sensor_sq);
  rec.steps = std::move(run.steps);
  rec.recon = std::move(run.recon);
  if (options.keep_final_ensemble) rec.final_ensemble = std::move(run.ensemble);

  if (options.open_loop) {
    const FilterRun open = run_filter(scenario, setup, observations, truth, seed, options.threads, false);
    rec.open_loop_rmse = rms_over_steps(open.sensor_sq);
  }
  return rec;
}

}  // namespace hemoda
