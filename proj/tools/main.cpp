// hemoda: twin-experiment driver.
//
//   hemoda truth       --config c.json --out run
//   hemoda assimilate  --config c.json --out run [--span 2,4,5] [--threads 4]
//   hemoda report      --out run
//   hemoda export-vtk  --config c.json --out run

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hemoda/config.hpp"
#include "hemoda/errors.hpp"
#include "hemoda/io.hpp"
#include "hemoda/twin_lab.hpp"

namespace fs = std::filesystem;
using namespace hemoda;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed_truth;
  std::optional<std::uint64_t> seed_noise;
  std::optional<std::uint64_t> seed_ensemble;
  std::optional<int> threads;
  std::string spans;
  std::string scenario;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--out", o.out, "Output directory (overrides output.directory)");
  app->add_option("--seed-truth", o.seed_truth, "Seed for sensor placement");
  app->add_option("--seed-noise", o.seed_noise, "Seed for measurement noise");
  app->add_option("--seed-ensemble", o.seed_ensemble, "Seed for the filter ensemble");
  app->add_option("--threads", o.threads, "Forecast worker threads (0 = all cores)");
  app->add_option("--span", o.spans, "Observation span in steps, or a comma list for a sweep");
  app->add_option("--scenario", o.scenario, "constant, time or timespace")
      ->check(CLI::IsMember({"constant", "time", "timespace"}));
}

RunConfig load(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) {
    c = parse_config(o.config);
    if (!o.scenario.empty() && parse_scenario_kind(o.scenario) != c.scenario.kind)
      throw ConfigError("--scenario " + o.scenario + " disagrees with the configuration file");
  } else {
    c = default_config(o.scenario.empty() ? ScenarioKind::kConstant : parse_scenario_kind(o.scenario));
  }
  if (!o.out.empty()) c.output = o.out;
  if (o.seed_truth) c.seed_truth = *o.seed_truth;
  if (o.seed_noise) c.seed_noise = *o.seed_noise;
  if (o.seed_ensemble) c.seed_ensemble = *o.seed_ensemble;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

std::vector<int> parse_spans(const std::string& text) {
  std::vector<int> spans;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int s = std::stoi(item, &used);
      if (used != item.size() || s < 1) throw std::invalid_argument(item);
      spans.push_back(s);
    } catch (const std::exception&) {
      throw ConfigError("--span expects positive integers, got '" + item + "'");
    }
  }
  return spans;
}

// Everything that determines the truth record.
bool same_truth(const RunConfig& a, const RunConfig& b) {
  const Scenario& x = a.scenario;
  const Scenario& y = b.scenario;
  return x.kind == y.kind && x.dt == y.dt && x.t_final == y.t_final &&
         x.constant_truth == y.constant_truth && x.waveform == y.waveform &&
         x.truth_model == y.truth_model && x.outlet_pressure == y.outlet_pressure &&
         a.vessel == b.vessel && a.coarse == b.coarse && a.fine == b.fine &&
         a.sensor_fraction == b.sensor_fraction && a.sensor_count == b.sensor_count &&
         a.seed_truth == b.seed_truth;
}

TwinSetup setup_for(const RunConfig& c) {
  return make_setup(c.vessel, c.coarse, c.fine, c.sensor_fraction, c.sensor_count, c.seed_truth);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

void write_truth_snapshots(const fs::path& dir, const RunConfig& c, const TwinSetup& setup,
                           const TruthRecord& truth) {
  for (const auto& [phase, state] : truth.snapshots)
    write_fields_vtk(dir / ("truth_" + phase_label(phase) + ".vtk"), setup.fine, state,
                     c.scenario.truth_model);
}

TruthRecord make_truth(const fs::path& dir, const RunConfig& c, const TwinSetup& setup) {
  std::cerr << "generating truth (" << setup.fine.fluid_count() << " fine cells)\n";
  TruthRecord truth = generate_truth(c.scenario, setup);
  write_truth_csv(dir / "truth_sensors.csv", truth);
  write_probe_csv(dir / "probe.csv", truth, setup.probe_cell);
  write_sensors_csv(dir / "sensors.csv", setup.coarse, setup.sensors);
  write_mesh_vtk(dir / "mesh_coarse.vtk", setup.coarse);
  write_mesh_vtk(dir / "mesh_fine.vtk", setup.fine);
  if (c.export_fields) write_truth_snapshots(dir, c, setup, truth);
  write_text(dir / "truth_config.json", serialize_config(c));
  return truth;
}

int cmd_truth(const Options& o) {
  const RunConfig c = load(o);
  const fs::path dir = c.output;
  const TwinSetup setup = setup_for(c);
  const TruthRecord truth = make_truth(dir, c, setup);
  write_observations_csv(dir / "observations.csv", truth,
                         make_observations(truth, c.scenario.noise, c.seed_noise));
  std::cout << "truth written to " << dir.string() << '\n';
  return 0;
}

void write_assimilation(const fs::path& dir, const RunConfig& c, const TwinSetup& setup,
                        const AssimilationRecord& rec) {
  write_parameter_trajectory(dir / "parameter_trajectory.csv", rec);
  write_state_probe(dir / "state_probe.csv", rec);
  const Scenario& s = c.scenario;
  KeyValues extra{
      {"scenario", std::string(scenario_name(s.kind))},
      {"span_steps", std::to_string(s.observation_span)},
      {"span_seconds", format_double(s.observation_span * s.dt)},
      {"dt", format_double(s.dt)},
      {"ensemble_size", std::to_string(s.ensemble_size)},
      {"sensor_rmse", format_double(rec.sensor_rmse)},
      {"seed_truth", std::to_string(c.seed_truth)},
      {"seed_noise", std::to_string(c.seed_noise)},
      {"seed_ensemble", std::to_string(c.seed_ensemble)},
  };
  if (rec.open_loop_rmse) extra.emplace_back("open_loop_rmse", format_double(*rec.open_loop_rmse));
  write_metrics(dir / "metrics.txt", rec, extra);
  if (c.export_fields)
    for (const auto& [phase, state] : rec.recon)
      write_fields_vtk(dir / ("recon_" + phase_label(phase) + ".vtk"), setup.coarse, state,
                       s.forward_model);
  if (c.export_ensembles && rec.final_ensemble)
    write_ensemble_csv(dir / "ensemble_final.csv", *rec.final_ensemble, true);
}

// Reuses the truth in `dir` when it was produced by an equivalent configuration.
TruthRecord truth_for(const fs::path& dir, const RunConfig& c, const TwinSetup& setup) {
  const fs::path csv = dir / "truth_sensors.csv";
  const fs::path cfg = dir / "truth_config.json";
  if (fs::exists(csv) && fs::exists(cfg)) {
    try {
      if (same_truth(parse_config(cfg), c)) {
        TruthRecord t = read_truth_csv(csv);
        if (t.steps() == c.scenario.steps()) return t;
      }
    } catch (const std::exception& e) {
      std::cerr << "ignoring stored truth: " << e.what() << '\n';
    }
  }
  return make_truth(dir, c, setup);
}

std::vector<std::pair<RunConfig, fs::path>> runs_for(const RunConfig& base, const Options& o) {
  std::vector<std::pair<RunConfig, fs::path>> runs;
  const fs::path dir = base.output;
  if (o.spans.empty()) {
    runs.emplace_back(base, dir);
    return runs;
  }
  const auto spans = parse_spans(o.spans);
  for (int span : spans) {
    RunConfig c = base;
    c.scenario.observation_span = span;
    runs.emplace_back(c, spans.size() == 1 ? dir : dir / ("span_" + std::to_string(span)));
  }
  return runs;
}

int cmd_assimilate(const Options& o) {
  const RunConfig base = load(o);
  const fs::path dir = base.output;
  const TwinSetup setup = setup_for(base);
  const TruthRecord truth = truth_for(dir, base, setup);
  const Observations obs = make_observations(truth, base.scenario.noise, base.seed_noise);
  write_observations_csv(dir / "observations.csv", truth, obs);

  for (const auto& [c, out] : runs_for(base, o)) {
    AssimilationOptions opts;
    opts.threads = c.threads;
    opts.keep_final_ensemble = c.export_ensembles;
    std::cerr << "assimilating span " << c.scenario.observation_span << " into " << out.string() << '\n';
    const AssimilationRecord rec = run_assimilation(c.scenario, setup, obs, truth, c.seed_ensemble, opts);
    write_assimilation(out, c, setup, rec);
    write_text(out / "config.json", serialize_config(c));
    std::printf("span %d: mre_percent=%.4f\n", c.scenario.observation_span, rec.error.mre_percent);
  }
  return 0;
}

std::string lookup(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return "";
}

int cmd_report(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(load(o).output) : fs::path(o.out);
  std::vector<fs::path> files;
  if (fs::exists(dir / "metrics.txt")) files.push_back(dir / "metrics.txt");
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && e.path().filename().string().rfind("span_", 0) == 0 &&
          fs::exists(e.path() / "metrics.txt"))
        files.push_back(e.path() / "metrics.txt");
  if (files.empty()) {
    std::cerr << "no metrics.txt under " << dir.string() << '\n';
    return 1;
  }

  struct Row {
    double span_seconds;
    double mre;
    std::string path;
  };
  std::vector<Row> rows;
  for (const auto& f : files) {
    const KeyValues kv = read_metrics(f);
    std::cout << "# " << f.string() << '\n';
    for (const auto& [k, v] : kv) std::cout << k << '=' << v << '\n';
    std::cout << '\n';
    const std::string span = lookup(kv, "span_seconds");
    const std::string mre = lookup(kv, "mre_percent");
    if (!span.empty() && !mre.empty()) rows.push_back({std::stod(span), std::stod(mre), f.string()});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.span_seconds < b.span_seconds; });
  std::printf("%-12s %10s\n", "span (s)", "MRE (%)");
  for (const auto& r : rows) std::printf("%-12.2f %10.3f\n", r.span_seconds, r.mre);
  return 0;
}

int cmd_export_vtk(const Options& o) {
  const RunConfig base = load(o);
  const fs::path dir = base.output;
  const TwinSetup setup = setup_for(base);
  write_mesh_vtk(dir / "mesh_coarse.vtk", setup.coarse);
  write_mesh_vtk(dir / "mesh_fine.vtk", setup.fine);
  write_sensors_csv(dir / "sensors.csv", setup.coarse, setup.sensors);
  std::cerr << "regenerating truth snapshots\n";
  const TruthRecord truth = generate_truth(base.scenario, setup);
  write_truth_snapshots(dir, base, setup, truth);
  const Observations obs = make_observations(truth, base.scenario.noise, base.seed_noise);
  for (const auto& [c, out] : runs_for(base, o)) {
    AssimilationOptions opts;
    opts.threads = c.threads;
    opts.open_loop = false;
    const AssimilationRecord rec = run_assimilation(c.scenario, setup, obs, truth, c.seed_ensemble, opts);
    for (const auto& [phase, state] : rec.recon)
      write_fields_vtk(out / ("recon_" + phase_label(phase) + ".vtk"), setup.coarse, state,
                       c.scenario.forward_model);
  }
  std::cout << "snapshots written to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inlet-parameter estimation twin experiments"};
  app.require_subcommand(1);
  Options o;
  auto* truth = app.add_subcommand("truth", "Generate the fine-mesh truth and observations");
  auto* assimilate = app.add_subcommand("assimilate", "Run the ensemble filter against the truth");
  auto* report = app.add_subcommand("report", "Print metrics and the span summary table");
  auto* vtk = app.add_subcommand("export-vtk", "Re-emit mesh and field snapshots");
  for (auto* sub : {truth, assimilate, report, vtk}) add_common(sub, o);

  CLI11_PARSE(app, argc, argv);
  try {
    if (truth->parsed()) return cmd_truth(o);
    if (assimilate->parsed()) return cmd_assimilate(o);
    if (report->parsed()) return cmd_report(o);
    if (vtk->parsed()) return cmd_export_vtk(o);
  } catch (const std::exception& e) {
    std::cerr << "hemoda: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
