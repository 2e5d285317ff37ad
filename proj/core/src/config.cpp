#include "hemoda/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hemoda/errors.hpp"

namespace hemoda {

namespace {

using nlohmann::json;

// Reads the known keys of one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("key '" + name(key) + "' has the wrong type");
    }
  }

  void read(const char* key, std::optional<int>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number_integer()) throw ConfigError("key '" + name(key) + "' must be an integer or null");
    out = it->get<int>();
  }

  void read(const char* key, std::uint64_t& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_unsigned()) throw ConfigError("key '" + name(key) + "' must be a non-negative integer");
    out = it->get<std::uint64_t>();
  }

  void read(const char* key, std::array<int, 2>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
        !(*it)[1].is_number_integer())
      throw ConfigError("key '" + name(key) + "' must be a pair of integers [nx, ny]");
    out = {(*it)[0].get<int>(), (*it)[1].get<int>()};
  }

  // Returns the nested object under `key`, or nullptr when absent.
  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name(key.c_str()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Rheology parse_rheology(const std::string& s, const std::string& key) {
  if (s == "newtonian") return Rheology::kNewtonian;
  if (s == "casson") return Rheology::kCasson;
  throw ConfigError("key '" + key + "' must be \"newtonian\" or \"casson\"");
}

void read_fluid(const json& j, const std::string& path, FluidModel& m) {
  ObjectReader r(j, path);
  std::string kind = m.kind == Rheology::kNewtonian ? "newtonian" : "casson";
  r.read("kind", kind);
  m.kind = parse_rheology(kind, r.name("kind"));
  r.read("density", m.density);
  r.read("mu", m.mu);
  r.read("tau0", m.tau0);
  r.read("mu_inf", m.mu_inf);
  r.read("gamma_dot_min", m.gamma_dot_min);
  r.finish();
}

json fluid_json(const FluidModel& m) {
  return {{"kind", m.kind == Rheology::kNewtonian ? "newtonian" : "casson"},
          {"density", m.density},
          {"mu", m.mu},
          {"tau0", m.tau0},
          {"mu_inf", m.mu_inf},
          {"gamma_dot_min", m.gamma_dot_min}};
}

void read_document(const json& doc, RunConfig& c) {
  ObjectReader r(doc, "");
  std::string scenario_key;
  r.read("scenario", scenario_key);
  Scenario& s = c.scenario;

  r.read("dt", s.dt);
  r.read("t_final", s.t_final);
  r.read("observation_span", s.observation_span);
  r.read("ensemble_size", s.ensemble_size);
  r.read("outlet_pressure", s.outlet_pressure);
  r.read("threads", c.threads);

  if (const json* p = r.child("prior")) {
    ObjectReader o(*p, "prior");
    o.read("state_mean", s.prior.state_mean);
    o.read("state_cov", s.prior.state_cov);
    o.read("param_mean", s.prior.param_mean);
    o.read("param_cov", s.prior.param_cov);
    o.finish();
  }
  if (const json* p = r.child("noise")) {
    ObjectReader o(*p, "noise");
    o.read("process", s.noise.process);
    o.read("measurement", s.noise.measurement);
    o.read("parameter_walk", s.noise.parameter);
    o.finish();
  }
  if (const json* p = r.child("update")) {
    ObjectReader o(*p, "update");
    o.read("beta_iterations", s.update.beta_iterations);
    o.read("jitter", s.update.jitter);
    o.read("constraint", s.update.constraint_enabled);
    o.read("band_lower", s.update.band_lower);
    o.read("band_upper", s.update.band_upper);
    o.finish();
  }
  if (const json* p = r.child("truth")) {
    ObjectReader o(*p, "truth");
    o.read("constant_value", s.constant_truth);
    if (const json* w = o.child("waveform")) {
      ObjectReader ow(*w, "truth.waveform");
      ow.read("base", s.waveform.base);
      ow.read("amplitude", s.waveform.amplitude);
      ow.read("width", s.waveform.width);
      ow.read("peak", s.waveform.peak);
      ow.read("period", s.waveform.period);
      ow.finish();
    }
    o.finish();
  }
  if (const json* p = r.child("rheology")) {
    ObjectReader o(*p, "rheology");
    if (const json* m = o.child("truth")) read_fluid(*m, "rheology.truth", s.truth_model);
    if (const json* m = o.child("forward")) read_fluid(*m, "rheology.forward", s.forward_model);
    o.finish();
  }
  if (const json* p = r.child("mesh")) {
    ObjectReader o(*p, "mesh");
    o.read("coarse", c.coarse);
    o.read("fine", c.fine);
    o.finish();
  }
  if (const json* p = r.child("vessel")) {
    ObjectReader o(*p, "vessel");
    o.read("total_length", c.vessel.total_length);
    o.read("total_height", c.vessel.total_height);
    o.read("trunk_length", c.vessel.trunk_length);
    o.read("splitter_length", c.vessel.splitter_length);
    o.read("splitter_thickness", c.vessel.splitter_thickness);
    o.finish();
  }
  if (const json* p = r.child("sensors")) {
    ObjectReader o(*p, "sensors");
    o.read("fraction", c.sensor_fraction);
    o.read("count", c.sensor_count);
    o.finish();
  }
  if (const json* p = r.child("seeds")) {
    ObjectReader o(*p, "seeds");
    o.read("truth", c.seed_truth);
    o.read("noise", c.seed_noise);
    o.read("ensemble", c.seed_ensemble);
    o.finish();
  }
  if (const json* p = r.child("output")) {
    ObjectReader o(*p, "output");
    o.read("directory", c.output);
    o.read("export_ensembles", c.export_ensembles);
    o.read("export_fields", c.export_fields);
    o.finish();
  }
  r.finish();
}

}  // namespace

void RunConfig::validate() const {
  try {
    scenario.validate();
    vessel.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (coarse[0] < 1 || coarse[1] < 1) throw ConfigError("invalid configuration: mesh.coarse must be positive");
  if (fine[0] < coarse[0] || fine[1] < coarse[1])
    throw ConfigError("invalid configuration: mesh.fine must not be below mesh.coarse on either axis");
  if (!(sensor_fraction > 0.0 && sensor_fraction < 1.0))
    throw ConfigError("invalid configuration: sensors.fraction must lie in (0, 1)");
  if (sensor_count && *sensor_count < 1)
    throw ConfigError("invalid configuration: sensors.count must be at least 1");
  if (threads < 0) throw ConfigError("invalid configuration: threads must be non-negative");
  if (output.empty()) throw ConfigError("invalid configuration: output.directory must not be empty");
}

RunConfig default_config(ScenarioKind kind) {
  RunConfig c;
  c.scenario = Scenario::defaults(kind);
  return c;
}

RunConfig parse_config_text(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return default_config();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  ScenarioKind kind = ScenarioKind::kConstant;
  if (doc.is_object() && doc.contains("scenario")) {
    if (!doc["scenario"].is_string()) throw ConfigError("key 'scenario' must be a string");
    try {
      kind = parse_scenario_kind(doc["scenario"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'scenario': ") + e.what());
    }
  }
  RunConfig c = default_config(kind);
  read_document(doc, c);
  c.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& c) {
  const Scenario& s = c.scenario;
  json doc;
  doc["scenario"] = std::string(scenario_name(s.kind));
  doc["dt"] = s.dt;
  doc["t_final"] = s.t_final;
  doc["observation_span"] = s.observation_span;
  doc["ensemble_size"] = s.ensemble_size;
  doc["outlet_pressure"] = s.outlet_pressure;
  doc["threads"] = c.threads;
  doc["prior"] = {{"state_mean", s.prior.state_mean},
                  {"state_cov", s.prior.state_cov},
                  {"param_mean", s.prior.param_mean},
                  {"param_cov", s.prior.param_cov}};
  doc["noise"] = {{"process", s.noise.process},
                  {"measurement", s.noise.measurement},
                  {"parameter_walk", s.noise.parameter}};
  doc["update"] = {{"beta_iterations", s.update.beta_iterations},
                   {"jitter", s.update.jitter},
                   {"constraint", s.update.constraint_enabled},
                   {"band_lower", s.update.band_lower},
                   {"band_upper", s.update.band_upper}};
  doc["truth"] = {{"constant_value", s.constant_truth},
                  {"waveform",
                   {{"base", s.waveform.base},
                    {"amplitude", s.waveform.amplitude},
                    {"width", s.waveform.width},
                    {"peak", s.waveform.peak},
                    {"period", s.waveform.period}}}};
  doc["rheology"] = {{"truth", fluid_json(s.truth_model)}, {"forward", fluid_json(s.forward_model)}};
  doc["mesh"] = {{"coarse", c.coarse}, {"fine", c.fine}};
  doc["vessel"] = {{"total_length", c.vessel.total_length},
                   {"total_height", c.vessel.total_height},
                   {"trunk_length", c.vessel.trunk_length},
                   {"splitter_length", c.vessel.splitter_length},
                   {"splitter_thickness", c.vessel.splitter_thickness}};
  doc["sensors"] = {{"fraction", c.sensor_fraction},
                    {"count", c.sensor_count ? json(*c.sensor_count) : json(nullptr)}};
  doc["seeds"] = {{"truth", c.seed_truth}, {"noise", c.seed_noise}, {"ensemble", c.seed_ensemble}};
  doc["output"] = {{"directory", c.output},
                   {"export_ensembles", c.export_ensembles},
                   {"export_fields", c.export_fields}};
  return doc.dump(2) + "\n";
}

}  // namespace hemoda
