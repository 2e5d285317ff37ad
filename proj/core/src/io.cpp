#include "hemoda/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hemoda/flow_solver.hpp"

namespace hemoda {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error(path.string() + ": bad number '" + s + "'");
  return x;
}

void write_vtk_header(std::ofstream& out, const Mesh& mesh) {
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  out << "# vtk DataFile Version 3.0\nhemoda\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << (nx + 1) * (ny + 1) << " double\n";
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      out << format_double(i * mesh.dx()) << ' ' << format_double(j * mesh.dy()) << " 0\n";
  const int cells = mesh.cell_count();
  out << "CELLS " << cells << ' ' << 5 * cells << '\n';
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = i + (nx + 1) * j;
      out << "4 " << a << ' ' << a + 1 << ' ' << a + nx + 2 << ' ' << a + nx + 1 << '\n';
    }
  out << "CELL_TYPES " << cells << '\n';
  for (int c = 0; c < cells; ++c) out << "9\n";
  out << "CELL_DATA " << cells << "\nSCALARS flag int 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < cells; ++c) out << (mesh.is_fluid(c) ? 1 : 0) << '\n';
}

void write_scalars(std::ofstream& out, const char* name, const std::vector<double>& values) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : values) out << format_double(x) << '\n';
}

std::string sensor_columns(const TruthRecord& truth) {
  std::string h;
  const std::size_t ns = truth.sensors.empty() ? 0 : truth.sensors[0].size() / 2;
  const std::size_t nb = truth.stabilization.empty() ? 0 : truth.stabilization[0].size() / 2;
  for (std::size_t k = 0; k < ns; ++k) h += ",s" + std::to_string(k) + "_u,s" + std::to_string(k) + "_v";
  for (std::size_t k = 0; k < nb; ++k)
    h += ",stab" + std::to_string(k) + "_u,stab" + std::to_string(k) + "_v";
  return h;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string phase_label(double phase) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", phase);
  return buf;
}

void write_mesh_vtk(const std::filesystem::path& path, const Mesh& mesh) {
  auto out = open_out(path);
  write_vtk_header(out, mesh);
}

void write_fields_vtk(const std::filesystem::path& path, const Mesh& mesh, const FlowState& state,
                      const FluidModel& model) {
  auto out = open_out(path);
  write_vtk_header(out, mesh);
  write_scalars(out, "u", cell_velocity_u(state, mesh));
  write_scalars(out, "v", cell_velocity_v(state, mesh));
  write_scalars(out, "p", state.p);
  write_scalars(out, "wss", cell_wall_shear(state, mesh, model));
}

void write_sensors_csv(const std::filesystem::path& path, const Mesh& mesh,
                       const SensorSet& sensors) {
  auto out = open_out(path);
  out << "cell_index,x,y,kind\n";
  auto row = [&](int c, const char* kind) {
    const Point2 p = mesh.cell_center(c);
    out << c << ',' << format_double(p.x) << ',' << format_double(p.y) << ',' << kind << '\n';
  };
  for (int c : sensors.sensor_cells) row(c, "sensor");
  for (int c : sensors.stabilization_cells) row(c, "stabilization");
}

void write_probe_csv(const std::filesystem::path& path, const TruthRecord& truth, int cell) {
  auto out = open_out(path);
  out << "t,cell_index,u,v,p\n";
  for (std::size_t k = 0; k < truth.times.size(); ++k)
    out << format_double(truth.times[k]) << ',' << cell << ',' << format_double(truth.probe_u[k])
        << ',' << format_double(truth.probe_v[k]) << ',' << format_double(truth.probe_p[k]) << '\n';
}

void write_truth_csv(const std::filesystem::path& path, const TruthRecord& truth) {
  auto out = open_out(path);
  out << "step,t,parameter,probe_u,probe_v,probe_p" << sensor_columns(truth) << '\n';
  for (std::size_t k = 0; k < truth.times.size(); ++k) {
    out << k << ',' << format_double(truth.times[k]) << ',' << format_double(truth.parameter[k])
        << ',' << format_double(truth.probe_u[k]) << ',' << format_double(truth.probe_v[k]) << ','
        << format_double(truth.probe_p[k]);
    for (double x : truth.sensors[k]) out << ',' << format_double(x);
    for (double x : truth.stabilization[k]) out << ',' << format_double(x);
    out << '\n';
  }
}

TruthRecord read_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split(line);
  if (header.size() < 6 || header[0] != "step" || header[2] != "parameter")
    throw std::runtime_error(path.string() + ": unexpected header");
  std::size_t ns = 0;
  std::size_t nb = 0;
  for (std::size_t c = 6; c < header.size(); ++c) (header[c].rfind("stab", 0) == 0 ? nb : ns)++;

  TruthRecord t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    t.times.push_back(parse_double(f[1], path));
    t.parameter.push_back(parse_double(f[2], path));
    t.probe_u.push_back(parse_double(f[3], path));
    t.probe_v.push_back(parse_double(f[4], path));
    t.probe_p.push_back(parse_double(f[5], path));
    std::vector<double> s(ns), b(nb);
    for (std::size_t c = 0; c < ns; ++c) s[c] = parse_double(f[6 + c], path);
    for (std::size_t c = 0; c < nb; ++c) b[c] = parse_double(f[6 + ns + c], path);
    t.sensors.push_back(std::move(s));
    t.stabilization.push_back(std::move(b));
  }
  return t;
}

void write_observations_csv(const std::filesystem::path& path, const TruthRecord& truth,
                            const Observations& observations) {
  auto out = open_out(path);
  out << "step,t" << sensor_columns(truth) << '\n';
  for (std::size_t k = 0; k < observations.sensors.size(); ++k) {
    out << k << ',' << format_double(truth.times[k]);
    for (double x : observations.sensors[k]) out << ',' << format_double(x);
    for (double x : observations.stabilization[k]) out << ',' << format_double(x);
    out << '\n';
  }
}

void write_parameter_trajectory(const std::filesystem::path& path, const AssimilationRecord& rec) {
  auto out = open_out(path);
  out << "t,true,mean,lo,hi,observed\n";
  for (const auto& r : rec.steps)
    out << format_double(r.t) << ',' << format_double(r.true_parameter) << ','
        << format_double(r.mean) << ',' << format_double(r.lo) << ',' << format_double(r.hi) << ','
        << (r.observed ? 1 : 0) << '\n';
}

void write_state_probe(const std::filesystem::path& path, const AssimilationRecord& rec) {
  auto out = open_out(path);
  out << "t,true_u,mean_u,lo,hi\n";
  for (const auto& r : rec.steps)
    out << format_double(r.t) << ',' << format_double(r.probe_true) << ','
        << format_double(r.probe_mean) << ',' << format_double(r.probe_lo) << ','
        << format_double(r.probe_hi) << '\n';
}

void write_ensemble_csv(const std::filesystem::path& path, const JointEnsemble& ensemble,
                        bool include_state) {
  auto out = open_out(path);
  out << "member,param";
  if (include_state)
    for (int k = 0; k < ensemble.layout.n_state; ++k) out << ",x" << k;
  out << '\n';
  for (int i = 0; i < ensemble.size(); ++i) {
    out << i << ',' << format_double(ensemble.members(0, i));
    if (include_state)
      for (int k = 0; k < ensemble.layout.n_state; ++k)
        out << ',' << format_double(ensemble.members(ensemble.layout.n_param + k, i));
    out << '\n';
  }
}

void write_metrics(const std::filesystem::path& path, const AssimilationRecord& rec,
                   const KeyValues& extra) {
  auto out = open_out(path);
  out << "mre_percent=" << format_double(rec.error.mre_percent) << '\n';
  out << "coverage=" << format_double(rec.error.coverage) << '\n';
  out << "n_steps=" << rec.error.n_steps << '\n';
  out << "n_excluded=" << rec.error.n_excluded << '\n';
  for (const auto& [k, v] : extra) out << k << '=' << v << '\n';
}

KeyValues read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace hemoda
