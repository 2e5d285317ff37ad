#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hemoda/ensisf.hpp"
#include "hemoda/flow_state.hpp"
#include "hemoda/geometry.hpp"
#include "hemoda/rheology.hpp"
#include "hemoda/twin_lab.hpp"

namespace hemoda {

/// Scientific notation with 17 significant digits; parses back bit-exactly.
std::string format_double(double x);

/// Legacy-VTK ASCII unstructured grid of all cells with cell data `flag`.
void write_mesh_vtk(const std::filesystem::path& path, const Mesh& mesh);

/// Like write_mesh_vtk plus cell data `u`, `v` (cell centered), `p` and `wss`.
void write_fields_vtk(const std::filesystem::path& path, const Mesh& mesh, const FlowState& state,
                      const FluidModel& model);

/// `cell_index,x,y,kind` with kind sensor or stabilization.
void write_sensors_csv(const std::filesystem::path& path, const Mesh& mesh, const SensorSet& sensors);

/// `t,cell_index,u,v,p` of the truth at the probe cell.
void write_probe_csv(const std::filesystem::path& path, const TruthRecord& truth, int cell);

/// `step,t,parameter,probe_u,probe_v,probe_p,s<k>_u,s<k>_v,...,stab<k>_u,stab<k>_v,...`
void write_truth_csv(const std::filesystem::path& path, const TruthRecord& truth);
/// Reads a file written by write_truth_csv. Snapshots are not stored there.
TruthRecord read_truth_csv(const std::filesystem::path& path);

/// `step,t,s<k>_u,s<k>_v,...,stab<k>_u,stab<k>_v,...`
void write_observations_csv(const std::filesystem::path& path, const TruthRecord& truth,
                            const Observations& observations);

/// `t,true,mean,lo,hi,observed`
void write_parameter_trajectory(const std::filesystem::path& path, const AssimilationRecord& rec);
/// `t,true_u,mean_u,lo,hi`
void write_state_probe(const std::filesystem::path& path, const AssimilationRecord& rec);

/// `member,param[,x<k>...]`
void write_ensemble_csv(const std::filesystem::path& path, const JointEnsemble& ensemble,
                        bool include_state);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// key=value lines: mre_percent, coverage, n_steps, n_excluded, then `extra`.
void write_metrics(const std::filesystem::path& path, const AssimilationRecord& rec,
                   const KeyValues& extra = {});
KeyValues read_metrics(const std::filesystem::path& path);

/// File-name label of a snapshot phase, e.g. "0.24".
std::string phase_label(double phase);

}  // namespace hemoda
