#include "hemoda/state_layout.hpp"

#include <stdexcept>

namespace hemoda {

StateLayout::StateLayout(const Mesh& mesh)
    : mesh_(&mesh),
      u_slot_(mesh.u_face_count(), -1),
      v_slot_(mesh.v_face_count(), -1),
      p_slot_(mesh.cell_count(), -1) {
  for (int j = 0; j < mesh.ny(); ++j)
    for (int i = 0; i <= mesh.nx(); ++i) {
      const FaceKind k = mesh.u_kind(i, j);
      if (k == FaceKind::kActive || k == FaceKind::kOutlet) u_faces_.push_back(mesh.u_index(i, j));
    }
  for (int j = 0; j <= mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i)
      if (mesh.v_kind(i, j) == FaceKind::kActive) v_faces_.push_back(mesh.v_index(i, j));
  cells_.assign(mesh.fluid_cells().begin(), mesh.fluid_cells().end());

  int slot = 0;
  for (int f : u_faces_) u_slot_[f] = slot++;
  for (int f : v_faces_) v_slot_[f] = slot++;
  for (int c : cells_) p_slot_[c] = slot++;
}

void StateLayout::pack(const FlowState& state, std::span<double> out) const {
  if (!state.matches(*mesh_)) throw std::invalid_argument("flow state does not match the layout");
  if (out.size() != static_cast<std::size_t>(size()))
    throw std::invalid_argument("state vector has the wrong length");
  std::size_t k = 0;
  for (int f : u_faces_) out[k++] = state.u[f];
  for (int f : v_faces_) out[k++] = state.v[f];
  for (int c : cells_) out[k++] = state.p[c];
}

std::vector<double> StateLayout::pack(const FlowState& state) const {
  std::vector<double> out(size());
  pack(state, out);
  return out;
}

FlowState StateLayout::unpack(std::span<const double> in, double t) const {
  if (in.size() != static_cast<std::size_t>(size()))
    throw std::invalid_argument("state vector has the wrong length");
  FlowState s = FlowState::zeros(*mesh_, t);
  std::size_t k = 0;
  for (int f : u_faces_) s.u[f] = in[k++];
  for (int f : v_faces_) s.v[f] = in[k++];
  for (int c : cells_) s.p[c] = in[k++];
  return s;
}

LinearObservation::Row cell_u_row(const StateLayout& layout, int n_param, int cell,
                                  double inlet_shape) {
  const Mesh& m = layout.mesh();
  if (!m.is_fluid(cell)) throw std::invalid_argument("observed cell is not a fluid cell");
  const int i = cell % m.nx();
  const int j = cell / m.nx();
  LinearObservation::Row row;
  for (int face : {m.u_index(i, j), m.u_index(i + 1, j)}) {
    const int slot = layout.u_slot(face);
    if (slot >= 0) {
      row.emplace_back(n_param + slot, 0.5);
    } else if (face == m.u_index(0, j) && m.u_kind(0, j) == FaceKind::kInlet && n_param > 0 &&
               inlet_shape != 0.0) {
      row.emplace_back(0, 0.5 * inlet_shape);
    }
  }
  return row;
}

LinearObservation::Row cell_v_row(const StateLayout& layout, int n_param, int cell) {
  const Mesh& m = layout.mesh();
  if (!m.is_fluid(cell)) throw std::invalid_argument("observed cell is not a fluid cell");
  const int i = cell % m.nx();
  const int j = cell / m.nx();
  LinearObservation::Row row;
  for (int face : {m.v_index(i, j), m.v_index(i, j + 1)}) {
    const int slot = layout.v_slot(face);
    if (slot >= 0) row.emplace_back(n_param + slot, 0.5);
  }
  return row;
}

}  // namespace hemoda
