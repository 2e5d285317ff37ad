#pragma once

#include <span>
#include <vector>

#include "hemoda/ensisf.hpp"
#include "hemoda/flow_state.hpp"
#include "hemoda/geometry.hpp"

namespace hemoda {

/// Flattening of a FlowState into the filter's state vector: the dynamic u
/// faces (active and outlet), the active v faces, then fluid-cell pressures.
/// Prescribed faces (inlet, walls, dead faces) are not part of the state.
class StateLayout {
 public:
  explicit StateLayout(const Mesh& mesh);

  int size() const { return static_cast<int>(u_faces_.size() + v_faces_.size() + cells_.size()); }
  int u_offset() const { return 0; }
  int v_offset() const { return static_cast<int>(u_faces_.size()); }
  int p_offset() const { return static_cast<int>(u_faces_.size() + v_faces_.size()); }

  /// Position of a face or cell in the state vector, -1 when not stored.
  int u_slot(int face) const { return u_slot_[face]; }
  int v_slot(int face) const { return v_slot_[face]; }
  int p_slot(int cell) const { return p_slot_[cell]; }

  void pack(const FlowState& state, std::span<double> out) const;
  std::vector<double> pack(const FlowState& state) const;
  /// Unpacks into a state whose prescribed faces are zero.
  FlowState unpack(std::span<const double> in, double t) const;

  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  std::vector<int> u_faces_;
  std::vector<int> v_faces_;
  std::vector<int> cells_;
  std::vector<int> u_slot_;
  std::vector<int> v_slot_;
  std::vector<int> p_slot_;
};

/// Row weights over the joint vector [params; state] that evaluate the
/// cell-centered u and v at `cell`. A west inlet face feeds the first
/// parameter through its profile weight `inlet_shape(y)`.
LinearObservation::Row cell_u_row(const StateLayout& layout, int n_param, int cell,
                                  double inlet_shape);
LinearObservation::Row cell_v_row(const StateLayout& layout, int n_param, int cell);

/// Measurement map reading (u, v) at each sensor cell, interleaved per sensor.
/// `inlet_shape` gives the inlet profile factor at a height y.
template <class Shape>
LinearObservation sensor_observation(const StateLayout& layout, int n_param,
                                     std::span<const int> cells, Shape inlet_shape) {
  std::vector<LinearObservation::Row> rows;
  rows.reserve(2 * cells.size());
  for (int c : cells) {
    rows.push_back(cell_u_row(layout, n_param, c, inlet_shape(layout.mesh().cell_center(c).y)));
    rows.push_back(cell_v_row(layout, n_param, c));
  }
  return LinearObservation(n_param + layout.size(), std::move(rows));
}

}  // namespace hemoda
