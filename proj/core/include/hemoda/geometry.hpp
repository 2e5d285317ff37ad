#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hemoda {

/// Axis-aligned idealized vessel: a trunk of full height that is split into two
/// equal outlet channels by a solid divider block.
struct VesselShape {
  double total_length = 0.08;
  double total_height = 0.016;
  double trunk_length = 0.03;
  double splitter_length = 0.05;
  double splitter_thickness = 0.004;

  static VesselShape plain_channel(double length, double height);

  bool has_splitter() const { return splitter_length > 0.0; }
  double splitter_bottom() const { return 0.5 * (total_height - splitter_thickness); }
  double splitter_top() const { return 0.5 * (total_height + splitter_thickness); }
  double outlet_channel_height() const { return splitter_bottom(); }
  double fluid_area() const;
  double perimeter() const;

  // Throws GeometryError when the shape is inconsistent.
  void validate() const;

  friend bool operator==(const VesselShape&, const VesselShape&) = default;
};

enum class CellFlag : std::uint8_t { kSolid = 0, kFluid = 1 };

enum class Patch : std::uint8_t { kInlet, kOutletUpper, kOutletLower, kWall };

// Role of a staggered face for the flow solver.
enum class FaceKind : std::uint8_t {
  kActive,  // both neighbour cells fluid; velocity is a solver unknown
  kInlet,   // x = 0, prescribed velocity
  kOutlet,  // x = L, zero-gradient velocity with prescribed pressure
  kWall,    // exactly one fluid neighbour; no-penetration
  kDead,    // no fluid neighbour
};

enum class Axis : std::uint8_t { kX, kY };

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// A boundary face of the fluid region. `normal` is the axis the face is
/// perpendicular to, (i, j) its index in the matching staggered array.
struct BoundaryFace {
  Patch patch;
  Axis normal;
  int i;
  int j;
  int cell;  // linear index of the adjacent fluid cell
  Point2 center;
};

/// Uniform Cartesian mask of a VesselShape. Cells are indexed linearly as
/// i + nx * j. u-faces are (nx + 1) x ny, v-faces nx x (ny + 1).
class Mesh {
 public:
  Mesh(const VesselShape& shape, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  const VesselShape& shape() const { return shape_; }

  int cell_count() const { return nx_ * ny_; }
  int cell_index(int i, int j) const { return i + nx_ * j; }
  bool in_range(int i, int j) const { return i >= 0 && i < nx_ && j >= 0 && j < ny_; }
  bool is_fluid(int i, int j) const {
    return in_range(i, j) && flags_[cell_index(i, j)] == CellFlag::kFluid;
  }
  bool is_fluid(int cell) const { return flags_[cell] == CellFlag::kFluid; }
  std::span<const CellFlag> cell_flags() const { return flags_; }

  // Linear indices of fluid cells in ascending order, and their centers.
  std::span<const int> fluid_cells() const { return fluid_cells_; }
  int fluid_count() const { return static_cast<int>(fluid_cells_.size()); }
  Point2 cell_center(int i, int j) const { return {(i + 0.5) * dx_, (j + 0.5) * dy_}; }
  Point2 cell_center(int cell) const { return cell_center(cell % nx_, cell / nx_); }
  std::span<const Point2> cell_centers() const { return centers_; }
  double cell_area() const { return dx_ * dy_; }
  double fluid_area() const { return fluid_count() * cell_area(); }

  int u_index(int i, int j) const { return i + (nx_ + 1) * j; }
  int v_index(int i, int j) const { return i + nx_ * j; }
  int u_face_count() const { return (nx_ + 1) * ny_; }
  int v_face_count() const { return nx_ * (ny_ + 1); }
  FaceKind u_kind(int i, int j) const { return u_kinds_[u_index(i, j)]; }
  FaceKind v_kind(int i, int j) const { return v_kinds_[v_index(i, j)]; }

  std::span<const BoundaryFace> boundary_faces() const { return boundary_; }
  std::vector<BoundaryFace> patch_faces(Patch patch) const;

  // Fluid cell whose center is nearest to p (ties resolved by lower index).
  int nearest_fluid_cell(Point2 p) const;

 private:
  void classify_faces();
  void check_connectivity() const;

  VesselShape shape_;
  int nx_;
  int ny_;
  double dx_;
  double dy_;
  std::vector<CellFlag> flags_;
  std::vector<int> fluid_cells_;
  std::vector<Point2> centers_;
  std::vector<FaceKind> u_kinds_;
  std::vector<FaceKind> v_kinds_;
  std::vector<BoundaryFace> boundary_;
};

Mesh build_vessel_mesh(const VesselShape& shape, int nx, int ny);

struct SensorSet {
  std::vector<int> sensor_cells;         // linear cell indices
  std::vector<int> stabilization_cells;  // first fluid column next to the inlet

  friend bool operator==(const SensorSet&, const SensorSet&) = default;
};

// Radius, in cells, of the neighbourhood around the divider leading edge that
// counts as "near the bifurcation".
inline constexpr int kBifurcationRadiusCells = 5;
inline constexpr double kBifurcationQuota = 0.2;

// Point at the middle of the divider's upstream face; for a plain channel, the
// channel midpoint.
Point2 bifurcation_point(const Mesh& mesh);
bool near_bifurcation(const Mesh& mesh, int cell);

/// Number of sensors for a fraction of the fluid cells, rounded half up.
int sensor_count(const Mesh& mesh, double fraction);

/// Stratified sensor placement: at least 20% of the sensors near the divider
/// leading edge (the nearest cell always first), the rest one per contiguous
/// stratum of the remaining fluid cells.
SensorSet select_sensors(const Mesh& mesh, double fraction, std::uint64_t seed,
                         std::optional<int> count_override = std::nullopt);

/// Precomputed fine-to-coarse cell averaging between two meshes of one shape.
class CellAverager {
 public:
  CellAverager(const Mesh& fine, const Mesh& coarse, std::span<const int> coarse_cells);

  std::vector<double> apply(std::span<const double> fine_field) const;
  std::span<const int> coarse_cells() const { return coarse_cells_; }

 private:
  std::vector<int> coarse_cells_;
  std::vector<std::vector<int>> members_;
};

/// Averages a per-cell fine-mesh field over the fine cells whose centers fall
/// inside each coarse sensor cell.
std::vector<double> interpolate_to_sensors(std::span<const double> fine_field,
                                           const SensorSet& coarse_sensors, const Mesh& fine_mesh,
                                           const Mesh& coarse_mesh);

}  // namespace hemoda
