#include "hemoda/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hemoda/errors.hpp"
#include "hemoda/random.hpp"

namespace hemoda {

VesselShape VesselShape::plain_channel(double length, double height) {
  VesselShape shape;
  shape.total_length = length;
  shape.total_height = height;
  shape.trunk_length = length;
  shape.splitter_length = 0.0;
  shape.splitter_thickness = 0.0;
  return shape;
}

double VesselShape::fluid_area() const {
  return total_length * total_height - splitter_length * splitter_thickness;
}

double VesselShape::perimeter() const {
  double p = 2.0 * (total_length + total_height);
  if (has_splitter()) p += 2.0 * splitter_length + 2.0 * splitter_thickness;
  return p;
}

void VesselShape::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(total_length) || !positive(total_height))
    throw GeometryError("vessel length and height must be positive");
  if (!(trunk_length >= 0.0) || !(splitter_length >= 0.0) || !(splitter_thickness >= 0.0))
    throw GeometryError("vessel dimensions must be non-negative");
  if (has_splitter()) {
    if (!(splitter_thickness > 0.0))
      throw GeometryError("splitter_thickness must be positive when a splitter is present");
    if (!(splitter_thickness < total_height))
      throw GeometryError("splitter_thickness must be smaller than total_height");
  }
  if (trunk_length + splitter_length > total_length * (1.0 + 1e-12))
    throw GeometryError("trunk_length + splitter_length exceeds total_length");
}

Mesh::Mesh(const VesselShape& shape, int nx, int ny) : shape_(shape), nx_(nx), ny_(ny) {
  shape_.validate();
  const int min_cells = shape_.has_splitter() ? 4 : 1;
  if (nx < min_cells || ny < min_cells)
    throw GeometryError("mesh needs at least " + std::to_string(min_cells) + " cells per axis");
  dx_ = shape_.total_length / nx;
  dy_ = shape_.total_height / ny;

  flags_.assign(static_cast<std::size_t>(nx) * ny, CellFlag::kFluid);
  if (shape_.has_splitter()) {
    const double x0 = shape_.trunk_length;
    const double x1 = shape_.trunk_length + shape_.splitter_length;
    const double y0 = shape_.splitter_bottom();
    const double y1 = shape_.splitter_top();
    int solid_rows = 0;
    for (int j = 0; j < ny; ++j) {
      const double y = (j + 0.5) * dy_;
      if (y > y0 && y < y1) ++solid_rows;
    }
    int solid_cols = 0;
    for (int i = 0; i < nx; ++i) {
      const double x = (i + 0.5) * dx_;
      if (x > x0 && x < x1) ++solid_cols;
    }
    if (solid_rows == 0 || solid_cols == 0)
      throw ResolutionTooCoarse("splitter maps to zero solid cells at " + std::to_string(nx) +
                                "x" + std::to_string(ny));
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Point2 c = cell_center(i, j);
        if (c.x > x0 && c.x < x1 && c.y > y0 && c.y < y1)
          flags_[cell_index(i, j)] = CellFlag::kSolid;
      }
    }
    if ((0.5 * dy_) > y0)
      throw ResolutionTooCoarse("outlet channels are not resolved by any fluid row");
  }

  for (int c = 0; c < cell_count(); ++c) {
    if (flags_[c] == CellFlag::kFluid) {
      fluid_cells_.push_back(c);
      centers_.push_back(cell_center(c));
    }
  }
  classify_faces();
  check_connectivity();
}

void Mesh::classify_faces() {
  u_kinds_.assign(u_face_count(), FaceKind::kDead);
  v_kinds_.assign(v_face_count(), FaceKind::kDead);
  const double mid = 0.5 * shape_.total_height;

  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      const bool left = is_fluid(i - 1, j);
      const bool right = is_fluid(i, j);
      FaceKind kind = FaceKind::kDead;
      if (i == 0) {
        kind = right ? FaceKind::kInlet : FaceKind::kDead;
      } else if (i == nx_) {
        kind = left ? FaceKind::kOutlet : FaceKind::kDead;
      } else if (left && right) {
        kind = FaceKind::kActive;
      } else if (left || right) {
        kind = FaceKind::kWall;
      }
      u_kinds_[u_index(i, j)] = kind;
      const Point2 center{i * dx_, (j + 0.5) * dy_};
      switch (kind) {
        case FaceKind::kInlet:
          boundary_.push_back({Patch::kInlet, Axis::kX, i, j, cell_index(i, j), center});
          break;
        case FaceKind::kOutlet:
          boundary_.push_back({center.y >= mid ? Patch::kOutletUpper : Patch::kOutletLower, Axis::kX,
                               i, j, cell_index(i - 1, j), center});
          break;
        case FaceKind::kWall:
          boundary_.push_back({Patch::kWall, Axis::kX, i, j,
                               left ? cell_index(i - 1, j) : cell_index(i, j), center});
          break;
        default:
          break;
      }
    }
  }
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const bool below = is_fluid(i, j - 1);
      const bool above = is_fluid(i, j);
      FaceKind kind = FaceKind::kDead;
      if (below && above) {
        kind = FaceKind::kActive;
      } else if (below || above) {
        kind = FaceKind::kWall;
        boundary_.push_back({Patch::kWall, Axis::kY, i, j,
                             below ? cell_index(i, j - 1) : cell_index(i, j),
                             {(i + 0.5) * dx_, j * dy_}});
      }
      v_kinds_[v_index(i, j)] = kind;
    }
  }
}

void Mesh::check_connectivity() const {
  std::vector<char> seen(cell_count(), 0);
  std::deque<int> queue;
  for (int j = 0; j < ny_; ++j) {
    if (is_fluid(0, j)) {
      seen[cell_index(0, j)] = 1;
      queue.push_back(cell_index(0, j));
    }
  }
  int reached = 0;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    ++reached;
    const int i = c % nx_;
    const int j = c / nx_;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (is_fluid(ni, nj) && !seen[cell_index(ni, nj)]) {
        seen[cell_index(ni, nj)] = 1;
        queue.push_back(cell_index(ni, nj));
      }
    }
  }
  if (reached != fluid_count())
    throw GeometryError("fluid region is not connected to the inlet");
}

std::vector<BoundaryFace> Mesh::patch_faces(Patch patch) const {
  std::vector<BoundaryFace> out;
  for (const auto& f : boundary_)
    if (f.patch == patch) out.push_back(f);
  return out;
}

int Mesh::nearest_fluid_cell(Point2 p) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int c : fluid_cells_) {
    const Point2 q = cell_center(c);
    const double d2 = (q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

Mesh build_vessel_mesh(const VesselShape& shape, int nx, int ny) { return Mesh(shape, nx, ny); }

Point2 bifurcation_point(const Mesh& mesh) {
  const auto& s = mesh.shape();
  if (!s.has_splitter()) return {0.5 * s.total_length, 0.5 * s.total_height};
  return {s.trunk_length, 0.5 * s.total_height};
}

bool near_bifurcation(const Mesh& mesh, int cell) {
  const Point2 e = bifurcation_point(mesh);
  const Point2 c = mesh.cell_center(cell);
  return std::abs(c.x - e.x) / mesh.dx() <= kBifurcationRadiusCells &&
         std::abs(c.y - e.y) / mesh.dy() <= kBifurcationRadiusCells;
}

int sensor_count(const Mesh& mesh, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw SensorSelectionError("sensor fraction must lie in (0, 1)");
  return static_cast<int>(std::floor(fraction * mesh.fluid_count() + 0.5));
}

SensorSet select_sensors(const Mesh& mesh, double fraction, std::uint64_t seed,
                         std::optional<int> count_override) {
  const int base = sensor_count(mesh, fraction);
  const int count = count_override.value_or(base);
  if (count < 1) throw SensorSelectionError("sensor count must be at least 1");
  if (count > mesh.fluid_count())
    throw SensorSelectionError("requested " + std::to_string(count) + " sensors but mesh has only " +
                               std::to_string(mesh.fluid_count()) + " fluid cells");

  KeyedStream rng(seed, StreamTag::kSensorPlacement, {static_cast<std::uint64_t>(count)});
  std::vector<char> taken(mesh.cell_count(), 0);
  std::vector<int> chosen;
  chosen.reserve(count);

  const int first = mesh.nearest_fluid_cell(bifurcation_point(mesh));
  if (first < 0 || first >= mesh.cell_count()) throw SensorSelectionError("mesh has no fluid cells");
  chosen.push_back(first);
  taken[first] = 1;

  std::vector<int> near;
  for (int c : mesh.fluid_cells())
    if (c != first && near_bifurcation(mesh, c)) near.push_back(c);
  const int quota =
      std::max(1, static_cast<int>(std::ceil(kBifurcationQuota * count - 1e-12)));
  const int extra_near = std::min<int>(quota - 1, static_cast<int>(near.size()));
  for (int k = 0; k < extra_near; ++k) {
    const auto pick = k + static_cast<int>(rng.below(near.size() - k));
    std::swap(near[k], near[pick]);
    chosen.push_back(near[k]);
    taken[near[k]] = 1;
  }

  // Remaining sensors: one per stratum of the untaken cells ordered along the
  // vessel axis.
  std::vector<int> pool;
  for (int i = 0; i < mesh.nx(); ++i)
    for (int j = 0; j < mesh.ny(); ++j)
      if (mesh.is_fluid(i, j) && !taken[mesh.cell_index(i, j)]) pool.push_back(mesh.cell_index(i, j));
  const int rest = count - static_cast<int>(chosen.size());
  const auto pool_size = static_cast<long long>(pool.size());
  for (int s = 0; s < rest; ++s) {
    const long long lo = pool_size * s / rest;
    const long long hi = pool_size * (s + 1) / rest;
    const auto pick = lo + static_cast<long long>(rng.below(static_cast<std::uint64_t>(hi - lo)));
    chosen.push_back(pool[pick]);
  }

  SensorSet set;
  set.sensor_cells = std::move(chosen);
  std::sort(set.sensor_cells.begin(), set.sensor_cells.end());
  for (int j = 0; j < mesh.ny(); ++j)
    if (mesh.is_fluid(0, j)) set.stabilization_cells.push_back(mesh.cell_index(0, j));
  return set;
}

CellAverager::CellAverager(const Mesh& fine, const Mesh& coarse, std::span<const int> coarse_cells)
    : coarse_cells_(coarse_cells.begin(), coarse_cells.end()), members_(coarse_cells.size()) {
  if (!(fine.shape() == coarse.shape()))
    throw GeometryError("fine and coarse meshes are built from different vessel shapes");
  std::vector<int> slot(coarse.cell_count(), -1);
  for (std::size_t k = 0; k < coarse_cells_.size(); ++k) {
    const int c = coarse_cells_[k];
    if (c < 0 || c >= coarse.cell_count() || !coarse.is_fluid(c))
      throw GeometryError("sensor cell " + std::to_string(c) + " is not a coarse fluid cell");
    slot[c] = static_cast<int>(k);
  }
  for (int f : fine.fluid_cells()) {
    const Point2 p = fine.cell_center(f);
    const int ci = static_cast<int>(std::floor(p.x / coarse.dx()));
    const int cj = static_cast<int>(std::floor(p.y / coarse.dy()));
    if (!coarse.in_range(ci, cj)) continue;
    const int s = slot[coarse.cell_index(ci, cj)];
    if (s >= 0) members_[s].push_back(f);
  }
  // Several sensors may share one coarse cell; fill duplicates.
  for (std::size_t k = 0; k < coarse_cells_.size(); ++k) {
    const int s = slot[coarse_cells_[k]];
    if (static_cast<std::size_t>(s) != k) members_[k] = members_[s];
    if (members_[k].empty())
      throw GeometryError("coarse cell " + std::to_string(coarse_cells_[k]) +
                          " contains no fine cell centers");
  }
}

std::vector<double> CellAverager::apply(std::span<const double> fine_field) const {
  std::vector<double> out(members_.size(), 0.0);
  for (std::size_t k = 0; k < members_.size(); ++k) {
    double sum = 0.0;
    for (int f : members_[k]) sum += fine_field[f];
    out[k] = sum / static_cast<double>(members_[k].size());
  }
  return out;
}

std::vector<double> interpolate_to_sensors(std::span<const double> fine_field,
                                           const SensorSet& coarse_sensors, const Mesh& fine_mesh,
                                           const Mesh& coarse_mesh) {
  return CellAverager(fine_mesh, coarse_mesh, coarse_sensors.sensor_cells).apply(fine_field);
}

}  // namespace hemoda
