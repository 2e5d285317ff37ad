#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "hemoda/geometry.hpp"

namespace hemoda {

/// Velocity on the staggered faces and pressure at cell centers.
struct FlowState {
  std::vector<double> u;  // (nx + 1) * ny, x-velocity on vertical faces
  std::vector<double> v;  // nx * (ny + 1), y-velocity on horizontal faces
  std::vector<double> p;  // nx * ny, pressure (solid cells hold 0)
  double t = 0.0;

  static FlowState zeros(const Mesh& mesh, double t = 0.0);
  bool matches(const Mesh& mesh) const;

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

enum class InletKind { kConstant, kTimeSeries, kParabolic };

/// Prescribed inlet velocity. `constant` and `time_series` are uniform across
/// the inlet; `parabolic` scales V(r) = vmax(t) (1 - (r/R)^2) about the inlet
/// midline with half-height R.
class InletSpec {
 public:
  static InletSpec constant(double value);
  static InletSpec time_series(std::vector<std::pair<double, double>> samples);
  static InletSpec time_function(std::function<double(double)> fn);
  static InletSpec parabolic(std::function<double(double)> vmax, double half_height);

  InletKind kind() const { return kind_; }
  // Uniform value, or vmax for the parabolic profile, at time t.
  double amplitude(double t) const;
  // Face velocity at height y of an inlet of total height `height`.
  double velocity(double t, double y, double height) const;
  // Ratio of the profile at height y to the amplitude (1 for uniform inlets).
  double shape(double y, double height) const;
  double half_height() const { return half_height_; }

 private:
  InletKind kind_ = InletKind::kConstant;
  double value_ = 0.0;
  double half_height_ = 0.0;
  std::function<double(double)> fn_;
};

double parabolic_inlet(double vmax, double r, double half_height);

/// Reference pressure applied at both outlets, linearly interpolated in time.
class OutletSpec {
 public:
  OutletSpec() = default;
  static OutletSpec constant(double pressure);
  static OutletSpec time_series(std::vector<std::pair<double, double>> samples);

  double pressure(double t) const;
  std::span<const std::pair<double, double>> samples() const { return samples_; }

 private:
  std::vector<std::pair<double, double>> samples_{{0.0, 0.0}};
};

}  // namespace hemoda
