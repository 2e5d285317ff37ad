#include "hemoda/flow_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemoda {

namespace {

double interpolate(const std::vector<std::pair<double, double>>& samples, double t) {
  if (t <= samples.front().first) return samples.front().second;
  if (t >= samples.back().first) return samples.back().second;
  const auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double x, const auto& s) { return x < s.first; });
  const auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

void check_increasing(const std::vector<std::pair<double, double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("time series needs at least one sample");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!std::isfinite(samples[k].first) || !std::isfinite(samples[k].second))
      throw std::invalid_argument("time series samples must be finite");
    if (k > 0 && !(samples[k].first > samples[k - 1].first))
      throw std::invalid_argument("time series times must be strictly increasing");
  }
}

}  // namespace

FlowState FlowState::zeros(const Mesh& mesh, double t) {
  FlowState s;
  s.u.assign(mesh.u_face_count(), 0.0);
  s.v.assign(mesh.v_face_count(), 0.0);
  s.p.assign(mesh.cell_count(), 0.0);
  s.t = t;
  return s;
}

bool FlowState::matches(const Mesh& mesh) const {
  return u.size() == static_cast<std::size_t>(mesh.u_face_count()) &&
         v.size() == static_cast<std::size_t>(mesh.v_face_count()) &&
         p.size() == static_cast<std::size_t>(mesh.cell_count());
}

InletSpec InletSpec::constant(double value) {
  if (!std::isfinite(value) || value < 0.0)
    throw std::invalid_argument("constant inlet value must be finite and non-negative");
  InletSpec s;
  s.kind_ = InletKind::kConstant;
  s.value_ = value;
  return s;
}

InletSpec InletSpec::time_series(std::vector<std::pair<double, double>> samples) {
  check_increasing(samples);
  InletSpec s;
  s.kind_ = InletKind::kTimeSeries;
  s.fn_ = [samples = std::move(samples)](double t) { return interpolate(samples, t); };
  return s;
}

InletSpec InletSpec::time_function(std::function<double(double)> fn) {
  InletSpec s;
  s.kind_ = InletKind::kTimeSeries;
  s.fn_ = std::move(fn);
  return s;
}

InletSpec InletSpec::parabolic(std::function<double(double)> vmax, double half_height) {
  if (!(half_height > 0.0)) throw std::invalid_argument("parabolic inlet needs R > 0");
  InletSpec s;
  s.kind_ = InletKind::kParabolic;
  s.fn_ = std::move(vmax);
  s.half_height_ = half_height;
  return s;
}

double InletSpec::amplitude(double t) const { return kind_ == InletKind::kConstant ? value_ : fn_(t); }

double InletSpec::shape(double y, double height) const {
  if (kind_ != InletKind::kParabolic) return 1.0;
  const double r = y - 0.5 * height;
  if (std::abs(r) >= half_height_) return 0.0;
  return parabolic_inlet(1.0, r, half_height_);
}

double InletSpec::velocity(double t, double y, double height) const {
  return amplitude(t) * shape(y, height);
}

double parabolic_inlet(double vmax, double r, double half_height) {
  const double s = r / half_height;
  return vmax * (1.0 - s * s);
}

OutletSpec OutletSpec::constant(double pressure) {
  if (!std::isfinite(pressure)) throw std::invalid_argument("outlet pressure must be finite");
  OutletSpec s;
  s.samples_ = {{0.0, pressure}};
  return s;
}

OutletSpec OutletSpec::time_series(std::vector<std::pair<double, double>> samples) {
  check_increasing(samples);
  OutletSpec s;
  s.samples_ = std::move(samples);
  return s;
}

double OutletSpec::pressure(double t) const { return interpolate(samples_, t); }

}  // namespace hemoda
