#include "hemoda/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hemoda {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0) throw std::invalid_argument("trajectory is empty");
  if (a != b) throw std::invalid_argument("trajectories differ in length");
}

}  // namespace

std::vector<double> relative_errors(std::span<const double> truth, std::span<const double> pred) {
  check_lengths(truth.size(), pred.size());
  std::vector<double> out(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    out[k] = std::abs(truth[k]) < kExcludeBelow
                 ? std::numeric_limits<double>::quiet_NaN()
                 : 100.0 * std::abs(truth[k] - pred[k]) / std::abs(truth[k]);
  }
  return out;
}

double mean_relative_error(std::span<const double> truth, std::span<const double> pred) {
  const auto errors = relative_errors(truth, pred);
  double sum = 0.0;
  int n = 0;
  for (double e : errors)
    if (!std::isnan(e)) {
      sum += e;
      ++n;
    }
  if (n == 0) throw std::invalid_argument("every true value is zero");
  return sum / n;
}

Band confidence_band(std::span<const double> members, double z) {
  if (members.empty()) throw std::invalid_argument("band needs at least one member");
  double mean = 0.0;
  for (double x : members) mean += x;
  mean /= static_cast<double>(members.size());
  double var = 0.0;
  for (double x : members) var += (x - mean) * (x - mean);
  var /= static_cast<double>(members.size());
  const double half = z * std::sqrt(var);
  return {mean, mean - half, mean + half};
}

double coverage(std::span<const double> truth, std::span<const double> lo,
                std::span<const double> hi) {
  check_lengths(truth.size(), lo.size());
  check_lengths(truth.size(), hi.size());
  int inside = 0;
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (lo[k] <= truth[k] && truth[k] <= hi[k]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

ErrorReport error_report(std::span<const double> truth, std::span<const double> pred,
                         std::span<const double> lo, std::span<const double> hi) {
  ErrorReport r;
  r.per_step_percent = relative_errors(truth, pred);
  r.n_steps = static_cast<int>(truth.size());
  for (double e : r.per_step_percent)
    if (std::isnan(e)) ++r.n_excluded;
  r.mre_percent = mean_relative_error(truth, pred);
  r.coverage = coverage(truth, lo, hi);
  return r;
}

}  // namespace hemoda
