#pragma once

#include <span>
#include <vector>

namespace hemoda {

struct ErrorReport {
  double mre_percent = 0.0;
  std::vector<double> per_step_percent;  // NaN where the true value was excluded
  double coverage = 0.0;                 // fraction of steps with truth inside the band
  int n_steps = 0;
  int n_excluded = 0;
};

/// True values with magnitude below this are left out of the relative error.
inline constexpr double kExcludeBelow = 1e-12;

/// Per-step relative errors |true - pred| / |true| in percent.
std::vector<double> relative_errors(std::span<const double> truth, std::span<const double> pred);

/// Mean of the per-step relative errors in percent, over non-excluded steps.
/// Throws std::invalid_argument for empty or mismatched input, or when every
/// step is excluded.
double mean_relative_error(std::span<const double> truth, std::span<const double> pred);

struct Band {
  double mean;
  double lo;
  double hi;
};

/// mean +/- z sd of a sample, with the 1/S variance.
Band confidence_band(std::span<const double> members, double z = 1.96);

/// Fraction of steps with lo <= truth <= hi.
double coverage(std::span<const double> truth, std::span<const double> lo,
                std::span<const double> hi);

ErrorReport error_report(std::span<const double> truth, std::span<const double> pred,
                         std::span<const double> lo, std::span<const double> hi);

}  // namespace hemoda
