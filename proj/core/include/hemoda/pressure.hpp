#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hemoda/geometry.hpp"

namespace hemoda {

enum class PoissonMethod { kCholesky, kRelaxation };

struct PoissonOptions {
  PoissonMethod method = PoissonMethod::kCholesky;
  double tolerance = 1e-10;  // max |residual| in divergence units (1/s)
  int max_iterations = 50000;
};

/// Discrete pressure Poisson operator on the fluid cells of a mesh: Neumann on
/// walls and inlet, Dirichlet at the outlet faces. Solves
///   sum_f (q_nb - q_c) / h^2 = div_c
/// for the scaled pressure q = p dt / rho. Immutable after construction and
/// safe to share across threads.
class PressureSolver {
 public:
  PressureSolver(const Mesh& mesh, PoissonOptions options);
  ~PressureSolver();
  PressureSolver(PressureSolver&&) noexcept;
  PressureSolver& operator=(PressureSolver&&) noexcept;

  /// `divergence` and `q` are per-cell arrays (nx * ny). `q` holds the initial
  /// guess on entry (used by relaxation) and the solution on exit. Returns the
  /// number of relaxation sweeps, or refinement passes for Cholesky.
  int solve(std::span<const double> divergence, double q_outlet, std::span<double> q) const;

  /// max |A q - b| over fluid cells, in the same units as the divergence.
  double residual(std::span<const double> divergence, double q_outlet,
                  std::span<const double> q) const;

  const PoissonOptions& options() const { return options_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  PoissonOptions options_;
};

}  // namespace hemoda
