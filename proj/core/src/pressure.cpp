#include "hemoda/pressure.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hemoda/errors.hpp"

namespace hemoda {

struct PressureSolver::Impl {
  struct Row {
    int cell;
    int count = 0;
    std::array<int, 4> neighbour{};      // unknown indices
    std::array<double, 4> weight{};      // 1 / h^2
    double outlet_weight = 0.0;          // sum of 2 / dx^2 over outlet faces
    double diagonal = 0.0;
  };

  std::vector<int> unknown_of_cell;
  std::vector<Row> rows;
  std::vector<int> red;
  std::vector<int> black;
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> cholesky;
  double omega = 1.0;
  double max_diagonal = 0.0;

  // (L q)_c - div_c for one row.
  double row_residual(const Row& r, std::span<const double> divergence, double q_outlet,
                      std::span<const double> q) const {
    double lap = -r.diagonal * q[r.cell] + r.outlet_weight * q_outlet;
    for (int k = 0; k < r.count; ++k) lap += r.weight[k] * q[rows[r.neighbour[k]].cell];
    return lap - divergence[r.cell];
  }
};

PressureSolver::PressureSolver(const Mesh& mesh, PoissonOptions options)
    : impl_(std::make_unique<Impl>()), options_(options) {
  auto& im = *impl_;
  const double wx = 1.0 / (mesh.dx() * mesh.dx());
  const double wy = 1.0 / (mesh.dy() * mesh.dy());
  im.unknown_of_cell.assign(mesh.cell_count(), -1);
  for (int c : mesh.fluid_cells()) {
    im.unknown_of_cell[c] = static_cast<int>(im.rows.size());
    im.rows.push_back({.cell = c});
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (auto& r : im.rows) {
    const int i = r.cell % mesh.nx();
    const int j = r.cell / mesh.nx();
    auto link = [&](FaceKind kind, int ni, int nj, double w) {
      if (kind == FaceKind::kActive) {
        r.neighbour[r.count] = im.unknown_of_cell[mesh.cell_index(ni, nj)];
        r.weight[r.count] = w;
        ++r.count;
        r.diagonal += w;
      } else if (kind == FaceKind::kOutlet) {
        r.outlet_weight += 2.0 * w;
        r.diagonal += 2.0 * w;
      }
    };
    link(mesh.u_kind(i, j), i - 1, j, wx);
    link(mesh.u_kind(i + 1, j), i + 1, j, wx);
    link(mesh.v_kind(i, j), i, j - 1, wy);
    link(mesh.v_kind(i, j + 1), i, j + 1, wy);
    im.max_diagonal = std::max(im.max_diagonal, r.diagonal);
    const int row = im.unknown_of_cell[r.cell];
    triplets.emplace_back(row, row, r.diagonal);
    for (int k = 0; k < r.count; ++k) triplets.emplace_back(row, r.neighbour[k], -r.weight[k]);
    ((i + j) % 2 == 0 ? im.red : im.black).push_back(row);
  }

  if (options_.method == PoissonMethod::kCholesky) {
    const auto n = static_cast<Eigen::Index>(im.rows.size());
    im.matrix.resize(n, n);
    im.matrix.setFromTriplets(triplets.begin(), triplets.end());
    im.cholesky.compute(im.matrix);
    if (im.cholesky.info() != Eigen::Success)
      throw PoissonNonConvergence("pressure operator is not positive definite (no outlet?)");
  } else {
    // Jacobi spectral radius of the slowest mode: Dirichlet-Neumann along x,
    // Neumann-Neumann along y.
    const double cx = std::cos(std::numbers::pi / (2.0 * mesh.nx()));
    const double rho = (cx * wx + wy) / (wx + wy);
    im.omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
  }
}

PressureSolver::~PressureSolver() = default;
PressureSolver::PressureSolver(PressureSolver&&) noexcept = default;
PressureSolver& PressureSolver::operator=(PressureSolver&&) noexcept = default;

double PressureSolver::residual(std::span<const double> divergence, double q_outlet,
                                std::span<const double> q) const {
  double worst = 0.0;
  for (const auto& r : impl_->rows)
    worst = std::max(worst, std::abs(impl_->row_residual(r, divergence, q_outlet, q)));
  return worst;
}

int PressureSolver::solve(std::span<const double> divergence, double q_outlet,
                          std::span<double> q) const {
  const auto& im = *impl_;
  const auto n = static_cast<Eigen::Index>(im.rows.size());

  if (options_.method == PoissonMethod::kCholesky) {
    Eigen::VectorXd b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& r = im.rows[k];
      b[k] = -divergence[r.cell] + r.outlet_weight * q_outlet;
    }
    Eigen::VectorXd x = im.cholesky.solve(b);
    for (int pass = 0;; ++pass) {
      for (Eigen::Index k = 0; k < n; ++k) q[im.rows[k].cell] = x[k];
      // The residual cannot be evaluated below its own round-off.
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * im.max_diagonal *
                           std::max(x.lpNorm<Eigen::Infinity>(), std::abs(q_outlet));
      if (residual(divergence, q_outlet, q) <= std::max(options_.tolerance, floor)) return pass;
      if (pass == 3)
        throw PoissonNonConvergence("pressure residual above tolerance after refinement");
      const Eigen::VectorXd r = b - im.matrix * x;
      x += im.cholesky.solve(r);
    }
  }

  const double omega = im.omega;
  auto sweep = [&](const std::vector<int>& colour) {
    for (int k : colour) {
      const auto& r = im.rows[k];
      double sum = r.outlet_weight * q_outlet - divergence[r.cell];
      for (int m = 0; m < r.count; ++m) sum += r.weight[m] * q[im.rows[r.neighbour[m]].cell];
      q[r.cell] += omega * (sum / r.diagonal - q[r.cell]);
    }
  };
  auto converged = [&] {
    double qmax = std::abs(q_outlet);
    for (const auto& r : im.rows) qmax = std::max(qmax, std::abs(q[r.cell]));
    const double floor =
        64.0 * std::numeric_limits<double>::epsilon() * im.max_diagonal * qmax;
    return residual(divergence, q_outlet, q) <= std::max(options_.tolerance, floor);
  };
  constexpr int kCheckEvery = 8;
  for (int it = 0; it < options_.max_iterations; it += kCheckEvery) {
    if (converged()) return it;
    for (int s = 0; s < kCheckEvery; ++s) {
      sweep(im.red);
      sweep(im.black);
    }
  }
  if (converged()) return options_.max_iterations;
  throw PoissonNonConvergence("pressure relaxation hit the iteration cap of " +
                              std::to_string(options_.max_iterations));
}

}  // namespace hemoda
