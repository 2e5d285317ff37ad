#pragma once

// Scalar test system with an augmented inlet parameter:
//   chi' = a chi + b u + w,  u' = u,  y = chi + v.
// The exact Kalman filter of the augmented state is the reference the
// ensemble filter is compared against.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hemoda/ensisf.hpp"

namespace hemoda::oracle {

struct LinearGaussianCase {
  double a = 0.9;
  double b = 0.1;
  double q = 1e-4;
  double r = 1e-8;
  int steps = 50;
  double true_u = 0.2;
  double true_chi0 = 0.1;
  PriorSpec prior{0.1, 1e-4, 0.1, 4e-4};
};

struct LinearGaussianRun {
  std::vector<Eigen::Vector2d> kf_mean;   // (u, chi) after each update
  std::vector<Eigen::Vector2d> kf_gain;
  std::vector<Eigen::Vector2d> ens_mean;
  std::vector<Eigen::Vector2d> ens_gain;
};

inline LinearGaussianRun run_linear_gaussian(const LinearGaussianCase& c, int members,
                                             std::uint64_t seed) {
  // Truth and observations come from a generator unrelated to the filter streams.
  std::mt19937_64 gen(seed * 7919 + 17);
  std::normal_distribution<double> n01;
  std::vector<double> obs(c.steps + 1);
  double chi = c.true_chi0;
  for (int k = 1; k <= c.steps; ++k) {
    chi = c.a * chi + c.b * c.true_u + std::sqrt(c.q) * n01(gen);
    obs[k] = chi + std::sqrt(c.r) * n01(gen);
  }

  Eigen::Matrix2d f;
  f << 1.0, 0.0, c.b, c.a;
  const Eigen::RowVector2d h(0.0, 1.0);
  Eigen::Vector2d m(c.prior.param_mean, c.prior.state_mean);
  Eigen::Matrix2d p = Eigen::Vector2d(c.prior.param_cov, c.prior.state_cov).asDiagonal();

  JointEnsemble ens = init_ensemble(c.prior, members, {1, 1}, seed);
  const ForwardModel model = [&](int, std::span<const double> u, std::span<double> x) {
    x[0] = c.a * x[0] + c.b * u[0];
  };
  const LinearObservation hop(2, {{{1, 1.0}}});
  const NoiseSpec noise{c.q, c.r, 0.0};
  UpdateConfig cfg;
  cfg.constraint_enabled = false;
  cfg.jitter = 0.0;

  LinearGaussianRun out;
  for (int k = 1; k <= c.steps; ++k) {
    m = f * m;
    p = f * p * f.transpose();
    p(1, 1) += c.q;
    const double s = (h * p * h.transpose())(0, 0) + c.r;
    const Eigen::Vector2d kg = p * h.transpose() / s;
    m += kg * (obs[k] - h * m);
    p = (Eigen::Matrix2d::Identity() - kg * h) * p;
    out.kf_mean.push_back(m);
    out.kf_gain.push_back(kg);

    forecast(ens, model, noise, seed, k);
    Eigen::VectorXd y(1);
    y << obs[k];
    const Eigen::MatrixXd g = assimilate_observation(ens, hop, y, noise, cfg, seed, k);
    out.ens_mean.push_back(ensemble_mean(ens));
    out.ens_gain.push_back(g.col(0));
  }
  return out;
}

// RMS over steps of the state-mean deviation, relative to the RMS of the exact state mean.
inline double state_mean_deviation(const LinearGaussianRun& r) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < r.kf_mean.size(); ++k) {
    num += std::pow(r.ens_mean[k](1) - r.kf_mean[k](1), 2);
    den += std::pow(r.kf_mean[k](1), 2);
  }
  return std::sqrt(num / den);
}

// Mean over steps of |K_ens - K| / |K| in the Euclidean norm.
inline double gain_deviation(const LinearGaussianRun& r) {
  double acc = 0.0;
  for (std::size_t k = 0; k < r.kf_gain.size(); ++k)
    acc += (r.ens_gain[k] - r.kf_gain[k]).norm() / r.kf_gain[k].norm();
  return acc / static_cast<double>(r.kf_gain.size());
}

// Same, for the parameter entry of the gain alone.
inline double parameter_gain_deviation(const LinearGaussianRun& r) {
  double acc = 0.0;
  for (std::size_t k = 0; k < r.kf_gain.size(); ++k)
    acc += std::abs(r.ens_gain[k](0) - r.kf_gain[k](0)) / std::abs(r.kf_gain[k](0));
  return acc / static_cast<double>(r.kf_gain.size());
}

}  // namespace hemoda::oracle
