#include "hemoda/ensisf.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "hemoda/errors.hpp"
#include "hemoda/random.hpp"

namespace hemoda {

void PriorSpec::validate() const {
  if (!(state_cov >= 0.0) || !(param_cov >= 0.0))
    throw std::invalid_argument("prior variances must be non-negative");
  if (!std::isfinite(state_mean) || !std::isfinite(param_mean))
    throw std::invalid_argument("prior means must be finite");
}

void NoiseSpec::validate() const {
  if (!(process >= 0.0) || !(measurement >= 0.0) || !(parameter >= 0.0))
    throw std::invalid_argument("noise variances must be non-negative");
}

void UpdateConfig::validate() const {
  if (beta_iterations < 1) throw std::invalid_argument("beta_iterations must be at least 1");
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
  if (!(band_lower > 0.0 && band_lower <= 1.0 && band_upper >= 1.0))
    throw std::invalid_argument("constraint band must satisfy 0 < lower <= 1 <= upper");
}

LinearObservation::LinearObservation(int joint_size, std::vector<Row> rows)
    : joint_size_(joint_size), rows_(std::move(rows)) {
  for (const auto& row : rows_)
    for (const auto& [index, weight] : row)
      if (index < 0 || index >= joint_size_)
        throw std::invalid_argument("observation row references an entry outside the joint vector");
}

Eigen::VectorXd LinearObservation::apply(const Eigen::Ref<const Eigen::VectorXd>& psi) const {
  Eigen::VectorXd y(rows());
  for (int r = 0; r < rows(); ++r) {
    double sum = 0.0;
    for (const auto& [index, weight] : rows_[r]) sum += weight * psi[index];
    y[r] = sum;
  }
  return y;
}

Eigen::MatrixXd LinearObservation::apply(const JointEnsemble& ensemble) const {
  Eigen::MatrixXd y(rows(), ensemble.size());
  for (int i = 0; i < ensemble.size(); ++i) y.col(i) = apply(ensemble.members.col(i));
  return y;
}

JointEnsemble init_ensemble(const PriorSpec& prior, int members, EnsembleLayout layout,
                            std::uint64_t seed) {
  if (members < 2) throw std::invalid_argument("an ensemble needs at least two members");
  prior.validate();
  JointEnsemble e{layout, Eigen::MatrixXd(layout.size(), members)};
  const double sp = std::sqrt(prior.param_cov);
  const double ss = std::sqrt(prior.state_cov);
  for (int i = 0; i < members; ++i) {
    KeyedStream rng(seed, StreamTag::kPrior, {static_cast<std::uint64_t>(i)});
    auto col = e.members.col(i);
    for (int k = 0; k < layout.n_param; ++k) col[k] = prior.param_mean + sp * rng.normal();
    for (int k = layout.n_param; k < layout.size(); ++k) col[k] = prior.state_mean + ss * rng.normal();
  }
  return e;
}

void forecast(JointEnsemble& ensemble, const ForwardModel& forward, const NoiseSpec& noise,
              std::uint64_t seed, int step, int threads) {
  const int n = ensemble.size();
  const int np = ensemble.layout.n_param;
  const int ns = ensemble.layout.n_state;
  const double sq = std::sqrt(noise.process);
  const double sp = std::sqrt(noise.parameter);
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);

  std::vector<std::exception_ptr> failures(n);
  auto run = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      try {
        double* col = ensemble.members.col(i).data();
        forward(i, std::span<const double>(col, np), std::span<double>(col + np, ns));
        if (sq > 0.0) {
          KeyedStream rng(seed, StreamTag::kProcessNoise,
                          {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(i)});
          for (int k = 0; k < ns; ++k) col[np + k] += sq * rng.normal();
        }
        if (sp > 0.0) {
          KeyedStream rng(seed, StreamTag::kParameterNoise,
                          {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(i)});
          for (int k = 0; k < np; ++k) col[k] += sp * rng.normal();
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  if (threads == 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(run, w * n / threads, (w + 1) * n / threads);
  }

  for (int i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw ForecastError(i, e.what());
    }
  }
}

Eigen::VectorXd ensemble_mean(const Eigen::MatrixXd& columns) {
  if (columns.cols() < 1) throw std::invalid_argument("ensemble is empty");
  // Averaging deviations from the first member keeps identical members exact.
  const Eigen::VectorXd ref = columns.col(0);
  return ref + (columns.colwise() - ref).rowwise().sum() / static_cast<double>(columns.cols());
}

Eigen::VectorXd ensemble_mean(const JointEnsemble& ensemble) {
  return ensemble_mean(ensemble.members);
}

Eigen::MatrixXd predict_measurements(const JointEnsemble& ensemble, const LinearObservation& h,
                                     const NoiseSpec& noise, std::uint64_t seed, int step,
                                     int beta) {
  Eigen::MatrixXd y = h.apply(ensemble);
  const double sr = std::sqrt(noise.measurement);
  if (sr == 0.0) return y;
  for (int i = 0; i < ensemble.size(); ++i) {
    KeyedStream rng(seed, StreamTag::kObservationNoise,
                    {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(beta),
                     static_cast<std::uint64_t>(i)});
    for (int r = 0; r < y.rows(); ++r) y(r, i) += sr * rng.normal();
  }
  return y;
}

Covariances covariances(const JointEnsemble& ensemble, const Eigen::MatrixXd& measurements) {
  const int s = ensemble.size();
  if (measurements.cols() != s) throw std::invalid_argument("ensemble size mismatch");
  // Raw moments about the first member. The shift cancels algebraically and
  // keeps the subtraction of the mean outer product well conditioned.
  const Eigen::MatrixXd a = ensemble.members.colwise() - ensemble.members.col(0);
  const Eigen::MatrixXd b = measurements.colwise() - measurements.col(0);
  const Eigen::VectorXd abar = ensemble_mean(a);
  const Eigen::VectorXd bbar = ensemble_mean(b);
  const double inv = 1.0 / s;
  Covariances c;
  c.py = inv * (b * b.transpose()) - bbar * bbar.transpose();
  c.py = 0.5 * (c.py + c.py.transpose()).eval();
  c.ppsiy = inv * (a * b.transpose()) - abar * bbar.transpose();
  return c;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& ppsiy, const Eigen::MatrixXd& py,
                            double jitter) {
  if (py.rows() != py.cols() || ppsiy.cols() != py.rows())
    throw std::invalid_argument("gain dimensions are inconsistent");
  Eigen::MatrixXd reg = py;
  reg.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success)
    throw FactorizationError("regularized measurement covariance is not positive definite");
  // K = Ppsiy A^-1  <=>  A K^T = Ppsiy^T for symmetric A.
  Eigen::MatrixXd k = llt.solve(ppsiy.transpose()).transpose();
  if (!k.allFinite()) throw FactorizationError("Kalman gain is not finite");
  return k;
}

void update(JointEnsemble& ensemble, const Eigen::MatrixXd& gain,
            const Eigen::Ref<const Eigen::VectorXd>& observation,
            const Eigen::MatrixXd& measurements) {
  if (observation.size() != measurements.rows() || gain.cols() != measurements.rows() ||
      gain.rows() != ensemble.layout.size())
    throw std::invalid_argument("update dimensions are inconsistent");
  const Eigen::MatrixXd innovation = (-measurements).colwise() + observation;
  ensemble.members += gain * innovation;
}

ParameterBounds constrain_parameters(JointEnsemble& ensemble,
                                     std::span<const double> stabilization_values,
                                     const UpdateConfig& config, double scale) {
  if (stabilization_values.empty())
    throw std::invalid_argument("constraint needs at least one stabilization value");
  if (!(scale > 0.0)) throw std::invalid_argument("parameter scale must be positive");
  double mean = 0.0;
  for (double v : stabilization_values) mean += v;
  mean /= static_cast<double>(stabilization_values.size());
  const ParameterBounds b{config.band_lower * mean / scale, config.band_upper * mean / scale};
  for (int i = 0; i < ensemble.size(); ++i) {
    auto p = ensemble.params(i);
    for (int k = 0; k < p.size(); ++k) p[k] = std::clamp(p[k], b.lower, b.upper);
  }
  return b;
}

Eigen::MatrixXd assimilate_observation(JointEnsemble& ensemble, const LinearObservation& h,
                                       const Eigen::Ref<const Eigen::VectorXd>& observation,
                                       const NoiseSpec& noise, const UpdateConfig& config,
                                       std::uint64_t seed, int step) {
  config.validate();
  Eigen::MatrixXd gain;
  for (int beta = 0; beta < config.beta_iterations; ++beta) {
    const Eigen::MatrixXd y = predict_measurements(ensemble, h, noise, seed, step, beta);
    const Covariances c = covariances(ensemble, y);
    gain = kalman_gain(c.ppsiy, c.py, config.jitter);
    update(ensemble, gain, observation, y);
  }
  return gain;
}

}  // namespace hemoda
