#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hemoda {

/// Gaussian prior of the joint vector; each variance applies uniformly to its block.
struct PriorSpec {
  double state_mean = 0.0;
  double state_cov = 0.0;
  double param_mean = 0.0;
  double param_cov = 0.0;

  void validate() const;
  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Diagonal noise variances: process noise per state entry, measurement noise
/// per observation entry, and an optional random-walk variance per parameter
/// entry (0 holds the parameters fixed through the forecast).
struct NoiseSpec {
  double process = 0.0;
  double measurement = 0.0;
  double parameter = 0.0;

  void validate() const;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct UpdateConfig {
  int beta_iterations = 1;
  double jitter = 1e-12;
  bool constraint_enabled = true;
  double band_lower = 0.8;
  double band_upper = 1.2;

  void validate() const;
  friend bool operator==(const UpdateConfig&, const UpdateConfig&) = default;
};

struct EnsembleLayout {
  int n_param = 1;
  int n_state = 0;
  int size() const { return n_param + n_state; }
  friend bool operator==(const EnsembleLayout&, const EnsembleLayout&) = default;
};

/// Joint ensemble: one column per member, parameters first, then the state.
struct JointEnsemble {
  EnsembleLayout layout;
  Eigen::MatrixXd members;

  int size() const { return static_cast<int>(members.cols()); }
  auto params(int member) { return members.col(member).head(layout.n_param); }
  auto params(int member) const { return members.col(member).head(layout.n_param); }
  auto state(int member) { return members.col(member).tail(layout.n_state); }
  auto state(int member) const { return members.col(member).tail(layout.n_state); }
};

/// Sparse linear measurement map over the joint vector. Rows may read the
/// parameter block, which is how inlet feedthrough enters the sensors.
class LinearObservation {
 public:
  using Row = std::vector<std::pair<int, double>>;

  LinearObservation() = default;
  LinearObservation(int joint_size, std::vector<Row> rows);

  int rows() const { return static_cast<int>(rows_.size()); }
  int joint_size() const { return joint_size_; }
  const Row& row(int r) const { return rows_[r]; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& psi) const;
  Eigen::MatrixXd apply(const JointEnsemble& ensemble) const;

 private:
  int joint_size_ = 0;
  std::vector<Row> rows_;
};

/// Advances one member's state in place given its parameters.
using ForwardModel =
    std::function<void(int member, std::span<const double> params, std::span<double> state)>;

JointEnsemble init_ensemble(const PriorSpec& prior, int members, EnsembleLayout layout,
                            std::uint64_t seed);

/// chi_i <- Lambda(psi_i) + w_i with w_i ~ N(0, Q); parameters are carried
/// unchanged unless a parameter walk variance is set. Members are split over `threads` workers (0 = hardware count);
/// the result does not depend on the split. Solver failures are rethrown as
/// ForecastError for the lowest failing member.
void forecast(JointEnsemble& ensemble, const ForwardModel& forward, const NoiseSpec& noise,
              std::uint64_t seed, int step, int threads = 1);

Eigen::VectorXd ensemble_mean(const JointEnsemble& ensemble);
Eigen::VectorXd ensemble_mean(const Eigen::MatrixXd& columns);

/// y_i = H psi_i + v_i with v_i ~ N(0, R), drawn fresh for every (step, beta).
Eigen::MatrixXd predict_measurements(const JointEnsemble& ensemble, const LinearObservation& h,
                                     const NoiseSpec& noise, std::uint64_t seed, int step,
                                     int beta);

struct Covariances {
  Eigen::MatrixXd py;    // m x m
  Eigen::MatrixXd ppsiy; // n x m
};

/// Raw-moment covariances with 1/S normalization, P = (1/S) sum a b^T - mean(a) mean(b)^T.
Covariances covariances(const JointEnsemble& ensemble, const Eigen::MatrixXd& measurements);

/// K = P^psiy (P^y + jitter I)^-1 through a Cholesky factorization.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& ppsiy, const Eigen::MatrixXd& py,
                            double jitter);

/// psi_i <- psi_i + K (y - y_i).
void update(JointEnsemble& ensemble, const Eigen::MatrixXd& gain,
            const Eigen::Ref<const Eigen::VectorXd>& observation,
            const Eigen::MatrixXd& measurements);

struct ParameterBounds {
  double lower;
  double upper;
};

/// Clamps every parameter entry of every member into [lower v, upper v] / scale,
/// where v is the mean of `stabilization_values` and `scale` converts the
/// parameter to a mean inlet velocity.
ParameterBounds constrain_parameters(JointEnsemble& ensemble,
                                     std::span<const double> stabilization_values,
                                     const UpdateConfig& config, double scale = 1.0);

/// Runs the beta-iterated measurement update for one observation and returns
/// the last gain used.
Eigen::MatrixXd assimilate_observation(JointEnsemble& ensemble, const LinearObservation& h,
                                       const Eigen::Ref<const Eigen::VectorXd>& observation,
                                       const NoiseSpec& noise, const UpdateConfig& config,
                                       std::uint64_t seed, int step);

}  // namespace hemoda
