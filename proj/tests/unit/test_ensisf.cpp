#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hemoda/ensisf.hpp"
#include "hemoda/errors.hpp"
#include "linear_gaussian.hpp"

using namespace hemoda;

namespace {

JointEnsemble random_ensemble(int n_param, int n_state, int members, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.3, 2.0);
  JointEnsemble e{{n_param, n_state}, Eigen::MatrixXd(n_param + n_state, members)};
  for (int i = 0; i < members; ++i)
    for (int k = 0; k < n_param + n_state; ++k) e.members(k, i) = d(gen);
  return e;
}

// Centered two-pass covariance with 1/S normalization and compensated sums.
Eigen::MatrixXd two_pass_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int s = static_cast<int>(a.cols());
  auto kahan_mean = [s](const Eigen::MatrixXd& x) {
    Eigen::VectorXd m(x.rows());
    for (int r = 0; r < x.rows(); ++r) {
      double sum = 0.0, c = 0.0;
      for (int i = 0; i < s; ++i) {
        const double y = x(r, i) - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
      }
      m[r] = sum / s;
    }
    return m;
  };
  const Eigen::MatrixXd da = a.colwise() - kahan_mean(a);
  const Eigen::MatrixXd db = b.colwise() - kahan_mean(b);
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < b.rows(); ++c) {
      double sum = 0.0;
      for (int i = 0; i < s; ++i) sum += da(r, i) * db(c, i);
      out(r, c) = sum / s;
    }
  return out;
}

double max_rel(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(InitEnsemble, ZeroVarianceGivesTheMean) {
  const auto e = init_ensemble({0.4, 0.0, 0.7, 0.0}, 10, {1, 3}, 1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(e.members(0, i), 0.7);
    for (int k = 1; k < 4; ++k) EXPECT_EQ(e.members(k, i), 0.4);
  }
}

TEST(InitEnsemble, ParameterMeanWithinThreeStandardErrors) {
  const auto e = init_ensemble({0.01, 1e-10, 0.015, 4e-6}, 80, {1, 5}, 9);
  const double mean = e.members.row(0).mean();
  EXPECT_NEAR(mean, 0.015, 3.0 * std::sqrt(4e-6 / 80.0));
}

TEST(InitEnsemble, LargeSampleVariance) {
  const auto e = init_ensemble({0.0, 0.0, 0.1, 4e-4}, 100000, {1, 0}, 4);
  const Eigen::MatrixXd p = e.members.topRows(1);
  EXPECT_NEAR(two_pass_cov(p, p)(0, 0), 4e-4, 0.02 * 4e-4);
}

TEST(Forecast, CollapsedEnsembleStaysCollapsed) {
  auto e = init_ensemble({0.3, 0.0, 0.2, 0.0}, 16, {1, 2}, 1);
  const ForwardModel f = [](int, std::span<const double> u, std::span<double> x) {
    x[0] = 0.5 * x[0] + u[0];
    x[1] = x[0] * x[1];
  };
  forecast(e, f, {}, 5, 1, 3);
  for (int i = 1; i < 16; ++i) EXPECT_EQ(e.members.col(i), e.members.col(0));
}

TEST(Forecast, AffineMapIsExact) {
  auto e = random_ensemble(1, 1, 20, 3);
  const Eigen::MatrixXd before = e.members;
  const ForwardModel f = [](int, std::span<const double> u, std::span<double> x) {
    x[0] = 0.9 * x[0] + 0.1 * u[0];
  };
  forecast(e, f, {}, 1, 1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(e.members(0, i), before(0, i));
    EXPECT_EQ(e.members(1, i), 0.9 * before(1, i) + 0.1 * before(0, i));
  }
}

TEST(Forecast, ThreadCountDoesNotChangeTheResult) {
  const ForwardModel f = [](int, std::span<const double> u, std::span<double> x) {
    for (double& v : x) v = std::sin(v) + u[0];
  };
  const NoiseSpec noise{1e-3, 0.0, 1e-4};
  auto a = random_ensemble(1, 6, 37, 5);
  auto b = a;
  forecast(a, f, noise, 8, 4, 1);
  forecast(b, f, noise, 8, 4, 5);
  EXPECT_EQ(a.members, b.members);
}

TEST(Forecast, FailureNamesTheLowestMember) {
  auto e = random_ensemble(1, 1, 12, 2);
  const ForwardModel f = [](int member, std::span<const double>, std::span<double>) {
    if (member == 4 || member == 9) throw std::runtime_error("diverged");
  };
  try {
    forecast(e, f, {}, 1, 1, 3);
    FAIL() << "expected ForecastError";
  } catch (const ForecastError& err) {
    EXPECT_EQ(err.member(), 4);
  }
}

TEST(EnsembleMean, SmallCases) {
  JointEnsemble e{{1, 0}, Eigen::MatrixXd(1, 3)};
  e.members << 1.0, 2.0, 3.0;
  EXPECT_EQ(ensemble_mean(e)(0), 2.0);
  e.members.setConstant(0.1);
  EXPECT_EQ(ensemble_mean(e)(0), 0.1);
}

TEST(EnsembleMean, MatchesCompensatedSumAndIsAffine) {
  const auto e = random_ensemble(1, 4, 80, 6);
  const Eigen::VectorXd m = ensemble_mean(e);
  for (int r = 0; r < 5; ++r) {
    long double sum = 0.0L;
    for (int i = 0; i < 80; ++i) sum += e.members(r, i);
    const double want = static_cast<double>(sum / 80.0L);
    EXPECT_NEAR(m[r], want, 1e-13 * std::abs(want) + 1e-16);
  }
  JointEnsemble g = e;
  g.members = (2.5 * e.members).array() + 0.75;
  const Eigen::VectorXd mg = ensemble_mean(g);
  for (int r = 0; r < 5; ++r) EXPECT_NEAR(mg[r], 2.5 * m[r] + 0.75, 1e-13 * std::abs(mg[r]));
}

TEST(PredictMeasurements, NoiselessSelection) {
  JointEnsemble e{{1, 2}, Eigen::MatrixXd(3, 1)};
  e.members << 0.05, 0.2, 0.1;
  const LinearObservation h(3, {{{1, 1.0}}, {{2, 1.0}}});
  const Eigen::MatrixXd y = predict_measurements(e, h, {}, 1, 1, 0);
  EXPECT_EQ(y(0, 0), 0.2);
  EXPECT_EQ(y(1, 0), 0.1);
}

TEST(PredictMeasurements, NoiseVariance) {
  JointEnsemble e{{1, 1}, Eigen::MatrixXd::Zero(2, 100000)};
  const LinearObservation h(2, {{{1, 1.0}}});
  const Eigen::MatrixXd y = predict_measurements(e, h, {0.0, 1e-8, 0.0}, 3, 2, 0);
  EXPECT_NEAR(two_pass_cov(y, y)(0, 0), 1e-8, 0.03 * 1e-8);
  const Eigen::MatrixXd y2 = predict_measurements(e, h, {0.0, 1e-8, 0.0}, 3, 2, 1);
  EXPECT_NE(y(0, 0), y2(0, 0));
}

TEST(Covariances, TwoMemberHandValues) {
  JointEnsemble e{{1, 0}, Eigen::MatrixXd(1, 2)};
  e.members << 1.0, 3.0;
  Eigen::MatrixXd y(1, 2);
  y << 2.0, 6.0;
  const auto c = covariances(e, y);
  EXPECT_DOUBLE_EQ(c.py(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(c.ppsiy(0, 0), 2.0);
}

TEST(Covariances, IdenticalMembersGiveZero) {
  JointEnsemble e{{1, 2}, Eigen::MatrixXd::Constant(3, 9, 0.37)};
  const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(4, 9, 1.3);
  const auto c = covariances(e, y);
  EXPECT_EQ(c.py.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.ppsiy.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Covariances, MatchTwoPassOracleAndAreSymmetric) {
  const auto e = random_ensemble(1, 7, 80, 10);
  Eigen::MatrixXd y = random_ensemble(0, 5, 80, 11).members;
  y.array() += 100.0;  // offset that a naive raw-moment sum would lose digits to
  const auto c = covariances(e, y);
  EXPECT_LE(max_rel(c.py, two_pass_cov(y, y)), 1e-10);
  EXPECT_LE(max_rel(c.ppsiy, two_pass_cov(e.members, y)), 1e-10);
  EXPECT_LE((c.py - c.py.transpose()).cwiseAbs().maxCoeff(), 1e-12 * c.py.cwiseAbs().maxCoeff());
}

TEST(KalmanGain, ScalarAndRegularized) {
  EXPECT_DOUBLE_EQ(kalman_gain(Eigen::MatrixXd::Constant(1, 1, 2.0),
                               Eigen::MatrixXd::Constant(1, 1, 4.0), 0.0)(0, 0),
                   0.5);
  const Eigen::MatrixXd k = kalman_gain(Eigen::MatrixXd::Constant(2, 1, 1e-3),
                                        Eigen::MatrixXd::Zero(1, 1), 1e-12);
  EXPECT_TRUE(k.allFinite());
  EXPECT_LE(k.cwiseAbs().maxCoeff(), 1e-3 / 1e-12);
  EXPECT_THROW(kalman_gain(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), 0.0),
               FactorizationError);
}

TEST(Update, ZeroGainOrPerfectAgreementLeavesEnsemble) {
  auto e = random_ensemble(1, 2, 10, 1);
  const Eigen::MatrixXd before = e.members;
  const Eigen::MatrixXd y = e.members.bottomRows(2);
  update(e, Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Constant(2, 5.0), y);
  EXPECT_EQ(e.members, before);

  JointEnsemble g = random_ensemble(1, 2, 10, 2);
  const Eigen::MatrixXd gb = g.members;
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(2, 10, 0.4);
  update(g, Eigen::MatrixXd::Constant(3, 2, 0.7), Eigen::VectorXd::Constant(2, 0.4), same);
  EXPECT_EQ(g.members, gb);
}

TEST(Update, ConjugateGaussianPosteriorMean) {
  // x ~ N(1, 1), y = x + v with R = 1, y = 3: posterior mean 2.
  auto e = init_ensemble({1.0, 1.0, 0.0, 0.0}, 10000, {1, 1}, 21);
  const LinearObservation h(2, {{{1, 1.0}}});
  UpdateConfig cfg;
  cfg.constraint_enabled = false;
  Eigen::VectorXd y(1);
  y << 3.0;
  assimilate_observation(e, h, y, {0.0, 1.0, 0.0}, cfg, 21, 1);
  const double posterior = e.members.row(1).mean();
  EXPECT_NEAR(posterior, 2.0, 0.02 * 2.0);
}

TEST(Update, AugmentedGainMatchesExactFilter) {
  oracle::LinearGaussianCase c;
  c.steps = 10;
  const auto run = oracle::run_linear_gaussian(c, 10000, 3);
  EXPECT_LE(oracle::gain_deviation(run), 0.05);
}

TEST(Constraint, ClampsIntoTheBand) {
  JointEnsemble e{{1, 1}, Eigen::MatrixXd(2, 3)};
  e.members << 1.5, 0.5, 1.1, 9.0, 9.0, 9.0;
  const std::vector<double> stab{0.9, 1.1};
  const auto b = constrain_parameters(e, stab, UpdateConfig{});
  EXPECT_DOUBLE_EQ(b.lower, 0.8);
  EXPECT_DOUBLE_EQ(b.upper, 1.2);
  EXPECT_DOUBLE_EQ(e.members(0, 0), 1.2);
  EXPECT_DOUBLE_EQ(e.members(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(e.members(0, 2), 1.1);
  EXPECT_EQ(e.members.row(1), Eigen::RowVector3d::Constant(9.0));
}

TEST(Constraint, ScaleDividesTheBand) {
  JointEnsemble e{{1, 0}, Eigen::MatrixXd::Constant(1, 1, 5.0)};
  const std::vector<double> stab{1.0};
  const auto b = constrain_parameters(e, stab, UpdateConfig{}, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(b.upper, 1.8);
  EXPECT_DOUBLE_EQ(e.members(0, 0), 1.8);
}

TEST(Cycle, CollapseIsPreservedWithoutNoise) {
  auto e = init_ensemble({0.2, 0.0, 0.1, 0.0}, 8, {1, 1}, 2);
  const ForwardModel f = [](int, std::span<const double> u, std::span<double> x) {
    x[0] = 0.9 * x[0] + 0.1 * u[0];
  };
  const LinearObservation h(2, {{{1, 1.0}}});
  UpdateConfig cfg;
  for (int k = 1; k <= 5; ++k) {
    forecast(e, f, {}, 2, k);
    Eigen::VectorXd y(1);
    y << 0.3;
    assimilate_observation(e, h, y, {}, cfg, 2, k);
    for (int i = 1; i < 8; ++i) EXPECT_EQ(e.members.col(i), e.members.col(0));
  }
}
