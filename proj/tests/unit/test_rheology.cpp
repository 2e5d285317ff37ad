#include <gtest/gtest.h>

#include <cmath>

#include "hemoda/rheology.hpp"

using namespace hemoda;

TEST(Casson, HighShearLimit) {
  const auto m = FluidModel::casson(0.005, 0.0035);
  EXPECT_NEAR(casson_viscosity(1e6, m), 0.0035, 0.01 * 0.0035);
}

TEST(Casson, HandEvaluatedValues) {
  const auto m = FluidModel::casson(0.005, 0.0035);
  EXPECT_NEAR(casson_viscosity(1.0, m), 0.005 + std::sqrt(1.75e-5) + 0.0035, 1e-15);
  EXPECT_NEAR(casson_viscosity(1.0, m), 0.0126833, 1e-7);
  EXPECT_NEAR(casson_viscosity(100.0, m), 3.96833e-3, 1e-8);
}

TEST(Casson, NeverBelowHighShearViscosity) {
  const auto m = FluidModel::casson();
  for (double g = 1e-4; g < 1e8; g *= 3.7) EXPECT_GT(casson_viscosity(g, m), m.mu_inf);
}

TEST(Casson, RegularizedAtZeroShear) {
  const auto m = FluidModel::casson();
  EXPECT_TRUE(std::isfinite(casson_viscosity(0.0, m)));
  EXPECT_DOUBLE_EQ(casson_viscosity(0.0, m), casson_viscosity(m.gamma_dot_min, m));
}

TEST(Rheology, EffectiveViscosityDispatch) {
  EXPECT_DOUBLE_EQ(effective_viscosity(42.0, FluidModel::newtonian(0.004)), 0.004);
  const auto c = FluidModel::casson();
  EXPECT_DOUBLE_EQ(effective_viscosity(42.0, c), casson_viscosity(42.0, c));
}
