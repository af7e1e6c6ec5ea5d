#include <random>

#include <gtest/gtest.h>

#include "rmm/error.hpp"
#include "rmm/tensors.hpp"

using namespace rmm;

namespace {
constexpr double G = 1e9;
const TetragonalElasticity kMacro{5.9 * G, 0.627 * G, 1.748 * G};
const TetragonalElasticity kMicro{11.41 * G, 7.5 * G, 356.2 * G};

double series(double a, double b) { return a * b / (a + b); }
double inverse_series(double micro, double macro) { return micro * macro / (micro - macro); }
}  // namespace

TEST(Tensors, VoigtLayout) {
  const TetragonalElasticity c{1.0, 2.0, 3.0};
  Eigen::Matrix3d v;
  v << 5, 1, 0, 1, 5, 0, 0, 0, 3;
  EXPECT_EQ(c.voigt(), v);
}

TEST(Tensors, EqualTensorsHalve) {
  const TetragonalElasticity c{3 * G, 2 * G, 5 * G};
  const auto m = macro_from_micro_e(c, c);
  EXPECT_NEAR(m.bulk_family(), 0.5 * c.bulk_family(), 1e-6);
  EXPECT_NEAR(m.mu, 0.5 * c.mu, 1e-6);
  EXPECT_NEAR(m.mu_star, 0.5 * c.mu_star, 1e-6);
}

TEST(Tensors, StiffCouplingLimit) {
  const auto m = macro_from_micro_e(kMicro, kMicro.scaled(1e9));
  EXPECT_LT(relative_difference(m, kMicro), 1e-6);
}

TEST(Tensors, ScalarSeriesOracle) {
  const auto ce = e_from_micro_macro(kMicro, kMacro);
  EXPECT_NEAR(ce.mu, inverse_series(7.5 * G, 0.627 * G), 1e-3);
  EXPECT_NEAR(ce.mu / G, 0.68420, 5e-6);
  EXPECT_NEAR(ce.mu_star, inverse_series(356.2 * G, 1.748 * G), 1e-3);
  EXPECT_NEAR(ce.mu_star / G, 1.75662, 5e-6);
  EXPECT_NEAR(ce.bulk_family() / G, 9.96734, 5e-6);
  EXPECT_NEAR(ce.lambda / G, 9.28314, 5e-6);
  const auto back = macro_from_micro_e(kMicro, ce);
  EXPECT_NEAR(back.mu, series(kMicro.mu, ce.mu), 1e-3);
  EXPECT_NEAR(back.mu / G, 0.627, 1e-12);
}

TEST(Tensors, RoundTrip) {
  EXPECT_LT(round_trip_check(kMicro, kMacro), 1e-12);
  EXPECT_LT(round_trip_check(kMacro.scaled(2.0), kMacro), 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    const TetragonalElasticity macro{u(rng) * G, u(rng) * G, u(rng) * G};
    const auto micro = TetragonalElasticity::from_families(
        macro.bulk_family() * (1.0 + u(rng)), macro.mu * (1.0 + u(rng)),
        macro.mu_star * (1.0 + u(rng)));
    EXPECT_LT(round_trip_check(micro, macro), 1e-10);
  }
}

TEST(Tensors, OrderingViolationRejected) {
  EXPECT_THROW(e_from_micro_macro(kMacro, kMicro), ValidationError);
  EXPECT_THROW(e_from_micro_macro(kMacro, kMacro), ValidationError);
  EXPECT_THROW(macro_from_micro_e({1.0, -1.0, 1.0}, kMacro), ValidationError);
}

TEST(Tensors, StaticParamsAdmissibility) {
  auto p = RmmStaticParams::from_micro(kMicro, kMacro, 0.1 * G, 1089.6);
  EXPECT_TRUE(p.admissible());
  EXPECT_LT(relative_difference(p.c_macro(), kMacro), 1e-12);
  p.mu_c = -1.0;
  EXPECT_FALSE(p.admissible());
  p.mu_c = 0.0;
  p.mu_lc2 = 0.0;
  EXPECT_FALSE(p.admissible());
}

TEST(Tensors, EnergyDensity) {
  const TetragonalElasticity c{2.0, 3.0, 4.0};
  Eigen::Matrix2d e;
  e << 0.1, 0.05, 0.05, -0.2;
  const Eigen::Vector3d v(0.1, -0.2, 0.1);
  EXPECT_NEAR(c.energy_density(e), 0.5 * v.dot(c.voigt() * v), 1e-15);
}
