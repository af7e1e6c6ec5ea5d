#include <cmath>

#include <gtest/gtest.h>

#include "rmm/error.hpp"
#include "rmm/static_fit.hpp"

using namespace rmm;

namespace {
constexpr double G = 1e9;
constexpr double L = 1e-3;
const TetragonalElasticity kMacro{5.9 * G, 0.627 * G, 1.748 * G};
const FreeMask kAll{true, true, true, true, true};

/// Π affine in the unknowns: E = E0 + A·x.
class LinearModel final : public EnergyModel {
 public:
  LinearModel(Eigen::MatrixXd a, Eigen::VectorXd e0) : a_(std::move(a)), e0_(std::move(e0)) {}
  std::size_t case_count() const override { return static_cast<std::size_t>(a_.rows()); }
  Eigen::VectorXd evaluate(const StaticUnknowns& x, Eigen::MatrixXd* j) override {
    if (j) *j = a_;
    return e0_ + a_ * x.vec();
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd e0_;
};

Eigen::MatrixXd random_d(int rows) {
  srand(3);
  return Eigen::MatrixXd::Random(rows, 5);
}
}  // namespace

TEST(GaussNewton, ZeroResidualZeroStep) {
  const Vector5d step = gauss_newton_step(random_d(9), Eigen::VectorXd::Zero(9), kAll, Vector5d::Ones());
  EXPECT_EQ(step.norm(), 0.0);
}

TEST(GaussNewton, LinearModelOneStep) {
  const Eigen::MatrixXd d = random_d(9);
  const Vector5d truth(1, 2, 3, 4, 5);
  const Eigen::VectorXd r = d * truth;
  const Vector5d step = gauss_newton_step(d, r, kAll, Vector5d::Constant(3.0));
  EXPECT_LT((step - truth).norm(), 1e-12);
}

TEST(GaussNewton, FixedParameterGetsNoIncrement) {
  const Eigen::MatrixXd d = random_d(9);
  FreeMask m = kAll;
  m[3] = false;
  const Vector5d step = gauss_newton_step(d, d * Vector5d::Ones(), m, Vector5d::Ones());
  EXPECT_EQ(step[3], 0.0);
}

TEST(GaussNewton, DuplicateColumnsRaise) {
  Eigen::MatrixXd d = random_d(9);
  d.col(2) = d.col(1);
  try {
    gauss_newton_step(d, Eigen::VectorXd::Ones(9), kAll, Vector5d::Ones());
    FAIL() << "no rank deficiency reported";
  } catch (const RankDeficientError& e) {
    ASSERT_EQ(e.null_space().size(), 1u);
    const Vector5d v = e.null_space()[0];
    EXPECT_NEAR(std::abs(v[1]), std::abs(v[2]), 1e-8);
    EXPECT_NEAR(v[1] + v[2], 0.0, 1e-8);
  }
  const Vector5d mn = minimum_norm_step(d, Eigen::VectorXd::Ones(9), kAll, Vector5d::Ones());
  EXPECT_NEAR(mn[1], mn[2], 1e-10);
}

TEST(BetaMax, LargeMarginsGiveOne) {
  const StaticUnknowns x{2 * G, 5 * G, 8 * G, 0.2 * G, 700};
  const Vector5d dx = 1e-3 * x.vec();
  EXPECT_DOUBLE_EQ(beta_max(x, dx, kMacro), 1.0);
}

TEST(BetaMax, MuCHalfway) {
  const StaticUnknowns x{2 * G, 5 * G, 8 * G, 0.2 * G, 700};
  Vector5d dx = Vector5d::Zero();
  dx[3] = -0.4 * G;
  const double b = beta_max(x, dx, kMacro);
  EXPECT_LE(b, 0.5);
  EXPECT_NEAR(b, 0.5, 1e-8);
}

TEST(BetaMax, InwardStepGivesOne) {
  const StaticUnknowns x{2 * G, 5 * G, 8 * G, 0.2 * G, 700};
  EXPECT_DOUBLE_EQ(beta_max(x, x.vec(), kMacro), 1.0);
}

TEST(LineSearch, InteriorQuadratic) {
  const double bm = 0.8;
  const double b = line_search([&](double t) { return (t - 0.3 * bm) * (t - 0.3 * bm) + 1.0; }, bm);
  EXPECT_NEAR(b, 0.3 * bm, 1e-3);
}

TEST(LineSearch, MonotoneAndStagnant) {
  EXPECT_DOUBLE_EQ(line_search([](double t) { return 1.0 - t; }, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(line_search([](double t) { return 1.0 + t; }, 0.7), 0.0);
}

TEST(FitStatic, LinearModelExact) {
  const Eigen::MatrixXd a = random_d(9).cwiseAbs() * 1e-12;
  const StaticUnknowns truth{2 * G, 5 * G, 8 * G, 0.2 * G, 700};
  Eigen::MatrixXd scaled = a;
  for (int c = 0; c < 5; ++c) scaled.col(c) /= truth.vec()[c];
  LinearModel model(scaled, Eigen::VectorXd::Zero(9));
  StaticFitProblem pb;
  pb.targets = model.evaluate(truth, nullptr);
  pb.c_macro = kMacro;
  pb.start = StaticUnknowns::from(1.2 * truth.vec());
  const auto r = fit_static(pb, model);
  EXPECT_LT((r.result.vec() - truth.vec()).cwiseQuotient(truth.vec()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(r.converged);
}

TEST(FitStatic, StagnationStops) {
  // Targets below any reachable energy: the best step is β = 0.
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 5);
  LinearModel model(a, Eigen::VectorXd::Ones(3));
  StaticFitProblem pb;
  pb.targets = Eigen::VectorXd::Constant(3, 0.5);
  pb.c_macro = kMacro;
  pb.start = {2 * G, 5 * G, 8 * G, 0.2 * G, 700};
  const auto r = fit_static(pb, model);
  EXPECT_LT(r.history.size(), 10u);
  EXPECT_FALSE(r.stop_reason.empty());
}

TEST(FitStatic, FemRoundTripCoarse) {
  FemEnergyModel model(L, {1, 2}, AffineLoadCase::standard_set(0.01), 4, kMacro);
  const StaticUnknowns truth{2 * G, 5 * G, 8 * G, 0.1 * G, 627};
  StaticFitProblem pb;
  pb.targets = model.evaluate(truth, nullptr);
  pb.c_macro = kMacro;
  pb.start = StaticUnknowns::from(1.5 * truth.vec());
  const auto r = fit_static(pb, model);
  for (int i : {0, 1, 2, 4}) EXPECT_NEAR(r.result.vec()[i] / truth.vec()[i], 1.0, 0.02) << i;
  EXPECT_LT(r.r2_relative, 1e-10);
  EXPECT_EQ(r.case_labels.size(), 6u);
  EXPECT_FALSE(to_json(r).empty());
}

TEST(FitStatic, PinnedMuCStaysPinned) {
  FemEnergyModel model(L, {1}, AffineLoadCase::standard_set(0.01), 4, kMacro);
  const StaticUnknowns truth{2 * G, 5 * G, 8 * G, 0.1 * G, 627};
  StaticFitProblem pb;
  pb.targets = model.evaluate(truth, nullptr);
  pb.c_macro = kMacro;
  pb.start = StaticUnknowns::from(1.3 * truth.vec());
  pb.mu_c_pin = 0.1 * G;
  const auto r = fit_static(pb, model);
  EXPECT_DOUBLE_EQ(r.result.mu_c, 0.1 * G);
}

TEST(FitStatic, HomogeneousTargetsFlagNullSpace) {
  // Targets of a void-free cell: C_macro equals the base tensor and the
  // micro parameters are not determined by affine loads.
  const auto base = aluminium().elasticity();
  FemEnergyModel model(L, {1, 2}, AffineLoadCase::standard_set(0.01), 4, base, {2, false});
  Eigen::VectorXd targets(6);
  const auto loads = AffineLoadCase::standard_set(0.01);
  for (int n = 1; n <= 2; ++n)
    for (int i = 0; i < 3; ++i)
      targets[(n - 1) * 3 + i] = base.energy_density(loads[i].strain) * n * n * L * L;
  StaticFitProblem pb;
  pb.targets = targets;
  pb.c_macro = base;
  pb.start = {3 * base.mu, 3 * base.mu_star, 3 * base.lambda, 0.1 * base.mu, 1e-3 * base.mu * L * L};
  const auto r = fit_static(pb, model);
  EXPECT_LT(r.r2_relative, 1e-6);
  EXPECT_FALSE(r.null_space.empty());
}
