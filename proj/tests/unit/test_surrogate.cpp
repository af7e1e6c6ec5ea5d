#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rmm/error.hpp"
#include "rmm/mlp.hpp"
#include "rmm/surrogate.hpp"

using namespace rmm;

namespace {
constexpr double G = 1e9;
constexpr double L = 1e-3;
const TetragonalElasticity kMacro{5.9 * G, 0.627 * G, 1.748 * G};

SurrogateSpec small_spec() {
  SurrogateSpec s;
  s.l = L;
  s.c_macro = kMacro;
  s.ranges = ParameterRanges::standard(kMacro, aluminium().elasticity(), L);
  s.counts = {1, 1, 1, 1, 1};
  s.resolution = 4;
  return s;
}
}  // namespace

TEST(Mlp, DeterministicTrace) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 200);
  Eigen::MatrixXd y = x.colwise().sum();
  AdamOptions opt;
  opt.epochs = 5;
  Mlp a({5, 16, 1}, 42), b({5, 16, 1}, 42);
  const auto ta = train_adam(a, x, y, opt);
  const auto tb = train_adam(b, x, y, opt);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(ta[i], tb[i]);
}

TEST(Mlp, LinearTargetFitsQuickly) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 10000);
  const Eigen::RowVectorXd w = (Eigen::RowVectorXd(5) << 1, -2, 0.5, 3, -1).finished();
  Eigen::VectorXd y = (w * x).transpose().array() + 0.3;
  TrainOptions opt;
  opt.hidden = {32, 32};
  opt.adam.epochs = 50;
  opt.adam.batch_size = 32;
  opt.adam.learning_rate = 1e-2;
  NetworkSummary summary;
  train_network(x.transpose(), y, false, opt, &summary);
  EXPECT_GT(summary.validation_r2, 0.9999);
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
  const Mlp net({5, 8, 8, 1}, 3);
  Eigen::VectorXd x(5);
  x << 0.3, -0.2, 0.7, 0.1, -0.5;
  Eigen::VectorXd g;
  net.value_and_gradient(x, &g);
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (net.value_and_gradient(xp, nullptr) - net.value_and_gradient(xm, nullptr)) / 2e-6;
    EXPECT_NEAR(g[i], fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(Mlp, HiddenLayerPositiveHomogeneity) {
  // ReLU(W(αh)+b) for a zero-bias layer is α·ReLU(Wh) for α > 0.
  Mlp net({5, 8, 1}, 9);
  net.biases()[0].setZero();
  Eigen::VectorXd h = Eigen::VectorXd::Random(5);
  EXPECT_LT((net.layer(1, 2.5 * h) - 2.5 * net.layer(1, h)).norm(), 1e-12);
}

TEST(Mlp, RSquared) {
  Eigen::VectorXd t(4);
  t << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(r_squared(t, t), 1.0);
  EXPECT_DOUBLE_EQ(r_squared(t, Eigen::VectorXd::Constant(4, 2.5)), 0.0);
}

TEST(Surrogate, MidpointGridSixRows) {
  const auto data = generate_dataset(small_spec());
  ASSERT_EQ(data.rows.size(), 6u);
  EXPECT_EQ(data.case_count(), 6u);
}

TEST(Surrogate, RowsWithinElasticBounds) {
  auto spec = small_spec();
  spec.counts = {2, 2, 2, 2, 2};
  const auto data = generate_dataset(spec);
  ASSERT_FALSE(data.rows.empty());
  for (const auto& r : data.rows) {
    const auto s = StaticUnknowns::from(r.x);
    const auto strain = AffineLoadCase::of(r.mode, spec.amplitude).strain;
    const double area = r.n * r.n * L * L;
    EXPECT_GE(r.energy, kMacro.energy_density(strain) * area * (1 - 1e-9));
    EXPECT_LE(r.energy, s.c_micro().energy_density(strain) * area * (1 + 1e-9));
  }
}

TEST(Surrogate, SaveLoadAndDeterministicStart) {
  auto spec = small_spec();
  spec.counts = {3, 3, 3, 2, 3};
  const auto data = generate_dataset(spec);
  TrainOptions opt;
  opt.hidden = {16, 16};
  opt.adam.epochs = 20;
  auto result = train(data, opt);
  std::stringstream ss;
  result.model.save(ss);
  auto loaded = SurrogateModel::load(ss);
  const Vector5d x = 0.5 * (spec.ranges.lo + spec.ranges.hi);
  for (std::size_t c = 0; c < loaded.case_count(); ++c)
    EXPECT_DOUBLE_EQ(loaded.predict(c, x), result.model.predict(c, x));
  const Eigen::VectorXd targets = result.model.evaluate(StaticUnknowns::from(x), nullptr);
  const auto a = predict_start(result.model, targets, kMacro, 1, spec.ranges, 4);
  const auto b = predict_start(loaded, targets, kMacro, 1, spec.ranges, 4);
  EXPECT_EQ(a.best.vec(), b.best.vec());
}

TEST(Surrogate, MalformedModelRejected) {
  std::stringstream ss("{\"format\": \"other\"}");
  EXPECT_THROW(SurrogateModel::load(ss), ValidationError);
}

TEST(Surrogate, LogFeaturesKeepJacobianAndSurviveSaveLoad) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 50.0);
  Eigen::MatrixXd x(400, 5);
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = u(rng);
    x(i, 3) -= 1.0;  // zero allowed: this input stays linear
    y[i] = x(i, 0) * std::sqrt(x(i, 1)) + x(i, 2) + 0.1 * x(i, 3) + std::log(x(i, 4));
  }
  TrainOptions opt;
  opt.hidden = {16, 16};
  opt.adam.epochs = 20;
  auto net = train_network(x, y, true, opt, nullptr);
  EXPECT_TRUE(net.log_input[0]);
  EXPECT_FALSE(net.log_input[3]);
  SurrogateModel model({net});

  const StaticUnknowns p{7.0, 20.0, 3.0, 5.0, 11.0};
  Eigen::MatrixXd jac;
  const Eigen::VectorXd e = model.evaluate(p, &jac);
  for (int j = 0; j < 5; ++j) {
    const double h = 1e-6 * p.vec()[j];
    Vector5d a = p.vec(), b = p.vec();
    a[j] += h;
    b[j] -= h;
    const double fd = (model.predict(0, a) - model.predict(0, b)) / (2 * h);
    EXPECT_NEAR(jac(0, j), fd, 1e-5 * std::abs(e[0]) / p.vec()[j] + 1e-6 * std::abs(fd)) << j;
  }
  std::stringstream ss;
  model.save(ss);
  auto back = SurrogateModel::load(ss);
  EXPECT_EQ(back.nets()[0].log_input, net.log_input);
  EXPECT_EQ(back.predict(0, p.vec()), model.predict(0, p.vec()));
}
