#include <cmath>

#include <gtest/gtest.h>

#include "rmm/elasticity.hpp"
#include "rmm/error.hpp"
#include "rmm/geometry.hpp"
#include "rmm/mesh.hpp"
#include "rmm/rmm_solver.hpp"

using namespace rmm;

namespace {
constexpr double G = 1e9;
constexpr double L = 1e-3;
const TetragonalElasticity kMacro{5.9 * G, 0.627 * G, 1.748 * G};
const TetragonalElasticity kMicro{11.41 * G, 7.5 * G, 356.2 * G};

int solid_count(const std::vector<int>& mask) {
  int n = 0;
  for (int p : mask) n += p != kVoid;
  return n;
}
}  // namespace

TEST(Mesh, AllSolid) {
  const auto mesh = build_mesh(UnitCellGeometry::all_solid(L), 1, 4);
  EXPECT_EQ(mesh.element_count(), 16);
  EXPECT_EQ(mesh.solid_count(), 16);
}

TEST(Mesh, CrossCellFractionAndSymmetry) {
  const auto geo = UnitCellGeometry::cross_void(L, 0.9 * L, 0.3 * L);
  const auto mask = cell_mask(geo, 40);
  const double frac = solid_count(mask) / 1600.0;
  EXPECT_GT(frac, 0.0);
  EXPECT_LT(frac, 1.0);
  EXPECT_TRUE(mask_tetragonal(mask, 40));
  // Point sampling of the shape program at element centres.
  int inside = 0;
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i)
      inside += geo.phase_at((i + 0.5) * L / 40, (j + 0.5) * L / 40) != kVoid;
  EXPECT_EQ(inside, solid_count(mask));
  EXPECT_NEAR(frac, 1.0 - (2 * 0.9 * 0.3 - 0.09), 1e-12);
}

TEST(Mesh, TwoCellMaskTiles) {
  const auto geo = UnitCellGeometry::cross_void(L, 0.9 * L, 0.3 * L);
  const auto one = cell_mask(geo, 20);
  const auto mesh = build_mesh(geo, 2, 20);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i)
      EXPECT_EQ(mesh.phase(i + 40 * j), one[(i % 20) + 20 * (j % 20)]);
}

TEST(Mesh, OffGridShapeRejected) {
  const auto geo = UnitCellGeometry::cross_void(L, 0.9 * L, 0.3 * L);
  EXPECT_THROW(build_mesh(geo, 1, 10), ValidationError);
  EXPECT_THROW(build_mesh(UnitCellGeometry::all_solid(L), 1, 3), ValidationError);
}

TEST(Elasticity, PatchTest) {
  const auto mesh = build_mesh(UnitCellGeometry::all_solid(L), 2, 4);
  const TetragonalElasticity c{51.08 * G, 26.32 * G, 26.32 * G};
  Eigen::Matrix2d e;
  e << 0.003, 0.0015, 0.0015, -0.002;
  AffineLoadCase load;
  load.strain = e;
  const auto sol = solve_elasticity(mesh, {c}, load);
  const double area = mesh.width() * mesh.height();
  EXPECT_NEAR(sol.energy, c.energy_density(e) * area, 1e-10 * sol.energy);
  const auto dofs = fem::make_displacement_map(mesh);
  for (int n = 0; n < mesh.node_count(); ++n) {
    const Eigen::Vector2d x = mesh.node_coord(n);
    const Eigen::Vector2d u = e * x;
    EXPECT_NEAR(sol.u[dofs.node_dof[n]], u.x(), 1e-15);
    EXPECT_NEAR(sol.u[dofs.node_dof[n] + 1], u.y(), 1e-15);
  }
}

TEST(Elasticity, VolumetricClosedForm) {
  const auto base = aluminium();
  const auto mesh = build_mesh(UnitCellGeometry::all_solid(L), 1, 4);
  const auto sol = solve_elasticity(mesh, {base.elasticity()}, AffineLoadCase::volumetric(0.01));
  const double expected = 0.5 * 4 * (base.lambda + base.mu) * 1e-4 * 1e-6;
  EXPECT_NEAR(sol.energy, expected, 1e-12 * expected);
}

TEST(Elasticity, LaminateTransverseModulus) {
  // Affine Dirichlet data over-constrains the laminate, so the exact
  // harmonic mean is checked in the homogenization tests. Here the energy
  // has to sit between the Reuss and Voigt bounds.
  const auto geo = UnitCellGeometry::x_laminate(L, 0.5);
  const auto mesh = build_mesh(geo, 1, 10);
  const auto a = TetragonalElasticity::isotropic(10 * G, 5 * G);
  const auto b = TetragonalElasticity::isotropic(1 * G, 0.5 * G);
  AffineLoadCase load;
  load.strain << 0.01, 0, 0, 0;
  const double e = solve_elasticity(mesh, {a, b}, load).energy;
  const double area = L * L;
  const double voigt = 0.5 * (a.energy_density(load.strain) + b.energy_density(load.strain));
  const double ma = a.lambda + 2 * a.mu, mb = b.lambda + 2 * b.mu;
  const double reuss = 0.5 * (2 * ma * mb / (ma + mb)) * 1e-4 * 0.5;
  EXPECT_LE(e, voigt * area * (1 + 1e-12));
  EXPECT_GE(e, reuss * area * (1 - 1e-12));
}

TEST(Elasticity, FloatingIslandRejected) {
  // A solid square floating inside a void frame never touches the boundary.
  UnitCellGeometry geo;
  geo.name = "island";
  geo.l = L;
  geo.program.push_back({ShapeOp::Kind::Union, {0.25 * L, 0.75 * L, 0.25 * L, 0.75 * L}, 0});
  const auto mesh = build_mesh(geo, 1, 4);
  EXPECT_THROW(fem::require_anchored(mesh), NumericError);
}

// ‖K_t q‖ / (‖K_t‖ ‖q‖); zero up to roundoff when q lies in the kernel.
double operator_residual(const RmmProblem& prob, int term, const Eigen::VectorXd& q) {
  TermVector theta{};
  theta[term] = 1.0;
  const Eigen::SparseMatrix<double> k = prob.op().combined(theta);
  return (k * q).norm() / (k.norm() * q.norm());
}

class RmmSolverTest : public ::testing::Test {
 protected:
  StructuredMesh mesh = build_mesh(UnitCellGeometry::all_solid(L), 1, 10);
  RmmStaticParams params(double f) const {
    return RmmStaticParams::from_micro(kMicro, kMacro, 0.1 * G, f * kMacro.mu * L * L);
  }
};

TEST_F(RmmSolverTest, SoftLimitEqualTensors) {
  // C_e = C_micro = C gives C_macro = C/2.
  const auto c = TetragonalElasticity{4 * G, 2 * G, 3 * G};
  RmmStaticParams p{c, c, 0.3 * G, 1e-12 * G * L * L};
  RmmProblem prob(mesh, {2, false});
  for (const auto& load : AffineLoadCase::standard_set(0.01)) {
    const double e = prob.solve(p, load).energy;
    const double ref = solve_elasticity(mesh, {c.scaled(0.5)}, load).energy;
    EXPECT_NEAR(e / ref, 1.0, 0.01);
  }
}

TEST_F(RmmSolverTest, StiffLimitWithConsistentBc) {
  RmmProblem prob(mesh, {2, true});
  for (const auto& load : AffineLoadCase::standard_set(0.01)) {
    const double e = prob.solve(params(1e6), load).energy;
    const double ref = solve_elasticity(mesh, {kMicro}, load).energy;
    EXPECT_NEAR(e / ref, 1.0, 0.01);
  }
}

TEST_F(RmmSolverTest, EnergyMonotoneInCurvature) {
  RmmProblem prob(mesh);
  const auto load = AffineLoadCase::shear(0.01);
  double prev = 0.0;
  for (double f : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    const double e = prob.solve(params(f), load).energy;
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST_F(RmmSolverTest, GradientFieldIsEquilibrium) {
  // u affine and P = ∇u: coupling, skew and curvature terms are balanced
  // exactly (the residual is roundoff of the operator scale).
  RmmProblem prob(mesh);
  Eigen::Matrix2d g;
  g << 0.01, 0.004, -0.002, 0.003;
  const auto q = prob.interpolate([&](const Eigen::Vector2d& x) { return Eigen::Vector2d(g * x); },
                                  [&](const Eigen::Vector2d&) { return g; });
  for (int t : {kLambdaE, kMuE, kMuStarE, kMuC, kMuLc2}) {
    EXPECT_LT(operator_residual(prob, t, q), 1e-13) << "term " << t;
  }
  EXPECT_GT(operator_residual(prob, kMuMicro, q), 1e-6);
}

TEST_F(RmmSolverTest, CurlOfGradientVanishes) {
  RmmProblem prob(mesh);
  const auto q = prob.interpolate(
      [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); },
      [](const Eigen::Vector2d& x) {
        Eigen::Matrix2d g;  // ∇(x²y, xy²)
        g << 2 * x.x() * x.y(), x.x() * x.x(), x.y() * x.y(), 2 * x.x() * x.y();
        return g;
      });
  EXPECT_LT(operator_residual(prob, kMuLc2, q), 1e-13);
}

TEST_F(RmmSolverTest, SensitivitiesMatchFiniteDifferences) {
  RmmProblem prob(mesh);
  const StaticUnknowns x{2 * G, 5 * G, 8 * G, 0.2 * G, 700.0};
  for (const auto& load : AffineLoadCase::standard_set(0.01)) {
    const Vector5d an = energy_sensitivities(prob, x, kMacro, load);
    EXPECT_GE(an[4], 0.0);
    const double e0 = prob.solve(x.params(kMacro), load).energy;
    for (int i = 0; i < 5; ++i) {
      Vector5d xp = x.vec(), xm = x.vec();
      const double h = 1e-6 * xp[i];
      xp[i] += h;
      xm[i] -= h;
      const double fd = (prob.solve(StaticUnknowns::from(xp).params(kMacro), load).energy -
                         prob.solve(StaticUnknowns::from(xm).params(kMacro), load).energy) /
                        (2 * h);
      const double scale = std::max({std::abs(an[i]), std::abs(fd), 1e-6 * e0 / x.vec()[i]});
      EXPECT_LT(std::abs(fd - an[i]) / scale, 1e-4) << "component " << i;
    }
  }
}

TEST_F(RmmSolverTest, StiffCouplingSensitivityApproachesMicro) {
  // With C_e huge the RMM energy tends to the pure-micro elasticity energy,
  // whose derivative in μ_micro is the μ-part of ½ε:C:ε.
  RmmProblem prob(mesh, {2, true});
  const auto load = AffineLoadCase::deviatoric(0.01);
  RmmStaticParams p{kMicro.scaled(1e4), kMicro, 0.0, kMacro.mu * L * L};
  const auto sol = prob.solve(p, load);
  const double dmicro = sol.term_energy[kMuMicro];
  // Π_micro = ½∫(λ tr² + 2μ |dev-like|²); ∂/∂μ of the affine energy.
  const TetragonalElasticity unit_mu{0.0, 1.0, 0.0};
  const double expect = unit_mu.energy_density(load.strain) * L * L;
  EXPECT_NEAR(dmicro / expect, 1.0, 1e-3);
  EXPECT_NEAR(sol.energy / solve_elasticity(mesh, {kMicro}, load).energy, 1.0, 1e-3);
}
