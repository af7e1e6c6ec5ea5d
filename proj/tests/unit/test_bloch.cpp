#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "rmm/bloch.hpp"
#include "rmm/error.hpp"
#include "rmm/rmm_dispersion.hpp"

using namespace rmm;

namespace {
constexpr double L = 1e-3;
constexpr double G = 1e9;
const double kPi = std::numbers::pi;
}  // namespace

TEST(Bloch, ZoneEdges) {
  EXPECT_DOUBLE_EQ(brillouin_k_max(0.0, L), kPi / L);
  EXPECT_NEAR(brillouin_k_max(kPi / 4, L), std::sqrt(2.0) * kPi / L, 1e-9);
  const auto g = k_grid(0.0, L, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), kPi / L);
}

TEST(Bloch, HomogeneousCellSlopesAndRigidModes) {
  const auto base = aluminium();
  const double cs = std::sqrt(base.mu / base.rho);
  const double cp = std::sqrt((base.lambda + 2 * base.mu) / base.rho);
  EXPECT_NEAR(cs, 3122, 1.0);
  EXPECT_NEAR(cp, 6198, 1.0);
  const auto set = bloch_bands(UnitCellGeometry::all_solid(L), base, 0.0,
                               {0.0, 0.05 * kPi / L, kPi / L}, 6, 10);
  const auto& s0 = set.samples[0];
  EXPECT_LT(std::abs(s0.omega[0]), 1e-3 * cs / L);
  EXPECT_LT(std::abs(s0.omega[1]), 1e-3 * cs / L);
  const double k1 = set.samples[1].k;
  EXPECT_NEAR(set.typed(1, WaveType::Shear)[0] / (cs * k1), 1.0, 1e-3);
  EXPECT_NEAR(set.typed(1, WaveType::Pressure)[0] / (cp * k1), 1.0, 1e-3);
  // Folded branch at the zone edge: the reflected shear wave meets ω = c·π/l.
  const auto folded = set.typed(2, WaveType::Shear);
  ASSERT_GE(folded.size(), 2u);
  EXPECT_NEAR(folded[0] / (cs * kPi / L), 1.0, 0.01);
  EXPECT_NEAR(folded[1] / (cs * kPi / L), 1.0, 0.01);
}

TEST(Bloch, HermitianAssembly) {
  const auto geo = UnitCellGeometry::cross_void(L, 0.9 * L, 0.3 * L);
  const BlochCell cell(geo, aluminium(), 20);
  EXPECT_TRUE(cell.symmetric());
  const auto sys = cell.assemble({700.0, 300.0});
  EXPECT_LT(hermitian_defect(sys.k), 1e-12);
  EXPECT_LT(hermitian_defect(sys.m), 1e-12);
}

TEST(Bloch, OutOfZoneRejected) {
  EXPECT_THROW(bloch_bands(UnitCellGeometry::all_solid(L), aluminium(), 0.0, {2 * kPi / L}, 4, 4),
               ValidationError);
}

TEST(Cutoffs, HomogeneousCellHasNone) {
  const auto set =
      bloch_bands(UnitCellGeometry::all_solid(L), aluminium(), 0.0, {0.0, kPi / L}, 6, 6);
  const auto ex = extract_cutoffs(set);
  EXPECT_FALSE(ex.cutoffs.has_value());
  EXPECT_FALSE(ex.note.empty());
}

TEST(Cutoffs, RecoversPlantedRmmCutoffs) {
  const TetragonalElasticity macro{5.9 * G, 0.627 * G, 1.748 * G};
  const auto s = RmmStaticParams::from_micro({11.41 * G, 7.5 * G, 356.2 * G}, macro, 0.1 * G,
                                             1089.6);
  RmmDynamicParams d;
  d.mu_c1 = 4.567e-6;
  d.mu_star_m1 = 1.3e-3;
  d.mu_m1 = 1.287e-4;
  d.lambda_m1 = 1.0443e-4 - 1.287e-4;
  d.mu_m2 = d.lambda_m2 = 2.7e-5;
  d.mu_c2 = d.mu_star_m2 = 2.0e-5;
  const double rho = 1485.0;
  const auto truth = cutoffs(s, d, rho);
  const auto a0 = branches(s, d, rho, 0.0, {0.0, 100.0});
  const auto a45 = branches(s, d, rho, kPi / 4, {0.0, 100.0});
  const auto ex = extract_cutoffs(a0, &a45);
  ASSERT_TRUE(ex.cutoffs.has_value()) << ex.note;
  EXPECT_NEAR(ex.cutoffs->shear1 / truth.shear1, 1.0, 1e-10);
  EXPECT_NEAR(ex.cutoffs->shear2 / truth.shear2, 1.0, 1e-10);
  EXPECT_NEAR(ex.cutoffs->pressure1 / truth.pressure1, 1.0, 1e-10);
  EXPECT_NEAR(ex.cutoffs->pressure2 / truth.pressure2, 1.0, 1e-10);
  EXPECT_LT(ex.angle_mismatch, 1e-6);
}

TEST(BandGap, ConstructedTwoBranches) {
  DispersionCurveSet set;
  for (int i = 0; i <= 10; ++i) {
    DispersionSample s;
    s.k = i;
    s.omega = {std::min(1.0 * i, 5.0), 8.0 + 0.2 * i};
    s.type = {WaveType::Pressure, WaveType::Pressure};
    set.samples.push_back(s);
  }
  set.normalise();
  const auto gaps = band_gap(set);
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_DOUBLE_EQ(gaps[0].first, 5.0);
  EXPECT_DOUBLE_EQ(gaps[0].second, 8.0);
}

TEST(BandGap, HomogeneousCellHasNone) {
  const auto set = bloch_bands(UnitCellGeometry::all_solid(L), aluminium(), 0.0,
                               k_grid(0.0, L, 6), 4, 4);
  EXPECT_TRUE(band_gap(set).empty());
}

TEST(Curves, CsvRoundTrip) {
  DispersionCurveSet set;
  set.angle = kPi / 4;
  for (int i = 0; i < 3; ++i) {
    DispersionSample s;
    s.k = 10.0 * i;
    s.omega = {1.0 * i, 5.0 + i, 7.0};
    s.type = {WaveType::Shear, WaveType::Pressure, WaveType::Shear};
    set.samples.push_back(s);
  }
  set.normalise();
  std::stringstream ss;
  write_curves_csv(ss, {set});
  const auto back = read_curves_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_NEAR(back[0].angle, set.angle, 1e-12);
  ASSERT_EQ(back[0].samples.size(), 3u);
  EXPECT_EQ(back[0].samples[2].omega, set.samples[2].omega);
  EXPECT_EQ(back[0].samples[2].type, set.samples[2].type);
  EXPECT_EQ(back[0].samples[2].acoustic, set.samples[2].acoustic);
  EXPECT_DOUBLE_EQ(*back[0].typed_at(15.0, WaveType::Pressure, 0), 6.5);
}
