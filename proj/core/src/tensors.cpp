#include "rmm/tensors.hpp"

#include <cmath>
#include <string>

#include "rmm/error.hpp"
#include "rmm/units.hpp"

namespace rmm {

Eigen::Matrix3d TetragonalElasticity::voigt() const {
  Eigen::Matrix3d c;
  c << lambda + 2.0 * mu, lambda, 0.0,  //
      lambda, lambda + 2.0 * mu, 0.0,   //
      0.0, 0.0, mu_star;
  return c;
}

double TetragonalElasticity::energy_density(const Eigen::Matrix2d& strain) const {
  const Eigen::Vector3d e(strain(0, 0), strain(1, 1), strain(0, 1) + strain(1, 0));
  return 0.5 * e.dot(voigt() * e);
}

double relative_difference(const TetragonalElasticity& a,
                           const TetragonalElasticity& b) {
  const double denom = b.voigt().norm();
  return (a.voigt() - b.voigt()).norm() / (denom > 0.0 ? denom : 1.0);
}

bool strictly_stiffer(const TetragonalElasticity& stiff,
                      const TetragonalElasticity& soft) {
  return stiff.mu > soft.mu && stiff.mu_star > soft.mu_star &&
         stiff.bulk_family() > soft.bulk_family();
}

namespace {

double series(double a, double b) { return a * b / (a + b); }

double inverse_series(double micro, double macro, const char* family) {
  const double gap = micro - macro;
  if (!(gap > 0.0)) {
    throw ValidationError(std::string("C_micro must be strictly stiffer than "
                                      "C_macro in the ") +
                          family + " family");
  }
  return micro * macro / gap;
}

}  // namespace

TetragonalElasticity macro_from_micro_e(const TetragonalElasticity& c_micro,
                                        const TetragonalElasticity& c_e) {
  if (!c_micro.positive_definite() || !c_e.positive_definite()) {
    throw ValidationError("macro_from_micro_e: inputs must be positive definite");
  }
  return TetragonalElasticity::from_families(
      series(c_micro.bulk_family(), c_e.bulk_family()),
      series(c_micro.mu, c_e.mu), series(c_micro.mu_star, c_e.mu_star));
}

TetragonalElasticity e_from_micro_macro(const TetragonalElasticity& c_micro,
                                        const TetragonalElasticity& c_macro) {
  return TetragonalElasticity::from_families(
      inverse_series(c_micro.bulk_family(), c_macro.bulk_family(), "lambda+mu"),
      inverse_series(c_micro.mu, c_macro.mu, "mu"),
      inverse_series(c_micro.mu_star, c_macro.mu_star, "mu*"));
}

double round_trip_check(const TetragonalElasticity& c_micro,
                        const TetragonalElasticity& c_macro) {
  const auto c_e = e_from_micro_macro(c_micro, c_macro);
  return relative_difference(macro_from_micro_e(c_micro, c_e), c_macro);
}

bool RmmStaticParams::admissible() const {
  return c_e.positive_definite() && c_micro.positive_definite() && mu_c >= 0.0 &&
         mu_lc2 > 0.0;
}

RmmStaticParams RmmStaticParams::from_micro(const TetragonalElasticity& c_micro,
                                            const TetragonalElasticity& c_macro,
                                            double mu_c, double mu_lc2) {
  return {e_from_micro_macro(c_micro, c_macro), c_micro, mu_c, mu_lc2};
}

BaseMaterial aluminium() {
  return {51.08 * units::GPa, 26.32 * units::GPa, 2700.0};
}

}  // namespace rmm
