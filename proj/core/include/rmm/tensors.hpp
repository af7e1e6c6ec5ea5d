#pragma once

#include <Eigen/Dense>

namespace rmm {

/// 2D tetragonal fourth-order elasticity tensor described by (λ, μ, μ*).
///
/// Voigt form on (ε11, ε22, 2ε12):
///
///     | λ+2μ   λ     0  |
///     |  λ    λ+2μ   0  |
///     |  0     0     μ* |
///
/// Its eigenvalues are 2(λ+μ), 2μ and μ*; all algebra between tensors of this
/// class is done on those three scalar families.
struct TetragonalElasticity {
  double lambda = 0.0;
  double mu = 0.0;
  double mu_star = 0.0;

  // Family scalars; the tensor is diagonal in this basis.
  double bulk_family() const { return lambda + mu; }
  double deviatoric_family() const { return mu; }
  double shear_family() const { return mu_star; }

  static TetragonalElasticity from_families(double lambda_plus_mu, double mu,
                                            double mu_star) {
    return {lambda_plus_mu - mu, mu, mu_star};
  }
  static TetragonalElasticity isotropic(double lambda, double mu) {
    return {lambda, mu, mu};
  }

  Eigen::Matrix3d voigt() const;
  bool positive_definite() const {
    return mu > 0.0 && mu_star > 0.0 && lambda + mu > 0.0;
  }
  TetragonalElasticity scaled(double s) const {
    return {s * lambda, s * mu, s * mu_star};
  }

  /// ½ ε:C:ε for a symmetric 2×2 strain.
  double energy_density(const Eigen::Matrix2d& strain) const;

  friend bool operator==(const TetragonalElasticity&,
                         const TetragonalElasticity&) = default;
};

/// Relative Frobenius distance of the Voigt matrices.
double relative_difference(const TetragonalElasticity& a,
                           const TetragonalElasticity& b);

/// True when every scalar family of `stiff` exceeds the one of `soft`.
bool strictly_stiffer(const TetragonalElasticity& stiff,
                      const TetragonalElasticity& soft);

/// Series sum C_micro (C_e + C_micro)^-1 C_e. Throws ValidationError when an
/// input is not positive definite.
TetragonalElasticity macro_from_micro_e(const TetragonalElasticity& c_micro,
                                        const TetragonalElasticity& c_e);

/// Inverse relation C_micro (C_micro - C_macro)^-1 C_macro. Requires c_micro
/// strictly stiffer than c_macro in each family.
TetragonalElasticity e_from_micro_macro(const TetragonalElasticity& c_micro,
                                        const TetragonalElasticity& c_macro);

/// Relative error of macro_from_micro_e(c_micro, e_from_micro_macro(...)).
double round_trip_check(const TetragonalElasticity& c_micro,
                        const TetragonalElasticity& c_macro);

/// Static RMM parameters. mu_lc2 is the product μ·Lc² in N (per unit
/// thickness in 2D).
struct RmmStaticParams {
  TetragonalElasticity c_e;
  TetragonalElasticity c_micro;
  double mu_c = 0.0;
  double mu_lc2 = 0.0;

  /// Admissibility: both tensors PD, μc ≥ 0, μLc² > 0.
  bool admissible() const;
  TetragonalElasticity c_macro() const {
    return macro_from_micro_e(c_micro, c_e);
  }
  /// Build from the fit unknowns with C_macro held fixed.
  static RmmStaticParams from_micro(const TetragonalElasticity& c_micro,
                                    const TetragonalElasticity& c_macro,
                                    double mu_c, double mu_lc2);
};

struct BaseMaterial {
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;

  bool valid() const { return lambda + 2.0 * mu > 0.0 && mu > 0.0 && rho > 0.0; }
  TetragonalElasticity elasticity() const {
    return TetragonalElasticity::isotropic(lambda, mu);
  }
};

/// Aluminium constants of the reference unit cell (plane strain, SI).
BaseMaterial aluminium();

}  // namespace rmm
