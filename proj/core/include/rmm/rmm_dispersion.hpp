#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rmm/dispersion_curves.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

/// Inertia coefficients, each already multiplied by ρL_c² (kg/m), plus the
/// curvature inertia ρL_c⁴M (kg·m). The m1/c1 block acts on Ṗ, the m2/c2
/// block on ∇u̇, with the same Voigt structure as the elastic tensors.
struct RmmDynamicParams {
  double lambda_m1 = 0.0;
  double mu_m1 = 0.0;
  double mu_star_m1 = 0.0;
  double mu_c1 = 0.0;
  double lambda_m2 = 0.0;
  double mu_m2 = 0.0;
  double mu_star_m2 = 0.0;
  double mu_c2 = 0.0;
  double curv_inertia = 0.0;

  /// Positive cut-off denominators and non-negative curvature inertia.
  bool admissible() const {
    return mu_m1 > 0.0 && mu_star_m1 > 0.0 && lambda_m1 + mu_m1 > 0.0 && mu_c1 > 0.0 &&
           curv_inertia >= 0.0;
  }
};

using Matrix6c = Eigen::Matrix<std::complex<double>, 6, 6>;

/// Amplitudes ordered (ψ1, ψ2, P11, P12, P21, P22).
struct PlaneWaveSystem {
  Matrix6c k;
  Matrix6c m;
};

PlaneWaveSystem assemble_system(const RmmStaticParams& statics, const RmmDynamicParams& dyn,
                                double rho, double k, double angle);

/// ω3..ω6 as (shear1, shear2, pressure1, pressure2). Throws ValidationError
/// on a non-positive denominator. A zero μ_c gives ω3 = 0.
Cutoffs cutoffs(const RmmStaticParams& statics, const RmmDynamicParams& dyn, double rho);

/// Inverts the cut-off formulas for the m1/c1 block; the rest is zero.
RmmDynamicParams identify_j1(const RmmStaticParams& statics, double rho, const Cutoffs& measured);

/// Copies the m1/c1 block of `from` into `to`.
void set_j1(RmmDynamicParams& to, const RmmDynamicParams& from);

/// Orthonormal real basis whose first three columns span the pressure
/// amplitudes and last three the shear amplitudes. Only 0°, 45° and 90°
/// decouple; returns false otherwise.
bool decoupling_basis(double angle, Eigen::Matrix<double, 6, 6>& q);

/// Generalised eigenvalues ω² of (K, M), ascending. Throws NumericError if
/// M is not positive definite.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXcd& k, const Eigen::MatrixXcd& m);

struct BlockEigenvalues {
  Eigen::Vector3d pressure;  // ω², ascending
  Eigen::Vector3d shear;
};
BlockEigenvalues decoupled_eigenvalues(const PlaneWaveSystem& sys, double angle);

/// Pressure/shear branches at each k; angles without decoupling get Mixed
/// labels from the full 6×6 problem.
DispersionCurveSet branches(const RmmStaticParams& statics, const RmmDynamicParams& dyn,
                            double rho, double angle, const std::vector<double>& k_samples);

/// Smallest ω²·scale-normalised eigenvalue over the samples; negative values
/// signal imaginary frequencies.
double min_relative_eigenvalue(const RmmStaticParams& statics, const RmmDynamicParams& dyn,
                               double rho, double angle, const std::vector<double>& k_samples);

}  // namespace rmm
