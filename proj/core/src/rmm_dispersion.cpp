#include "rmm/rmm_dispersion.hpp"

#include <cmath>
#include <numbers>

#include "rmm/error.hpp"

namespace rmm {

namespace {

using C = std::complex<double>;
using Vec6 = Eigen::Matrix<C, 6, 1>;

enum : int { kPsi1 = 0, kPsi2, kP11, kP12, kP21, kP22 };

Vec6 unit(int i) {
  Vec6 v = Vec6::Zero();
  v[i] = 1.0;
  return v;
}

/// θ·ḡ gᵀ so that Ψᴴ(·)Ψ = θ|g·Ψ|².
void add(Matrix6c& a, double theta, const Vec6& g) {
  if (theta == 0.0) return;
  a += theta * (g.conjugate() * g.transpose());
}

struct Functionals {
  Vec6 g11, g12, g21, g22;  // ∇u
  Vec6 p11, p12, p21, p22;  // P
  Vec6 c1, c2;              // curl of P rows
};

Functionals functionals(double k, double angle) {
  const double k1 = k * std::cos(angle);
  const double k2 = k * std::sin(angle);
  const C i(0.0, 1.0);
  Functionals f;
  f.g11 = i * k1 * unit(kPsi1);
  f.g12 = i * k2 * unit(kPsi1);
  f.g21 = i * k1 * unit(kPsi2);
  f.g22 = i * k2 * unit(kPsi2);
  f.p11 = unit(kP11);
  f.p12 = unit(kP12);
  f.p21 = unit(kP21);
  f.p22 = unit(kP22);
  f.c1 = i * (k1 * unit(kP12) - k2 * unit(kP11));
  f.c2 = i * (k1 * unit(kP22) - k2 * unit(kP21));
  return f;
}

/// Adds the three-family tetragonal form plus the skew part on a tensor
/// given by its four functionals.
void add_tensor_form(Matrix6c& a, double lambda, double mu, double mu_star, double skew,
                     const Vec6& t11, const Vec6& t12, const Vec6& t21, const Vec6& t22) {
  add(a, lambda, t11 + t22);
  add(a, 2.0 * mu, t11);
  add(a, 2.0 * mu, t22);
  add(a, mu_star, t12 + t21);
  add(a, skew, t12 - t21);
}

constexpr double kAngleTol = 1e-9;

}  // namespace

PlaneWaveSystem assemble_system(const RmmStaticParams& s, const RmmDynamicParams& d,
                                double rho, double k, double angle) {
  if (k < 0.0) throw ValidationError("assemble_system: k must be ≥ 0");
  const Functionals f = functionals(k, angle);
  PlaneWaveSystem sys;
  sys.k.setZero();
  sys.m.setZero();
  add_tensor_form(sys.k, s.c_e.lambda, s.c_e.mu, s.c_e.mu_star, s.mu_c, f.g11 - f.p11,
                  f.g12 - f.p12, f.g21 - f.p21, f.g22 - f.p22);
  add_tensor_form(sys.k, s.c_micro.lambda, s.c_micro.mu, s.c_micro.mu_star, 0.0, f.p11, f.p12,
                  f.p21, f.p22);
  add(sys.k, s.mu_lc2, f.c1);
  add(sys.k, s.mu_lc2, f.c2);

  add(sys.m, rho, unit(kPsi1));
  add(sys.m, rho, unit(kPsi2));
  add_tensor_form(sys.m, d.lambda_m1, d.mu_m1, d.mu_star_m1, d.mu_c1, f.p11, f.p12, f.p21,
                  f.p22);
  add_tensor_form(sys.m, d.lambda_m2, d.mu_m2, d.mu_star_m2, d.mu_c2, f.g11, f.g12, f.g21,
                  f.g22);
  add(sys.m, d.curv_inertia, f.c1);
  add(sys.m, d.curv_inertia, f.c2);
  return sys;
}

Cutoffs cutoffs(const RmmStaticParams& s, const RmmDynamicParams& d, double /*rho*/) {
  if (!(d.mu_c1 > 0.0 && d.mu_star_m1 > 0.0 && d.mu_m1 > 0.0 && d.lambda_m1 + d.mu_m1 > 0.0)) {
    throw ValidationError("cutoffs: non-positive inertia denominator");
  }
  Cutoffs c;
  c.shear1 = std::sqrt(std::max(s.mu_c, 0.0) / d.mu_c1);
  c.shear2 = std::sqrt((s.c_e.mu_star + s.c_micro.mu_star) / d.mu_star_m1);
  c.pressure1 = std::sqrt((s.c_e.mu + s.c_micro.mu) / d.mu_m1);
  c.pressure2 = std::sqrt((s.c_e.bulk_family() + s.c_micro.bulk_family()) /
                          (d.lambda_m1 + d.mu_m1));
  return c;
}

RmmDynamicParams identify_j1(const RmmStaticParams& s, double /*rho*/, const Cutoffs& w) {
  if (!(w.shear1 > 0.0 && w.shear2 > 0.0 && w.pressure1 > 0.0 && w.pressure2 > 0.0)) {
    throw ValidationError("identify_j1: cut-off frequencies must be positive");
  }
  if (!(s.mu_c > 0.0)) throw ValidationError("identify_j1: requires μ_c > 0");
  RmmDynamicParams d;
  d.mu_c1 = s.mu_c / (w.shear1 * w.shear1);
  d.mu_star_m1 = (s.c_e.mu_star + s.c_micro.mu_star) / (w.shear2 * w.shear2);
  d.mu_m1 = (s.c_e.mu + s.c_micro.mu) / (w.pressure1 * w.pressure1);
  const double lm = (s.c_e.bulk_family() + s.c_micro.bulk_family()) / (w.pressure2 * w.pressure2);
  d.lambda_m1 = lm - d.mu_m1;
  return d;
}

void set_j1(RmmDynamicParams& to, const RmmDynamicParams& from) {
  to.lambda_m1 = from.lambda_m1;
  to.mu_m1 = from.mu_m1;
  to.mu_star_m1 = from.mu_star_m1;
  to.mu_c1 = from.mu_c1;
}

bool decoupling_basis(double angle, Eigen::Matrix<double, 6, 6>& q) {
  q.setZero();
  const double r = 1.0 / std::sqrt(2.0);
  if (std::abs(angle) < kAngleTol) {
    q(kPsi1, 0) = q(kP11, 1) = q(kP22, 2) = 1.0;
    q(kPsi2, 3) = q(kP12, 4) = q(kP21, 5) = 1.0;
    return true;
  }
  if (std::abs(angle - std::numbers::pi / 2) < kAngleTol) {
    q(kPsi2, 0) = q(kP11, 1) = q(kP22, 2) = 1.0;
    q(kPsi1, 3) = q(kP12, 4) = q(kP21, 5) = 1.0;
    return true;
  }
  if (std::abs(angle - std::numbers::pi / 4) < kAngleTol) {
    q(kPsi1, 0) = q(kPsi2, 0) = r;
    q(kP11, 1) = q(kP22, 1) = r;
    q(kP12, 2) = q(kP21, 2) = r;
    q(kPsi1, 3) = r;
    q(kPsi2, 3) = -r;
    q(kP11, 4) = r;
    q(kP22, 4) = -r;
    q(kP12, 5) = r;
    q(kP21, 5) = -r;
    return true;
  }
  return false;
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXcd& k, const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd ks = 0.5 * (k + k.adjoint());
  const Eigen::MatrixXcd ms = 0.5 * (m + m.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(ms);
  if (llt.info() != Eigen::Success) throw NumericError("dispersion: M(k) is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(ks, ms, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("dispersion: eigen solve failed");
  return es.eigenvalues();
}

BlockEigenvalues decoupled_eigenvalues(const PlaneWaveSystem& sys, double angle) {
  Eigen::Matrix<double, 6, 6> q;
  if (!decoupling_basis(angle, q)) {
    throw ValidationError("dispersion: angle does not decouple pressure and shear");
  }
  const Eigen::Matrix<C, 6, 6> qc = q.cast<C>();
  const Matrix6c kq = qc.transpose() * sys.k * qc;
  const Matrix6c mq = qc.transpose() * sys.m * qc;
  BlockEigenvalues out;
  out.pressure = generalized_eigenvalues(kq.topLeftCorner<3, 3>(), mq.topLeftCorner<3, 3>());
  out.shear = generalized_eigenvalues(kq.bottomRightCorner<3, 3>(), mq.bottomRightCorner<3, 3>());
  return out;
}

DispersionCurveSet branches(const RmmStaticParams& s, const RmmDynamicParams& d, double rho,
                            double angle, const std::vector<double>& k_samples) {
  Eigen::Matrix<double, 6, 6> q;
  const bool split = decoupling_basis(angle, q);
  DispersionCurveSet set;
  set.angle = angle;
  for (double k : k_samples) {
    const PlaneWaveSystem sys = assemble_system(s, d, rho, k, angle);
    DispersionSample sm;
    sm.k = k;
    if (split) {
      const auto be = decoupled_eigenvalues(sys, angle);
      for (int i = 0; i < 3; ++i) {
        sm.omega.push_back(std::sqrt(std::max(be.pressure[i], 0.0)));
        sm.type.push_back(WaveType::Pressure);
      }
      for (int i = 0; i < 3; ++i) {
        sm.omega.push_back(std::sqrt(std::max(be.shear[i], 0.0)));
        sm.type.push_back(WaveType::Shear);
      }
    } else {
      const Eigen::VectorXd ev = generalized_eigenvalues(sys.k, sys.m);
      for (int i = 0; i < 6; ++i) {
        sm.omega.push_back(std::sqrt(std::max(ev[i], 0.0)));
        sm.type.push_back(WaveType::Mixed);
      }
    }
    set.samples.push_back(std::move(sm));
  }
  set.normalise();
  return set;
}

double min_relative_eigenvalue(const RmmStaticParams& s, const RmmDynamicParams& d, double rho,
                               double angle, const std::vector<double>& k_samples) {
  double worst = INFINITY;
  for (double k : k_samples) {
    const PlaneWaveSystem sys = assemble_system(s, d, rho, k, angle);
    const Eigen::VectorXd ev = generalized_eigenvalues(sys.k, sys.m);
    const double scale = std::max(std::abs(ev.maxCoeff()), 1e-300);
    worst = std::min(worst, ev.minCoeff() / scale);
  }
  return worst;
}

}  // namespace rmm
