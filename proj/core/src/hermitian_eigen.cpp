#include "rmm/hermitian_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "rmm/error.hpp"

namespace rmm {

double hermitian_defect(const SparseC& a) {
  const SparseC diff = SparseC(a.adjoint()) - a;
  const double n = a.norm();
  return n > 0.0 ? diff.norm() / n : 0.0;
}

namespace {

EigenPairs rayleigh_ritz(const Eigen::MatrixXcd& kr, const Eigen::MatrixXcd& mr, int count) {
  const Eigen::MatrixXcd ks = 0.5 * (kr + kr.adjoint());
  const Eigen::MatrixXcd ms = 0.5 * (mr + mr.adjoint());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(ks, ms);
  if (es.info() != Eigen::Success) throw NumericError("eigen: Rayleigh–Ritz projection failed");
  EigenPairs out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  return out;
}

}  // namespace

EigenPairs lowest_eigenpairs(const SparseC& k, const SparseC& m, int count,
                             const SubspaceOptions& opt) {
  const int n = static_cast<int>(k.rows());
  if (count < 1 || count > n) throw ValidationError("eigen: invalid number of eigenpairs");
  if (n <= 400) {
    auto r = rayleigh_ritz(Eigen::MatrixXcd(k), Eigen::MatrixXcd(m), count);
    return r;
  }
  double ratio = 0.0;
  for (int i = 0; i < n; ++i) ratio += std::real(k.coeff(i, i)) / std::real(m.coeff(i, i));
  const double sigma = -1e-4 * ratio / n;
  const SparseC shifted = k - std::complex<double>(sigma) * m;
  Eigen::SimplicialLDLT<SparseC> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw NumericError("eigen: shifted factorisation failed");

  const int p = std::min(n, std::max(2 * count, count + 8));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = {nd(rng), nd(rng)};

  Eigen::VectorXd previous = Eigen::VectorXd::Constant(count, INFINITY);
  EigenPairs out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXcd y = ldlt.solve(m * x);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(y);
    y = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
    const Eigen::MatrixXcd kr = y.adjoint() * (k * y);
    const Eigen::MatrixXcd mr = y.adjoint() * (m * y);
    auto rr = rayleigh_ritz(kr, mr, p);
    x = y * rr.vectors;
    const Eigen::VectorXd cur = rr.values.head(count);
    const double scale = std::max(cur.cwiseAbs().maxCoeff(), std::abs(sigma));
    const double change = (cur - previous).cwiseAbs().maxCoeff();
    previous = cur;
    if (change <= opt.tolerance * scale) {
      out.values = cur;
      out.vectors = x.leftCols(count);
      out.iterations = it;
      return out;
    }
  }
  throw NumericError("eigen: subspace iteration did not converge");
}

}  // namespace rmm
