#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rmm {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

/// ‖A − Aᴴ‖_F / ‖A‖_F.
double hermitian_defect(const SparseC& a);

struct SubspaceOptions {
  int max_iterations = 400;
  double tolerance = 1e-11;  // relative change of the wanted Ritz values
  std::uint64_t seed = 1;
};

struct EigenPairs {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXcd vectors;   // M-orthonormal columns
  int iterations = 0;
};

/// Lowest `count` eigenpairs of the Hermitian pencil K x = λ M x (K PSD,
/// M PD) by shift-invert block subspace iteration with Rayleigh–Ritz
/// projection. Small problems are solved densely.
EigenPairs lowest_eigenpairs(const SparseC& k, const SparseC& m, int count,
                             const SubspaceOptions& options = {});

}  // namespace rmm
