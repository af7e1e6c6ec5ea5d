#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rmm/dispersion_curves.hpp"
#include "rmm/geometry.hpp"
#include "rmm/hermitian_eigen.hpp"
#include "rmm/mesh.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

/// Edge of the first Brillouin zone along the incidence angle: π/l at 0°,
/// √2·π/l at 45°.
double brillouin_k_max(double angle, double l);
/// `count` equally spaced samples on [0, k_max], both ends included.
std::vector<double> k_grid(double angle, double l, int count);

/// Floquet-reduced Q2 elasticity of one unit cell. Dofs are those of the
/// periodic master nodes; image nodes carry the phase e^{i k·shift}.
class BlochCell {
 public:
  BlochCell(const UnitCellGeometry& geometry, const BaseMaterial& base, int resolution);

  struct System {
    SparseC k;
    SparseC m;
  };
  System assemble(const Eigen::Vector2d& wavevector) const;

  /// Lowest n_branches frequencies at wavenumber k along `angle`, labelled
  /// by mirror parity when the angle is 0°, 45° or 90°.
  DispersionSample solve(double angle, double k, int n_branches) const;

  const StructuredMesh& mesh() const { return mesh_; }
  int dof_count() const { return n_dofs_; }
  bool symmetric() const { return symmetric_; }

 private:
  struct Mirror {
    std::vector<int> source;
    std::vector<double> sign;
  };
  Mirror make_mirror(int kind) const;  // 0: y→−y, 1: x↔y, 2: x→−x

  StructuredMesh mesh_;
  BaseMaterial base_;
  std::vector<int> master_;
  std::vector<signed char> shift_x_;
  std::vector<signed char> shift_y_;
  std::vector<int> node_dof_;
  int n_dofs_ = 0;
  Eigen::Matrix<double, 18, 18> ke_;
  Eigen::Matrix<double, 18, 18> me_;
  bool symmetric_ = false;
};

DispersionCurveSet bloch_bands(const UnitCellGeometry& geometry, const BaseMaterial& base,
                               double angle, const std::vector<double>& k_samples,
                               int n_branches, int resolution);

}  // namespace rmm
