#include "rmm/homogenization.hpp"

#include <cmath>
#include <iomanip>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rmm/error.hpp"
#include "rmm/fem_assembly.hpp"
#include "rmm/mesh.hpp"
#include "rmm/parallel.hpp"

namespace rmm {

Eigen::Matrix3d homogenize_periodic_full(const UnitCellGeometry& geometry,
                                         const std::vector<TetragonalElasticity>& phases,
                                         int resolution) {
  geometry.validate();
  const StructuredMesh mesh = build_mesh(geometry, 1, resolution);
  if (mesh.solid_count() == 0) throw NumericError("homogenization: cell has no solid element");
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (mesh.solid(e) && mesh.phase(e) >= static_cast<int>(phases.size())) {
      throw ValidationError("homogenization: element phase without material");
    }
  }
  const auto images = fem::periodic_images(mesh);
  const fem::DofMap dofs = fem::make_periodic_displacement_map(mesh, images);

  std::vector<Eigen::Matrix<double, 18, 18>> ke(phases.size());
  for (std::size_t p = 0; p < phases.size(); ++p) ke[p] = fem::q2_stiffness(phases[p]);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.solid_count()) * 324);
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    const auto& d = dofs.element_dofs[e];
    const auto& k = ke[mesh.phase(e)];
    for (int a = 0; a < 18; ++a)
      for (int b = 0; b < 18; ++b) trip.emplace_back(d[a], d[b], k(a, b));
  }
  Eigen::SparseMatrix<double> kfull(dofs.n_dofs, dofs.n_dofs);
  kfull.setFromTriplets(trip.begin(), trip.end());

  // Rigid translation is removed by pinning the first node's fluctuation.
  const int pinned = 2;
  const int nf = dofs.n_dofs - pinned;
  Eigen::SparseMatrix<double> kred = kfull.bottomRightCorner(nf, nf);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kred);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw NumericError("homogenization: singular periodic stiffness (disconnected cell)");
  }

  std::array<Eigen::Matrix2d, 3> unit;
  unit[0] << 1, 0, 0, 0;
  unit[1] << 0, 0, 0, 1;
  unit[2] << 0, 0.5, 0.5, 0;

  // Element displacement vectors of the total field for each unit strain.
  std::array<std::vector<Eigen::Matrix<double, 18, 1>>, 3> total;
  for (int c = 0; c < 3; ++c) {
    std::vector<Eigen::Matrix<double, 18, 1>> affine(mesh.element_count());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs.n_dofs);
    for (int e = 0; e < mesh.element_count(); ++e) {
      if (!mesh.solid(e)) continue;
      const auto nodes = mesh.element_nodes(e);
      for (int a = 0; a < 9; ++a) {
        const Eigen::Vector2d u = unit[c] * mesh.node_coord(nodes[a]);
        affine[e][2 * a] = u.x();
        affine[e][2 * a + 1] = u.y();
      }
      const Eigen::Matrix<double, 18, 1> fe = -(ke[mesh.phase(e)] * affine[e]);
      const auto& d = dofs.element_dofs[e];
      for (int a = 0; a < 18; ++a) f[d[a]] += fe[a];
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dofs.n_dofs);
    w.tail(nf) = ldlt.solve(f.tail(nf));
    total[c].resize(mesh.element_count());
    for (int e = 0; e < mesh.element_count(); ++e) {
      if (!mesh.solid(e)) continue;
      const auto& d = dofs.element_dofs[e];
      for (int a = 0; a < 18; ++a) total[c][e][a] = affine[e][a] + w[d[a]];
    }
  }

  const double area = mesh.width() * mesh.height();
  Eigen::Matrix3d cv = Eigen::Matrix3d::Zero();
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    const auto& k = ke[mesh.phase(e)];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cv(i, j) += total[i][e].dot(k * total[j][e]);
  }
  cv /= area;
  return 0.5 * (cv + cv.transpose());
}

TetragonalElasticity tetragonal_projection(const Eigen::Matrix3d& v, double tolerance) {
  const double scale = v.cwiseAbs().maxCoeff();
  const double defect = std::max({std::abs(v(0, 0) - v(1, 1)), std::abs(v(0, 2)),
                                  std::abs(v(1, 2))});
  if (!(defect <= tolerance * scale)) {
    throw ValidationError("homogenization: result is not tetragonal (relative defect " +
                          std::to_string(defect / scale) + ")");
  }
  const double c11 = 0.5 * (v(0, 0) + v(1, 1));
  const double lambda = v(0, 1);
  return {lambda, 0.5 * (c11 - lambda), v(2, 2)};
}

MacroIdentification homogenize_periodic(const UnitCellGeometry& geometry,
                                        const BaseMaterial& base, int resolution) {
  if (!base.valid()) throw ValidationError("homogenization: invalid base material");
  std::vector<TetragonalElasticity> phases(std::max(1, geometry.phase_count()),
                                           base.elasticity());
  MacroIdentification out;
  out.voigt = homogenize_periodic_full(geometry, phases, resolution);
  out.c_macro = tetragonal_projection(out.voigt);
  out.solid_fraction = build_mesh(geometry, 1, resolution).solid_fraction();
  out.apparent_rho = base.rho * out.solid_fraction;
  return out;
}

std::vector<ReferenceEnergy> reference_energies(
    const UnitCellGeometry& geometry, const std::vector<TetragonalElasticity>& phases,
    const std::vector<int>& n_list, const std::vector<AffineLoadCase>& loads, int resolution,
    const std::optional<TetragonalElasticity>& c_macro) {
  if (n_list.empty()) throw ValidationError("reference_energies: empty size list");
  if (loads.empty()) throw ValidationError("reference_energies: no load case");
  for (int n : n_list) {
    if (n < 1) throw ValidationError("reference_energies: sizes must be ≥ 1");
  }
  std::vector<ReferenceEnergy> table(n_list.size() * loads.size());
  parallel_for(n_list.size(), [&](std::size_t in) {
    const int n = n_list[in];
    const ElasticityProblem problem(build_mesh(geometry, n, resolution), phases);
    for (std::size_t il = 0; il < loads.size(); ++il) {
      auto& row = table[in * loads.size() + il];
      row.mode = loads[il].mode;
      row.n = n;
      row.strain = loads[il].strain;
      row.energy = problem.solve(loads[il]).energy;
      if (c_macro) {
        const double unit = c_macro->energy_density(loads[il].strain) * geometry.l * geometry.l;
        row.relative_stiffness = row.energy / (n * n * unit);
      }
    }
  });
  return table;
}

std::vector<ReferenceEnergy> reference_energies(
    const UnitCellGeometry& geometry, const BaseMaterial& base, const std::vector<int>& n_list,
    const std::vector<AffineLoadCase>& loads, int resolution,
    const std::optional<TetragonalElasticity>& c_macro) {
  std::vector<TetragonalElasticity> phases(std::max(1, geometry.phase_count()),
                                           base.elasticity());
  return reference_energies(geometry, phases, n_list, loads, resolution, c_macro);
}

void write_energy_csv(std::ostream& os, const std::vector<ReferenceEnergy>& table) {
  os << "mode,n,energy,relative_stiffness\n" << std::setprecision(15);
  for (const auto& r : table) {
    os << to_string(r.mode) << ',' << r.n << ',' << r.energy << ',' << r.relative_stiffness
       << '\n';
  }
}

}  // namespace rmm
