#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "rmm/elasticity.hpp"
#include "rmm/geometry.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

struct MacroIdentification {
  TetragonalElasticity c_macro;
  double apparent_rho = 0.0;  // kg/m³, ρ_base × solid fraction
  double solid_fraction = 0.0;
  Eigen::Matrix3d voigt = Eigen::Matrix3d::Zero();  // full homogenised matrix
};

/// Effective Voigt matrix on (ε11, ε22, 2ε12) from three unit macro-strains
/// with periodic fluctuations on a single cell. `phases[p]` is the material
/// of shape phase p.
Eigen::Matrix3d homogenize_periodic_full(const UnitCellGeometry& geometry,
                                         const std::vector<TetragonalElasticity>& phases,
                                         int resolution);

/// Tetragonal projection of the homogenised tensor. Throws ValidationError
/// when the result is not tetragonal to `tolerance` relative to its largest
/// entry.
TetragonalElasticity tetragonal_projection(const Eigen::Matrix3d& voigt,
                                           double tolerance = 1e-8);

MacroIdentification homogenize_periodic(const UnitCellGeometry& geometry,
                                        const BaseMaterial& base, int resolution);

struct ReferenceEnergy {
  LoadMode mode = LoadMode::Volumetric;
  int n = 1;
  double energy = 0.0;              // J per unit thickness
  double relative_stiffness = 0.0;  // energy / (n² × single-cell macro energy)
  Eigen::Matrix2d strain = Eigen::Matrix2d::Zero();
};

/// Π_het of fully meshed n×n specimens under affine Dirichlet data. Rows are
/// ordered by n, then by load. When c_macro is absent, relative_stiffness is 0.
std::vector<ReferenceEnergy> reference_energies(
    const UnitCellGeometry& geometry, const std::vector<TetragonalElasticity>& phases,
    const std::vector<int>& n_list, const std::vector<AffineLoadCase>& loads, int resolution,
    const std::optional<TetragonalElasticity>& c_macro = std::nullopt);

std::vector<ReferenceEnergy> reference_energies(
    const UnitCellGeometry& geometry, const BaseMaterial& base, const std::vector<int>& n_list,
    const std::vector<AffineLoadCase>& loads, int resolution,
    const std::optional<TetragonalElasticity>& c_macro = std::nullopt);

/// CSV with columns mode,n,energy,relative_stiffness.
void write_energy_csv(std::ostream& os, const std::vector<ReferenceEnergy>& table);

}  // namespace rmm
