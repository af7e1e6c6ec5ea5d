#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmm/fem_assembly.hpp"
#include "rmm/mesh.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

enum class LoadMode { Volumetric, Deviatoric, Shear };

std::string to_string(LoadMode mode);
LoadMode parse_load_mode(const std::string& s);

/// Affine Dirichlet data ū = ε̄·x on the whole outer boundary.
struct AffineLoadCase {
  Eigen::Matrix2d strain = Eigen::Matrix2d::Zero();
  LoadMode mode = LoadMode::Volumetric;

  static AffineLoadCase volumetric(double a);
  static AffineLoadCase deviatoric(double a);
  static AffineLoadCase shear(double a);
  static AffineLoadCase of(LoadMode mode, double a);
  /// The three fundamental modes with amplitude a.
  static std::vector<AffineLoadCase> standard_set(double a);

  Eigen::Vector2d displacement(const Eigen::Vector2d& x) const { return strain * x; }
};

struct ElasticSolution {
  Eigen::VectorXd u;
  double energy = 0.0;  // J per unit thickness, ½∫ε:C:ε
};

namespace fem {
/// Q2 plane-strain stiffness of a square element of any size for one phase.
Eigen::Matrix<double, 18, 18> q2_stiffness(const TetragonalElasticity& c);
/// Q2 consistent mass of a square element of edge h.
Eigen::Matrix<double, 18, 18> q2_mass(double rho, double h);
/// Prescribe ū on every active outer-boundary node.
void apply_affine_displacement(const StructuredMesh& mesh, const DofMap& dofs,
                               const AffineLoadCase& load, Eigen::VectorXd& q,
                               std::vector<char>* prescribed = nullptr);
/// NumericError unless every solid component reaches the outer boundary.
void require_anchored(const StructuredMesh& mesh);
}  // namespace fem

/// Classical heterogeneous linear elasticity on a structured mesh. The
/// stiffness is factorised once; each load case is a back substitution.
class ElasticityProblem {
 public:
  ElasticityProblem(StructuredMesh mesh, std::vector<TetragonalElasticity> phases);

  ElasticSolution solve(const AffineLoadCase& load) const;

  const StructuredMesh& mesh() const { return mesh_; }
  const fem::DofMap& dofs() const { return dofs_; }
  const fem::TermOperator& stiffness() const { return system_.op(); }

 private:
  StructuredMesh mesh_;
  std::vector<TetragonalElasticity> phases_;
  fem::DofMap dofs_;
  fem::ConstrainedSystem system_;
};

ElasticSolution solve_elasticity(const StructuredMesh& mesh,
                                 const std::vector<TetragonalElasticity>& phases,
                                 const AffineLoadCase& load);

}  // namespace rmm
