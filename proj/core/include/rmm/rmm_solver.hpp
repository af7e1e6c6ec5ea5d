#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rmm/elasticity.hpp"
#include "rmm/fem_assembly.hpp"
#include "rmm/mesh.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

/// The strain energy is linear in these eight material scalars; the
/// assembled operator keeps one matrix per scalar.
enum RmmTerm : int {
  kLambdaE = 0,
  kMuE,
  kMuStarE,
  kMuC,
  kLambdaMicro,
  kMuMicro,
  kMuStarMicro,
  kMuLc2,
  kRmmTermCount
};

using TermVector = std::array<double, kRmmTermCount>;
TermVector term_weights(const RmmStaticParams& params);

using Vector5d = Eigen::Matrix<double, 5, 1>;

/// Unknowns of the static identification, in the order
/// (μ_micro, μ*_micro, λ_micro, μ_c, μLc²). C_macro is held fixed and C_e
/// follows from it.
struct StaticUnknowns {
  double mu_micro = 0.0;
  double mu_star_micro = 0.0;
  double lambda_micro = 0.0;
  double mu_c = 0.0;
  double mu_lc2 = 0.0;

  Vector5d vec() const { return {mu_micro, mu_star_micro, lambda_micro, mu_c, mu_lc2}; }
  static StaticUnknowns from(const Vector5d& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  TetragonalElasticity c_micro() const { return {lambda_micro, mu_micro, mu_star_micro}; }
  RmmStaticParams params(const TetragonalElasticity& c_macro) const {
    return RmmStaticParams::from_micro(c_micro(), c_macro, mu_c, mu_lc2);
  }
  /// The five inequalities that keep every energy term non-negative.
  bool admissible(const TetragonalElasticity& c_macro) const;
};

struct RmmOptions {
  int nedelec_order = 2;
  bool consistent_bc = true;
};

/// Equilibrium state of one load case. `q` stacks [u | P¹ | P²].
struct RmmSolution {
  Eigen::VectorXd q;
  double energy = 0.0;
  /// ∂Π/∂θ_j at the fixed solution, i.e. ½ qᵀK_j q.
  TermVector term_energy{};
};

/// RMM on a structured mesh with affine displacement data on the whole
/// boundary and optionally the consistent tangential condition P·τ = ∇ū·τ.
/// Assembly happens once; every parameter set is one numeric LDLᵀ
/// factorisation shared by all load cases.
class RmmProblem {
 public:
  RmmProblem(StructuredMesh mesh, RmmOptions options = {});

  std::vector<RmmSolution> solve(const RmmStaticParams& params,
                                 std::span<const AffineLoadCase> loads);
  RmmSolution solve(const RmmStaticParams& params, const AffineLoadCase& load);

  const StructuredMesh& mesh() const { return mesh_; }
  const fem::DofMap& dofs() const { return dofs_; }
  const RmmOptions& options() const { return options_; }
  const fem::TermOperator& op() const { return *op_; }

  /// Nodal/point interpolation of analytic fields into the discrete spaces.
  Eigen::VectorXd interpolate(
      const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u,
      const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& p) const;
  /// ∂Π/∂q = K(θ) q for every dof.
  Eigen::VectorXd residual(const TermVector& theta, const Eigen::VectorXd& q) const;
  /// Prescribed-dof mask of the current boundary conditions.
  const std::vector<char>& prescribed() const { return system_.prescribed(); }

  /// Element-wise P evaluated at element centres: rows (P11, P12, P21, P22).
  Eigen::MatrixXd microdistortion_at_centres(const Eigen::VectorXd& q) const;

 private:
  void apply_bc(const AffineLoadCase& load, Eigen::VectorXd& q) const;

  StructuredMesh mesh_;
  RmmOptions options_;
  fem::DofMap dofs_;
  std::shared_ptr<fem::TermOperator> op_;
  fem::ConstrainedSystem system_;
};

RmmSolution solve_rmm(const StructuredMesh& mesh, const RmmStaticParams& params,
                      const AffineLoadCase& load, const RmmOptions& options = {});

/// Chain rule from the raw term derivatives to the identification unknowns
/// with C_macro fixed (C_e depends on C_micro through the inverse series
/// relation).
Vector5d chain_to_unknowns(const TermVector& d_theta, const TetragonalElasticity& c_micro,
                           const TetragonalElasticity& c_macro);

/// ∂Π/∂Λ for Λ = (μ_micro, μ*_micro, λ_micro, μ_c, μLc²) at equilibrium.
Vector5d energy_sensitivities(RmmProblem& problem, const StaticUnknowns& unknowns,
                              const TetragonalElasticity& c_macro,
                              const AffineLoadCase& load);

}  // namespace rmm
