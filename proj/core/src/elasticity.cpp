#include "rmm/elasticity.hpp"

#include <cmath>

#include "rmm/error.hpp"
#include "rmm/shape_functions.hpp"

namespace rmm {

std::string to_string(LoadMode mode) {
  switch (mode) {
    case LoadMode::Volumetric: return "volumetric";
    case LoadMode::Deviatoric: return "deviatoric";
    case LoadMode::Shear: return "shear";
  }
  return "unknown";
}

LoadMode parse_load_mode(const std::string& s) {
  if (s == "volumetric") return LoadMode::Volumetric;
  if (s == "deviatoric") return LoadMode::Deviatoric;
  if (s == "shear") return LoadMode::Shear;
  throw ValidationError("unknown load mode '" + s + "'");
}

AffineLoadCase AffineLoadCase::volumetric(double a) {
  AffineLoadCase c;
  c.strain << a, 0.0, 0.0, a;
  c.mode = LoadMode::Volumetric;
  return c;
}

AffineLoadCase AffineLoadCase::deviatoric(double a) {
  AffineLoadCase c;
  c.strain << a, 0.0, 0.0, -a;
  c.mode = LoadMode::Deviatoric;
  return c;
}

AffineLoadCase AffineLoadCase::shear(double a) {
  AffineLoadCase c;
  c.strain << 0.0, a, a, 0.0;
  c.mode = LoadMode::Shear;
  return c;
}

AffineLoadCase AffineLoadCase::of(LoadMode mode, double a) {
  switch (mode) {
    case LoadMode::Volumetric: return volumetric(a);
    case LoadMode::Deviatoric: return deviatoric(a);
    case LoadMode::Shear: return shear(a);
  }
  return volumetric(a);
}

std::vector<AffineLoadCase> AffineLoadCase::standard_set(double a) {
  return {volumetric(a), deviatoric(a), shear(a)};
}

namespace fem {

Eigen::Matrix<double, 18, 18> q2_stiffness(const TetragonalElasticity& c) {
  const auto rule = gauss_legendre(3);
  const Eigen::Matrix3d d = c.voigt();
  Eigen::Matrix<double, 18, 18> ke = Eigen::Matrix<double, 18, 18>::Zero();
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const auto s = q2_eval(rule.points[i], rule.points[j]);
      // Derivatives in reference coordinates; the h⁻² of the gradients
      // cancels the h² of the Jacobian.
      Eigen::Matrix<double, 3, 18> b = Eigen::Matrix<double, 3, 18>::Zero();
      for (int k = 0; k < 9; ++k) {
        b(0, 2 * k) = s.dn_dxi[k];
        b(1, 2 * k + 1) = s.dn_deta[k];
        b(2, 2 * k) = s.dn_deta[k];
        b(2, 2 * k + 1) = s.dn_dxi[k];
      }
      ke += rule.weights[i] * rule.weights[j] * b.transpose() * d * b;
    }
  }
  return ke;
}

Eigen::Matrix<double, 18, 18> q2_mass(double rho, double h) {
  const auto rule = gauss_legendre(3);
  Eigen::Matrix<double, 18, 18> me = Eigen::Matrix<double, 18, 18>::Zero();
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const auto s = q2_eval(rule.points[i], rule.points[j]);
      const double w = rule.weights[i] * rule.weights[j] * rho * h * h;
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
          const double v = w * s.n[a] * s.n[b];
          me(2 * a, 2 * b) += v;
          me(2 * a + 1, 2 * b + 1) += v;
        }
      }
    }
  }
  return me;
}

void apply_affine_displacement(const StructuredMesh& mesh, const DofMap& dofs,
                               const AffineLoadCase& load, Eigen::VectorXd& q,
                               std::vector<char>* prescribed) {
  for (int n = 0; n < mesh.node_count(); ++n) {
    const int d = dofs.node_dof[n];
    if (d < 0 || !mesh.node_on_boundary(n)) continue;
    const Eigen::Vector2d u = load.displacement(mesh.node_coord(n));
    q[d] = u.x();
    q[d + 1] = u.y();
    if (prescribed) {
      (*prescribed)[d] = 1;
      (*prescribed)[d + 1] = 1;
    }
  }
}

void require_anchored(const StructuredMesh& mesh) {
  if (mesh.solid_count() == 0) throw NumericError("singular system: mesh has no solid element");
  const auto [comp, count] = mesh.solid_components();
  std::vector<char> anchored(count, 0);
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (comp[e] < 0) continue;
    const int ix = e % mesh.nx();
    const int iy = e / mesh.nx();
    if (ix == 0 || iy == 0 || ix == mesh.nx() - 1 || iy == mesh.ny() - 1) anchored[comp[e]] = 1;
  }
  for (char a : anchored) {
    if (!a) throw NumericError("singular system: floating solid region (disconnected geometry)");
  }
}

}  // namespace fem

namespace {

std::vector<char> boundary_mask(const StructuredMesh& mesh, const fem::DofMap& dofs) {
  std::vector<char> mask(dofs.n_dofs, 0);
  Eigen::VectorXd scratch = Eigen::VectorXd::Zero(dofs.n_dofs);
  fem::apply_affine_displacement(mesh, dofs, AffineLoadCase{}, scratch, &mask);
  return mask;
}

std::shared_ptr<fem::TermOperator> assemble_stiffness(
    const StructuredMesh& mesh, const fem::DofMap& dofs,
    const std::vector<TetragonalElasticity>& phases) {
  auto op = std::make_shared<fem::TermOperator>(dofs, 1);
  std::vector<Eigen::MatrixXd> ke(phases.size());
  for (std::size_t p = 0; p < phases.size(); ++p) ke[p] = fem::q2_stiffness(phases[p]);
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    op->add_element(0, dofs.element_dofs[e], ke[mesh.phase(e)]);
  }
  return op;
}

}  // namespace

ElasticityProblem::ElasticityProblem(StructuredMesh mesh,
                                     std::vector<TetragonalElasticity> phases)
    : mesh_(std::move(mesh)),
      phases_(std::move(phases)),
      dofs_(fem::make_displacement_map(mesh_)),
      system_([&] {
        for (int e = 0; e < mesh_.element_count(); ++e) {
          if (mesh_.solid(e) && mesh_.phase(e) >= static_cast<int>(phases_.size())) {
            throw ValidationError("ElasticityProblem: element phase without material");
          }
        }
        fem::require_anchored(mesh_);
        return fem::ConstrainedSystem(assemble_stiffness(mesh_, dofs_, phases_),
                                      boundary_mask(mesh_, dofs_));
      }()) {
  const double one = 1.0;
  system_.factorize(std::span<const double>(&one, 1));
}

ElasticSolution ElasticityProblem::solve(const AffineLoadCase& load) const {
  ElasticSolution s;
  s.u = Eigen::VectorXd::Zero(dofs_.n_dofs);
  fem::apply_affine_displacement(mesh_, dofs_, load, s.u);
  system_.solve(s.u);
  s.energy = system_.energy(s.u);
  return s;
}

ElasticSolution solve_elasticity(const StructuredMesh& mesh,
                                 const std::vector<TetragonalElasticity>& phases,
                                 const AffineLoadCase& load) {
  return ElasticityProblem(mesh, phases).solve(load);
}

}  // namespace rmm
