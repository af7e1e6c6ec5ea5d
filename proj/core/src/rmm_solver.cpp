#include "rmm/rmm_solver.hpp"

#include <cmath>

#include "rmm/error.hpp"
#include "rmm/shape_functions.hpp"

namespace rmm {

TermVector term_weights(const RmmStaticParams& p) {
  return {p.c_e.lambda,     p.c_e.mu,     p.c_e.mu_star,     p.mu_c,
          p.c_micro.lambda, p.c_micro.mu, p.c_micro.mu_star, p.mu_lc2};
}

bool StaticUnknowns::admissible(const TetragonalElasticity& c_macro) const {
  return mu_micro > c_macro.mu && mu_star_micro > c_macro.mu_star &&
         lambda_micro + mu_micro > c_macro.bulk_family() && mu_c >= 0.0 && mu_lc2 > 0.0;
}

namespace {

/// The eight term matrices of a single square element of edge h.
std::array<Eigen::MatrixXd, kRmmTermCount> element_terms(int order, double h) {
  const fem::NedelecBasis ned(order);
  const int nb = ned.size();
  const int m = 18 + 2 * nb;
  const int off1 = 18;
  const int off2 = 18 + nb;
  std::array<Eigen::MatrixXd, kRmmTermCount> ke;
  for (auto& k : ke) k = Eigen::MatrixXd::Zero(m, m);

  const auto rule = fem::gauss_legendre(std::max(3, order + 1));
  fem::NedelecBasis::Eval ev;
  Eigen::VectorXd g11(m), g12(m), g21(m), g22(m), p11(m), p12(m), p21(m), p22(m),
      c1(m), c2(m);
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const double xi = rule.points[i];
      const double eta = rule.points[j];
      const double w = rule.weights[i] * rule.weights[j] * h * h;
      const auto s = fem::q2_eval(xi, eta);
      ned.eval(xi, eta, ev);
      for (auto* v : {&g11, &g12, &g21, &g22, &p11, &p12, &p21, &p22, &c1, &c2}) v->setZero();
      for (int k = 0; k < 9; ++k) {
        g11[2 * k] = s.dn_dxi[k] / h;
        g12[2 * k] = s.dn_deta[k] / h;
        g21[2 * k + 1] = s.dn_dxi[k] / h;
        g22[2 * k + 1] = s.dn_deta[k] / h;
      }
      for (int k = 0; k < nb; ++k) {
        p11[off1 + k] = ev.vx[k];
        p12[off1 + k] = ev.vy[k];
        p21[off2 + k] = ev.vx[k];
        p22[off2 + k] = ev.vy[k];
        c1[off1 + k] = ev.curl[k] / h;
        c2[off2 + k] = ev.curl[k] / h;
      }
      const Eigen::VectorXd a11 = g11 - p11;
      const Eigen::VectorXd a12 = g12 - p12;
      const Eigen::VectorXd a21 = g21 - p21;
      const Eigen::VectorXd a22 = g22 - p22;
      auto add = [&](int term, const Eigen::VectorXd& g) { ke[term] += w * g * g.transpose(); };
      add(kLambdaE, a11 + a22);
      add(kMuE, sqrt2 * a11);
      add(kMuE, sqrt2 * a22);
      add(kMuStarE, a12 + a21);
      add(kMuC, a12 - a21);
      add(kLambdaMicro, p11 + p22);
      add(kMuMicro, sqrt2 * p11);
      add(kMuMicro, sqrt2 * p22);
      add(kMuStarMicro, p12 + p21);
      add(kMuLc2, c1);
      add(kMuLc2, c2);
    }
  }
  return ke;
}

std::shared_ptr<fem::TermOperator> assemble(const StructuredMesh& mesh,
                                            const fem::DofMap& dofs, int order) {
  auto op = std::make_shared<fem::TermOperator>(dofs, kRmmTermCount);
  const auto ke = element_terms(order, mesh.h());
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    for (int t = 0; t < kRmmTermCount; ++t) op->add_element(t, dofs.element_dofs[e], ke[t]);
  }
  return op;
}

std::vector<char> prescribed_mask(const StructuredMesh& mesh, const fem::DofMap& dofs,
                                  bool consistent) {
  std::vector<char> mask(dofs.n_dofs, 0);
  Eigen::VectorXd scratch = Eigen::VectorXd::Zero(dofs.n_dofs);
  fem::apply_affine_displacement(mesh, dofs, AffineLoadCase{}, scratch, &mask);
  if (consistent) {
    const int per_edge = dofs.nedelec_order;
    for (int ed = 0; ed < mesh.edge_count(); ++ed) {
      if (!mesh.edge_on_boundary(ed)) continue;
      for (int row = 0; row < 2; ++row) {
        const int d = dofs.edge_dof[row][ed];
        if (d < 0) continue;
        for (int k = 0; k < per_edge; ++k) mask[d + k] = 1;
      }
    }
  }
  return mask;
}

}  // namespace

RmmProblem::RmmProblem(StructuredMesh mesh, RmmOptions options)
    : mesh_(std::move(mesh)),
      options_(options),
      dofs_(fem::make_rmm_map(mesh_, options_.nedelec_order)),
      op_(assemble(mesh_, dofs_, options_.nedelec_order)),
      system_(op_, prescribed_mask(mesh_, dofs_, options_.consistent_bc)) {
  fem::require_anchored(mesh_);
}

void RmmProblem::apply_bc(const AffineLoadCase& load, Eigen::VectorXd& q) const {
  fem::apply_affine_displacement(mesh_, dofs_, load, q);
  if (!options_.consistent_bc) return;
  // ∇ū is constant, so the tangential trace is one value per row and
  // orientation; the nodal basis makes the substitution exact.
  for (int ed = 0; ed < mesh_.edge_count(); ++ed) {
    if (!mesh_.edge_on_boundary(ed)) continue;
    const int comp = mesh_.edge_horizontal(ed) ? 0 : 1;
    for (int row = 0; row < 2; ++row) {
      const int d = dofs_.edge_dof[row][ed];
      if (d < 0) continue;
      for (int k = 0; k < dofs_.nedelec_order; ++k) q[d + k] = load.strain(row, comp);
    }
  }
}

std::vector<RmmSolution> RmmProblem::solve(const RmmStaticParams& params,
                                           std::span<const AffineLoadCase> loads) {
  if (!params.admissible()) {
    throw ValidationError("solve_rmm: inadmissible static parameters");
  }
  const TermVector theta = term_weights(params);
  system_.factorize(theta);
  std::vector<RmmSolution> out;
  out.reserve(loads.size());
  for (const auto& load : loads) {
    RmmSolution s;
    s.q = Eigen::VectorXd::Zero(dofs_.n_dofs);
    apply_bc(load, s.q);
    system_.solve(s.q);
    s.energy = 0.0;
    for (int t = 0; t < kRmmTermCount; ++t) {
      s.term_energy[t] = op_->term_energy(t, s.q);
      s.energy += theta[t] * s.term_energy[t];
    }
    out.push_back(std::move(s));
  }
  return out;
}

RmmSolution RmmProblem::solve(const RmmStaticParams& params, const AffineLoadCase& load) {
  return std::move(solve(params, std::span<const AffineLoadCase>(&load, 1)).front());
}

Eigen::VectorXd RmmProblem::interpolate(
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u,
    const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& p) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dofs_.n_dofs);
  for (int n = 0; n < mesh_.node_count(); ++n) {
    const int d = dofs_.node_dof[n];
    if (d < 0) continue;
    const Eigen::Vector2d v = u(mesh_.node_coord(n));
    q[d] = v.x();
    q[d + 1] = v.y();
  }
  const fem::NedelecBasis ned(dofs_.nedelec_order);
  for (int e = 0; e < mesh_.element_count(); ++e) {
    if (!mesh_.solid(e)) continue;
    const double ex = mesh_.x0() + (e % mesh_.nx()) * mesh_.h();
    const double ey = mesh_.y0() + (e / mesh_.nx()) * mesh_.h();
    const auto& ed = dofs_.element_dofs[e];
    for (int row = 0; row < 2; ++row) {
      for (int k = 0; k < ned.size(); ++k) {
        const auto site = ned.site(k);
        const Eigen::Matrix2d pv = p({ex + mesh_.h() * site.xi, ey + mesh_.h() * site.eta});
        q[ed[18 + row * ned.size() + k]] = pv(row, site.component);
      }
    }
  }
  return q;
}

Eigen::VectorXd RmmProblem::residual(const TermVector& theta, const Eigen::VectorXd& q) const {
  return op_->combined(theta) * q;
}

Eigen::MatrixXd RmmProblem::microdistortion_at_centres(const Eigen::VectorXd& q) const {
  const fem::NedelecBasis ned(dofs_.nedelec_order);
  fem::NedelecBasis::Eval ev;
  ned.eval(0.5, 0.5, ev);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh_.element_count(), 4);
  for (int e = 0; e < mesh_.element_count(); ++e) {
    if (!mesh_.solid(e)) continue;
    const auto& ed = dofs_.element_dofs[e];
    for (int row = 0; row < 2; ++row) {
      for (int k = 0; k < ned.size(); ++k) {
        const double c = q[ed[18 + row * ned.size() + k]];
        out(e, 2 * row) += c * ev.vx[k];
        out(e, 2 * row + 1) += c * ev.vy[k];
      }
    }
  }
  return out;
}

RmmSolution solve_rmm(const StructuredMesh& mesh, const RmmStaticParams& params,
                      const AffineLoadCase& load, const RmmOptions& options) {
  RmmProblem problem(mesh, options);
  return problem.solve(params, load);
}

Vector5d chain_to_unknowns(const TermVector& d, const TetragonalElasticity& c_micro,
                           const TetragonalElasticity& c_macro) {
  auto dseries = [](double micro, double macro) {
    const double gap = micro - macro;
    return -(macro * macro) / (gap * gap);
  };
  const double dmu_e = dseries(c_micro.mu, c_macro.mu);
  const double dmus_e = dseries(c_micro.mu_star, c_macro.mu_star);
  const double ds_e = dseries(c_micro.bulk_family(), c_macro.bulk_family());
  // λ_e = s_e − μ_e with s = λ + μ.
  Vector5d g;
  g[0] = d[kMuMicro] + d[kMuE] * dmu_e + d[kLambdaE] * (ds_e - dmu_e);
  g[1] = d[kMuStarMicro] + d[kMuStarE] * dmus_e;
  g[2] = d[kLambdaMicro] + d[kLambdaE] * ds_e;
  g[3] = d[kMuC];
  g[4] = d[kMuLc2];
  return g;
}

Vector5d energy_sensitivities(RmmProblem& problem, const StaticUnknowns& x,
                              const TetragonalElasticity& c_macro,
                              const AffineLoadCase& load) {
  const auto sol = problem.solve(x.params(c_macro), load);
  return chain_to_unknowns(sol.term_energy, x.c_micro(), c_macro);
}

}  // namespace rmm
