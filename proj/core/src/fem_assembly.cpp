#include "rmm/fem_assembly.hpp"

#include <algorithm>

#include "rmm/error.hpp"

namespace rmm::fem {

DofMap make_displacement_map(const StructuredMesh& mesh) {
  DofMap map;
  map.node_dof.assign(mesh.node_count(), -1);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (mesh.active_nodes()[n]) {
      map.node_dof[n] = map.n_dofs;
      map.n_dofs += 2;
    }
  }
  map.displacement_dofs = map.n_dofs;
  map.element_dofs.resize(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    auto& d = map.element_dofs[e];
    d.reserve(18);
    for (int n : mesh.element_nodes(e)) {
      d.push_back(map.node_dof[n]);
      d.push_back(map.node_dof[n] + 1);
    }
  }
  return map;
}

PeriodicImages periodic_images(const StructuredMesh& mesh) {
  PeriodicImages im;
  const int sx = 2 * mesh.nx();
  const int sy = 2 * mesh.ny();
  im.master.resize(mesh.node_count());
  im.shift_x.resize(mesh.node_count());
  im.shift_y.resize(mesh.node_count());
  for (int j = 0; j <= sy; ++j) {
    for (int i = 0; i <= sx; ++i) {
      const int n = mesh.node_id(i, j);
      im.master[n] = mesh.node_id(i % sx, j % sy);
      im.shift_x[n] = static_cast<signed char>(i == sx);
      im.shift_y[n] = static_cast<signed char>(j == sy);
    }
  }
  return im;
}

DofMap make_periodic_displacement_map(const StructuredMesh& mesh,
                                      const PeriodicImages& images) {
  DofMap map;
  std::vector<char> active(mesh.node_count(), 0);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (mesh.active_nodes()[n]) active[images.master[n]] = 1;
  }
  std::vector<int> master_dof(mesh.node_count(), -1);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (active[n]) {
      master_dof[n] = map.n_dofs;
      map.n_dofs += 2;
    }
  }
  map.node_dof.assign(mesh.node_count(), -1);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (mesh.active_nodes()[n]) map.node_dof[n] = master_dof[images.master[n]];
  }
  map.displacement_dofs = map.n_dofs;
  map.element_dofs.resize(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    auto& d = map.element_dofs[e];
    d.reserve(18);
    for (int n : mesh.element_nodes(e)) {
      d.push_back(map.node_dof[n]);
      d.push_back(map.node_dof[n] + 1);
    }
  }
  return map;
}

DofMap make_rmm_map(const StructuredMesh& mesh, int order) {
  DofMap map = make_displacement_map(mesh);
  map.nedelec_order = order;
  const NedelecBasis basis(order);
  const int per_edge = basis.per_edge();
  const int interior = 2 * basis.interior_per_component();

  std::vector<int> interior_dof[2];
  for (int row = 0; row < 2; ++row) {
    map.edge_dof[row].assign(mesh.edge_count(), -1);
    for (int ed = 0; ed < mesh.edge_count(); ++ed) {
      if (mesh.active_edges()[ed]) {
        map.edge_dof[row][ed] = map.n_dofs;
        map.n_dofs += per_edge;
      }
    }
    interior_dof[row].assign(mesh.element_count(), -1);
    for (int e = 0; e < mesh.element_count(); ++e) {
      if (mesh.solid(e) && interior > 0) {
        interior_dof[row][e] = map.n_dofs;
        map.n_dofs += interior;
      }
    }
  }

  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    const auto edges = mesh.element_edges(e);
    auto& d = map.element_dofs[e];
    for (int row = 0; row < 2; ++row) {
      for (int k = 0; k < basis.size(); ++k) {
        const auto own = basis.owner(k);
        d.push_back(own.edge >= 0 ? map.edge_dof[row][edges[own.edge]] + own.position
                                  : interior_dof[row][e] + own.position);
      }
    }
  }
  return map;
}

TermOperator::TermOperator(const DofMap& dofs, int n_terms) {
  const int n = dofs.n_dofs;
  std::vector<std::vector<int>> dof_elements(n);
  for (int e = 0; e < static_cast<int>(dofs.element_dofs.size()); ++e) {
    for (int d : dofs.element_dofs[e]) dof_elements[d].push_back(e);
  }
  std::vector<int> outer(n + 1, 0);
  std::vector<int> inner;
  std::vector<int> column;
  for (int c = 0; c < n; ++c) {
    column.clear();
    for (int e : dof_elements[c]) {
      column.insert(column.end(), dofs.element_dofs[e].begin(), dofs.element_dofs[e].end());
    }
    std::sort(column.begin(), column.end());
    column.erase(std::unique(column.begin(), column.end()), column.end());
    inner.insert(inner.end(), column.begin(), column.end());
    outer[c + 1] = static_cast<int>(inner.size());
  }
  std::vector<double> zeros(inner.size(), 0.0);
  pattern_ = Eigen::Map<const Eigen::SparseMatrix<double>>(
      n, n, static_cast<Eigen::Index>(inner.size()), outer.data(), inner.data(),
      zeros.data());
  terms_.assign(n_terms, Eigen::VectorXd::Zero(pattern_.nonZeros()));
}

int TermOperator::position(int row, int col) const {
  const int* idx = pattern_.innerIndexPtr();
  const int* begin = idx + pattern_.outerIndexPtr()[col];
  const int* end = idx + pattern_.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  return static_cast<int>(it - idx);
}

void TermOperator::add_element(int term, std::span<const int> dofs,
                               const Eigen::MatrixXd& ke) {
  auto& v = terms_[term];
  const int m = static_cast<int>(dofs.size());
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a < m; ++a) {
      const double val = ke(a, b);
      if (val != 0.0) v[position(dofs[a], dofs[b])] += val;
    }
  }
}

double TermOperator::term_energy(int term, const Eigen::VectorXd& q) const {
  const auto& v = terms_[term];
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  double acc = 0.0;
  for (int c = 0; c < size(); ++c) {
    double col = 0.0;
    for (int k = outer[c]; k < outer[c + 1]; ++k) col += v[k] * q[inner[k]];
    acc += col * q[c];
  }
  return 0.5 * acc;
}

Eigen::SparseMatrix<double> TermOperator::combined(std::span<const double> theta) const {
  Eigen::SparseMatrix<double> k = pattern_;
  Eigen::Map<Eigen::VectorXd> vals(k.valuePtr(), k.nonZeros());
  vals.setZero();
  for (int j = 0; j < term_count(); ++j) {
    if (theta[j] != 0.0) vals += theta[j] * terms_[j];
  }
  return k;
}

struct ConstrainedSystem::Impl {
  Eigen::SparseMatrix<double> kff;
  Eigen::SparseMatrix<double> kfd;
  std::vector<int> ff_src;  // positions in the full pattern
  std::vector<int> fd_src;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  bool analysed = false;
  bool factorised = false;
};

ConstrainedSystem::~ConstrainedSystem() = default;
ConstrainedSystem::ConstrainedSystem(ConstrainedSystem&&) noexcept = default;
ConstrainedSystem& ConstrainedSystem::operator=(ConstrainedSystem&&) noexcept = default;

ConstrainedSystem::ConstrainedSystem(std::shared_ptr<const TermOperator> op,
                                     std::vector<char> prescribed)
    : op_(std::move(op)), prescribed_(std::move(prescribed)), impl_(std::make_unique<Impl>()) {
  const int n = op_->size();
  if (static_cast<int>(prescribed_.size()) != n) {
    throw ValidationError("ConstrainedSystem: prescribed mask size mismatch");
  }
  std::vector<int> local(n);
  for (int i = 0; i < n; ++i) {
    if (prescribed_[i]) {
      local[i] = static_cast<int>(fixed_.size());
      fixed_.push_back(i);
    } else {
      local[i] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  const auto& p = op_->pattern();
  const int* outer = p.outerIndexPtr();
  const int* inner = p.innerIndexPtr();
  std::vector<int> ff_outer{0};
  std::vector<int> ff_inner;
  std::vector<int> fd_outer{0};
  std::vector<int> fd_inner;
  // Free columns: keep lower triangle only.
  for (int c : free_) {
    for (int k = outer[c]; k < outer[c + 1]; ++k) {
      const int r = inner[k];
      if (!prescribed_[r] && local[r] >= local[c]) {
        ff_inner.push_back(local[r]);
        impl_->ff_src.push_back(k);
      }
    }
    ff_outer.push_back(static_cast<int>(ff_inner.size()));
  }
  for (int c : fixed_) {
    for (int k = outer[c]; k < outer[c + 1]; ++k) {
      const int r = inner[k];
      if (!prescribed_[r]) {
        fd_inner.push_back(local[r]);
        impl_->fd_src.push_back(k);
      }
    }
    fd_outer.push_back(static_cast<int>(fd_inner.size()));
  }
  const int nf = free_count();
  const int nd = static_cast<int>(fixed_.size());
  std::vector<double> z1(ff_inner.size(), 0.0);
  std::vector<double> z2(fd_inner.size(), 0.0);
  impl_->kff = Eigen::Map<const Eigen::SparseMatrix<double>>(
      nf, nf, static_cast<Eigen::Index>(ff_inner.size()), ff_outer.data(), ff_inner.data(),
      z1.data());
  impl_->kfd = Eigen::Map<const Eigen::SparseMatrix<double>>(
      nf, nd, static_cast<Eigen::Index>(fd_inner.size()), fd_outer.data(), fd_inner.data(),
      z2.data());
}

void ConstrainedSystem::factorize(std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != op_->term_count()) {
    throw ValidationError("ConstrainedSystem: wrong number of term weights");
  }
  theta_.assign(theta.begin(), theta.end());
  auto fill = [&](Eigen::SparseMatrix<double>& m, const std::vector<int>& src) {
    double* dst = m.valuePtr();
    std::fill(dst, dst + m.nonZeros(), 0.0);
    for (int j = 0; j < op_->term_count(); ++j) {
      if (theta[j] == 0.0) continue;
      const double* tv = op_->term_values(j).data();
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += theta[j] * tv[src[k]];
    }
  };
  fill(impl_->kff, impl_->ff_src);
  fill(impl_->kfd, impl_->fd_src);
  impl_->factorised = false;
  if (free_count() == 0) {
    impl_->factorised = true;
    return;
  }
  if (!impl_->analysed) {
    impl_->ldlt.analyzePattern(impl_->kff);
    impl_->analysed = true;
  }
  impl_->ldlt.factorize(impl_->kff);
  if (impl_->ldlt.info() != Eigen::Success) {
    throw NumericError("factorisation failed: singular system");
  }
  const auto& d = impl_->ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-14 * dmax)) {
    throw NumericError("assembled system is not positive definite");
  }
  impl_->factorised = true;
}

void ConstrainedSystem::solve(Eigen::VectorXd& q) const {
  if (!impl_->factorised) throw NumericError("ConstrainedSystem::solve before factorize");
  if (free_count() == 0) return;
  Eigen::VectorXd qd(fixed_.size());
  for (std::size_t i = 0; i < fixed_.size(); ++i) qd[i] = q[fixed_[i]];
  const Eigen::VectorXd rhs = -(impl_->kfd * qd);
  const Eigen::VectorXd qf = impl_->ldlt.solve(rhs);
  for (std::size_t i = 0; i < free_.size(); ++i) q[free_[i]] = qf[i];
}

double ConstrainedSystem::energy(const Eigen::VectorXd& q) const {
  double e = 0.0;
  for (int j = 0; j < op_->term_count(); ++j) {
    if (theta_[j] != 0.0) e += theta_[j] * op_->term_energy(j, q);
  }
  return e;
}

}  // namespace rmm::fem
