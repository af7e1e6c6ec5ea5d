#include "rmm/bloch.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "rmm/elasticity.hpp"
#include "rmm/error.hpp"
#include "rmm/fem_assembly.hpp"
#include "rmm/parallel.hpp"

namespace rmm {

namespace {
constexpr double kAngleTol = 1e-9;

int symmetry_kind(double angle) {
  if (std::abs(angle) < kAngleTol) return 0;
  if (std::abs(angle - std::numbers::pi / 4) < kAngleTol) return 1;
  if (std::abs(angle - std::numbers::pi / 2) < kAngleTol) return 2;
  return -1;
}
}  // namespace

double brillouin_k_max(double angle, double l) {
  const double c = std::max(std::abs(std::cos(angle)), std::abs(std::sin(angle)));
  return std::numbers::pi / (l * c);
}

std::vector<double> k_grid(double angle, double l, int count) {
  if (count < 2) throw ValidationError("k_grid: need at least two samples");
  std::vector<double> k(count);
  const double km = brillouin_k_max(angle, l);
  for (int i = 0; i < count; ++i) k[i] = km * i / (count - 1);
  return k;
}

BlochCell::BlochCell(const UnitCellGeometry& geometry, const BaseMaterial& base,
                     int resolution)
    : mesh_(build_mesh(geometry, 1, resolution)), base_(base) {
  if (!base.valid()) throw ValidationError("bloch: invalid base material");
  if (mesh_.solid_count() == 0) throw NumericError("bloch: cell has no solid element");
  const auto images = fem::periodic_images(mesh_);
  master_ = images.master;
  shift_x_ = images.shift_x;
  shift_y_ = images.shift_y;
  const auto dofs = fem::make_periodic_displacement_map(mesh_, images);
  node_dof_ = dofs.node_dof;
  n_dofs_ = dofs.n_dofs;
  ke_ = fem::q2_stiffness(base.elasticity());
  me_ = fem::q2_mass(base.rho, mesh_.h());
  symmetric_ = mask_tetragonal(cell_mask(geometry, resolution), resolution);
}

BlochCell::System BlochCell::assemble(const Eigen::Vector2d& kv) const {
  using C = std::complex<double>;
  const double lx = mesh_.width();
  const double ly = mesh_.height();
  std::vector<Eigen::Triplet<C>> tk, tm;
  tk.reserve(static_cast<std::size_t>(mesh_.solid_count()) * 324);
  tm.reserve(tk.capacity());
  std::array<int, 18> d{};
  std::array<C, 18> ph{};
  for (int e = 0; e < mesh_.element_count(); ++e) {
    if (!mesh_.solid(e)) continue;
    const auto nodes = mesh_.element_nodes(e);
    for (int a = 0; a < 9; ++a) {
      const int n = nodes[a];
      const C c = std::polar(1.0, kv.x() * lx * shift_x_[n] + kv.y() * ly * shift_y_[n]);
      d[2 * a] = node_dof_[n];
      d[2 * a + 1] = node_dof_[n] + 1;
      ph[2 * a] = c;
      ph[2 * a + 1] = c;
    }
    for (int a = 0; a < 18; ++a) {
      for (int b = 0; b < 18; ++b) {
        const C f = std::conj(ph[a]) * ph[b];
        tk.emplace_back(d[a], d[b], f * ke_(a, b));
        tm.emplace_back(d[a], d[b], f * me_(a, b));
      }
    }
  }
  System s{SparseC(n_dofs_, n_dofs_), SparseC(n_dofs_, n_dofs_)};
  s.k.setFromTriplets(tk.begin(), tk.end());
  s.m.setFromTriplets(tm.begin(), tm.end());
  return s;
}

BlochCell::Mirror BlochCell::make_mirror(int kind) const {
  Mirror r;
  r.source.assign(n_dofs_, -1);
  r.sign.assign(n_dofs_, 1.0);
  const int sx = 2 * mesh_.nx();
  const int sy = 2 * mesh_.ny();
  for (int j = 0; j < sy; ++j) {
    for (int i = 0; i < sx; ++i) {
      const int n = mesh_.node_id(i, j);
      const int d = node_dof_[n];
      if (d < 0 || master_[n] != n) continue;
      int mi = i, mj = j;
      if (kind == 0) mj = (sy - j) % sy;
      if (kind == 1) std::swap(mi, mj);
      if (kind == 2) mi = (sx - i) % sx;
      const int src = node_dof_[mesh_.node_id(mi, mj)];
      if (src < 0) throw NumericError("bloch: mirror image of an active node is void");
      if (kind == 0) {
        r.source[d] = src;
        r.source[d + 1] = src + 1;
        r.sign[d + 1] = -1.0;
      } else if (kind == 1) {
        r.source[d] = src + 1;
        r.source[d + 1] = src;
      } else {
        r.source[d] = src;
        r.source[d + 1] = src + 1;
        r.sign[d] = -1.0;
      }
    }
  }
  return r;
}

DispersionSample BlochCell::solve(double angle, double k, int n_branches) const {
  const Eigen::Vector2d kv = k * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  const System sys = assemble(kv);
  const double dk = hermitian_defect(sys.k);
  const double dm = hermitian_defect(sys.m);
  if (dk > 1e-12 || dm > 1e-12) {
    throw NumericError("bloch: assembled matrices are not Hermitian (defect " +
                       std::to_string(std::max(dk, dm)) + ")");
  }
  const EigenPairs ep = lowest_eigenpairs(sys.k, sys.m, n_branches);

  DispersionSample s;
  s.k = k;
  s.omega.resize(n_branches);
  s.type.assign(n_branches, WaveType::Mixed);
  for (int b = 0; b < n_branches; ++b) s.omega[b] = std::sqrt(std::max(ep.values[b], 0.0));

  const int kind = symmetry_kind(angle);
  if (symmetric_ && kind >= 0) {
    const Mirror r = make_mirror(kind);
    const Eigen::MatrixXcd mv = sys.m * ep.vectors;
    Eigen::MatrixXcd rv(n_dofs_, n_branches);
    for (int d = 0; d < n_dofs_; ++d) rv.row(d) = r.sign[d] * ep.vectors.row(r.source[d]);
    const double top = std::max(ep.values.maxCoeff(), 1.0);
    // Degenerate clusters are split into parity eigenvectors.
    int b0 = 0;
    while (b0 < n_branches) {
      int b1 = b0 + 1;
      while (b1 < n_branches &&
             std::abs(ep.values[b1] - ep.values[b0]) <=
                 1e-6 * std::max(std::abs(ep.values[b0]), 1e-9 * top)) {
        ++b1;
      }
      const int m = b1 - b0;
      Eigen::MatrixXcd p = mv.middleCols(b0, m).adjoint() * rv.middleCols(b0, m);
      p = 0.5 * (p + p.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
      for (int j = 0; j < m; ++j) {
        const double parity = es.eigenvalues()[j];
        s.type[b0 + j] = parity > 0.5 ? WaveType::Pressure
                         : parity < -0.5 ? WaveType::Shear
                                         : WaveType::Mixed;
      }
      b0 = b1;
    }
  }
  return s;
}

DispersionCurveSet bloch_bands(const UnitCellGeometry& geometry, const BaseMaterial& base,
                               double angle, const std::vector<double>& k_samples,
                               int n_branches, int resolution) {
  if (n_branches < 1) throw ValidationError("bloch: n_branches must be ≥ 1");
  const double km = brillouin_k_max(angle, geometry.l);
  for (double k : k_samples) {
    if (k < 0.0 || k > km * (1.0 + 1e-12)) {
      throw ValidationError("bloch: wavenumber outside [0, k_max]");
    }
  }
  const BlochCell cell(geometry, base, resolution);
  DispersionCurveSet set;
  set.angle = angle;
  set.samples.resize(k_samples.size());
  parallel_for(k_samples.size(), [&](std::size_t i) {
    set.samples[i] = cell.solve(angle, k_samples[i], n_branches);
  });
  set.normalise();
  return set;
}

}  // namespace rmm
