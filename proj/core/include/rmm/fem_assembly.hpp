#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rmm/mesh.hpp"
#include "rmm/shape_functions.hpp"

namespace rmm::fem {

/// Global numbering of the unknowns of one discretisation.
struct DofMap {
  int n_dofs = 0;
  int nedelec_order = 0;  // 0 when no microdistortion field
  int displacement_dofs = 0;
  /// Local → global dofs per element; empty for void elements. Local layout
  /// is [ux0, uy0, ..., ux8, uy8, P¹ dofs..., P² dofs...].
  std::vector<std::vector<int>> element_dofs;
  /// First dof of each Q2 node (−1 when inactive); uy follows ux.
  std::vector<int> node_dof;
  /// First dof of each edge for P row i (−1 when inactive).
  std::vector<int> edge_dof[2];
};

DofMap make_displacement_map(const StructuredMesh& mesh);
DofMap make_rmm_map(const StructuredMesh& mesh, int nedelec_order);

/// Identification of opposite boundary nodes of a single-cell mesh. Node n
/// is the image of master[n] translated by (shift_x·width, shift_y·height).
struct PeriodicImages {
  std::vector<int> master;
  std::vector<signed char> shift_x;
  std::vector<signed char> shift_y;
};
PeriodicImages periodic_images(const StructuredMesh& mesh);

/// Displacement dofs with periodic identification: image nodes share the
/// dofs of their master.
DofMap make_periodic_displacement_map(const StructuredMesh& mesh,
                                      const PeriodicImages& images);

/// Symmetric sparse operator K(θ) = Σ_j θ_j K_j on a fixed pattern. Each
/// term keeps its own value array so that parameter changes only rescale.
class TermOperator {
 public:
  TermOperator(const DofMap& dofs, int n_terms);

  int size() const { return static_cast<int>(pattern_.rows()); }
  int term_count() const { return static_cast<int>(terms_.size()); }
  int nnz() const { return static_cast<int>(pattern_.nonZeros()); }

  /// Scatter a dense element matrix into term `term`.
  void add_element(int term, std::span<const int> dofs, const Eigen::MatrixXd& ke);

  /// ½ qᵀ K_term q.
  double term_energy(int term, const Eigen::VectorXd& q) const;
  Eigen::SparseMatrix<double> combined(std::span<const double> theta) const;

  const Eigen::SparseMatrix<double>& pattern() const { return pattern_; }
  const Eigen::VectorXd& term_values(int term) const { return terms_[term]; }

 private:
  int position(int row, int col) const;

  Eigen::SparseMatrix<double> pattern_;
  std::vector<Eigen::VectorXd> terms_;
};

/// Dirichlet partition of a TermOperator into free/prescribed blocks, with
/// a reusable symbolic LDLᵀ factorisation of the free block.
class ConstrainedSystem {
 public:
  ConstrainedSystem(std::shared_ptr<const TermOperator> op,
                    std::vector<char> prescribed);
  ~ConstrainedSystem();
  ConstrainedSystem(ConstrainedSystem&&) noexcept;
  ConstrainedSystem& operator=(ConstrainedSystem&&) noexcept;

  int free_count() const { return static_cast<int>(free_.size()); }
  const std::vector<char>& prescribed() const { return prescribed_; }
  const TermOperator& op() const { return *op_; }

  /// Numeric factorisation for the given term weights. Throws NumericError
  /// if the free block is singular or indefinite.
  void factorize(std::span<const double> theta);

  /// Solve with prescribed entries of `q` held fixed; free entries are
  /// overwritten with the minimiser.
  void solve(Eigen::VectorXd& q) const;

  /// ½ qᵀ K(θ) q with the θ of the last factorisation.
  double energy(const Eigen::VectorXd& q) const;

 private:
  struct Impl;
  std::shared_ptr<const TermOperator> op_;
  std::vector<char> prescribed_;
  std::vector<int> free_;
  std::vector<int> fixed_;
  std::vector<double> theta_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rmm::fem
