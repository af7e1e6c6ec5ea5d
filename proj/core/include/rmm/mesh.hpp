#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "rmm/geometry.hpp"

namespace rmm {

/// Uniform square-element mesh of an n×n block of unit cells centred at the
/// origin. Elements are numbered row-major (e = ix + iy·nx).
///
/// Q2 nodes live on the (2nx+1)×(2ny+1) grid of vertices and mid-points.
/// Edges are numbered horizontal first (ix + iy·nx, iy ∈ [0, ny]) then
/// vertical (n_horizontal + ix + iy·(nx+1), ix ∈ [0, nx]). The global
/// orientation of an edge is +x (horizontal) or +y (vertical).
class StructuredMesh {
 public:
  StructuredMesh(int nx, int ny, double h, double x0, double y0,
                 std::vector<int> phase);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double width() const { return nx_ * h_; }
  double height() const { return ny_ * h_; }
  int element_count() const { return nx_ * ny_; }

  int phase(int e) const { return phase_[e]; }
  bool solid(int e) const { return phase_[e] != kVoid; }
  const std::vector<int>& phases() const { return phase_; }
  int solid_count() const;
  double solid_fraction() const;

  // Q2 node grid.
  int node_stride() const { return 2 * nx_ + 1; }
  int node_count() const { return (2 * nx_ + 1) * (2 * ny_ + 1); }
  int node_id(int i, int j) const { return i + j * node_stride(); }
  Eigen::Vector2d node_coord(int node) const;
  bool node_on_boundary(int node) const;
  /// Local order (a, b) ↦ a + 3b with a along x.
  std::array<int, 9> element_nodes(int e) const;
  /// Nodes touched by at least one solid element.
  const std::vector<char>& active_nodes() const { return active_nodes_; }

  // Edges.
  int horizontal_edge_count() const { return nx_ * (ny_ + 1); }
  int edge_count() const { return horizontal_edge_count() + (nx_ + 1) * ny_; }
  bool edge_horizontal(int edge) const { return edge < horizontal_edge_count(); }
  bool edge_on_boundary(int edge) const;
  /// Vertex node ids of an edge in global orientation.
  std::array<int, 2> edge_vertices(int edge) const;
  /// Bottom, right, top, left.
  std::array<int, 4> element_edges(int e) const;
  /// Sign of the element's counter-clockwise traversal relative to the
  /// global orientation of each edge.
  static constexpr std::array<int, 4> element_edge_signs() { return {1, 1, -1, -1}; }
  const std::vector<char>& active_edges() const { return active_edges_; }

  /// Solid elements adjacent through a shared edge. Returns the component id
  /// of every element (−1 for void) and the number of components.
  std::pair<std::vector<int>, int> solid_components() const;

 private:
  int nx_;
  int ny_;
  double h_;
  double x0_;
  double y0_;
  std::vector<int> phase_;
  std::vector<char> active_nodes_;
  std::vector<char> active_edges_;
};

/// Mesh of the n×n specimen [−nl/2, nl/2]² with `resolution` elements per
/// cell edge. Throws ValidationError when a shape boundary does not fall on
/// element edges.
StructuredMesh build_mesh(const UnitCellGeometry& geometry, int n_cells,
                          int resolution);

/// Element phase mask of a single cell, row-major.
std::vector<int> cell_mask(const UnitCellGeometry& geometry, int resolution);

/// Invariance of a square row-major mask under the square's symmetry group
/// (transpose and both mirrors).
bool mask_tetragonal(const std::vector<int>& mask, int resolution);

}  // namespace rmm
