#include "rmm/mesh.hpp"

#include <cmath>
#include <queue>
#include <string>

#include "rmm/error.hpp"

namespace rmm {

StructuredMesh::StructuredMesh(int nx, int ny, double h, double x0, double y0,
                               std::vector<int> phase)
    : nx_(nx), ny_(ny), h_(h), x0_(x0), y0_(y0), phase_(std::move(phase)) {
  if (nx_ <= 0 || ny_ <= 0 || !(h_ > 0.0) ||
      static_cast<int>(phase_.size()) != nx_ * ny_) {
    throw ValidationError("StructuredMesh: inconsistent dimensions");
  }
  active_nodes_.assign(node_count(), 0);
  active_edges_.assign(edge_count(), 0);
  for (int e = 0; e < element_count(); ++e) {
    if (!solid(e)) continue;
    for (int n : element_nodes(e)) active_nodes_[n] = 1;
    for (int ed : element_edges(e)) active_edges_[ed] = 1;
  }
}

int StructuredMesh::solid_count() const {
  int n = 0;
  for (int p : phase_) n += p != kVoid;
  return n;
}

double StructuredMesh::solid_fraction() const {
  return static_cast<double>(solid_count()) / element_count();
}

Eigen::Vector2d StructuredMesh::node_coord(int node) const {
  const int i = node % node_stride();
  const int j = node / node_stride();
  return {x0_ + 0.5 * h_ * i, y0_ + 0.5 * h_ * j};
}

bool StructuredMesh::node_on_boundary(int node) const {
  const int i = node % node_stride();
  const int j = node / node_stride();
  return i == 0 || j == 0 || i == 2 * nx_ || j == 2 * ny_;
}

std::array<int, 9> StructuredMesh::element_nodes(int e) const {
  const int ix = e % nx_;
  const int iy = e / nx_;
  std::array<int, 9> nodes{};
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) nodes[a + 3 * b] = node_id(2 * ix + a, 2 * iy + b);
  }
  return nodes;
}

bool StructuredMesh::edge_on_boundary(int edge) const {
  if (edge_horizontal(edge)) {
    const int iy = edge / nx_;
    return iy == 0 || iy == ny_;
  }
  const int v = edge - horizontal_edge_count();
  const int ix = v % (nx_ + 1);
  return ix == 0 || ix == nx_;
}

std::array<int, 2> StructuredMesh::edge_vertices(int edge) const {
  if (edge_horizontal(edge)) {
    const int ix = edge % nx_;
    const int iy = edge / nx_;
    return {node_id(2 * ix, 2 * iy), node_id(2 * ix + 2, 2 * iy)};
  }
  const int v = edge - horizontal_edge_count();
  const int ix = v % (nx_ + 1);
  const int iy = v / (nx_ + 1);
  return {node_id(2 * ix, 2 * iy), node_id(2 * ix, 2 * iy + 2)};
}

std::array<int, 4> StructuredMesh::element_edges(int e) const {
  const int ix = e % nx_;
  const int iy = e / nx_;
  const int nh = horizontal_edge_count();
  return {ix + iy * nx_, nh + (ix + 1) + iy * (nx_ + 1), ix + (iy + 1) * nx_,
          nh + ix + iy * (nx_ + 1)};
}

std::pair<std::vector<int>, int> StructuredMesh::solid_components() const {
  std::vector<int> comp(element_count(), -1);
  int count = 0;
  for (int seed = 0; seed < element_count(); ++seed) {
    if (!solid(seed) || comp[seed] >= 0) continue;
    std::queue<int> todo;
    todo.push(seed);
    comp[seed] = count;
    while (!todo.empty()) {
      const int e = todo.front();
      todo.pop();
      const int ix = e % nx_;
      const int iy = e / nx_;
      const std::array<std::array<int, 2>, 4> nb{
          {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}}};
      for (const auto& [jx, jy] : nb) {
        if (jx < 0 || jy < 0 || jx >= nx_ || jy >= ny_) continue;
        const int f = jx + jy * nx_;
        if (solid(f) && comp[f] < 0) {
          comp[f] = count;
          todo.push(f);
        }
      }
    }
    ++count;
  }
  return {comp, count};
}

namespace {

void check_representable(const UnitCellGeometry& g, int resolution) {
  const double h = g.l / resolution;
  auto on_grid = [&](double v) {
    if (v <= 0.0 || v >= g.l) return true;
    const double t = v / h;
    return std::abs(t - std::round(t)) < 1e-9 * std::max(1.0, t);
  };
  for (const auto& op : g.program) {
    const auto& r = op.rect;
    if (!on_grid(r.x0) || !on_grid(r.x1) || !on_grid(r.y0) || !on_grid(r.y1)) {
      throw ValidationError("build_mesh: shape boundary not on the grid at resolution " +
                            std::to_string(resolution));
    }
  }
}

}  // namespace

std::vector<int> cell_mask(const UnitCellGeometry& geometry, int resolution) {
  geometry.validate();
  if (resolution < 4 || resolution % 2 != 0) {
    throw ValidationError("build_mesh: resolution must be even and >= 4");
  }
  check_representable(geometry, resolution);
  const double h = geometry.l / resolution;
  std::vector<int> mask(static_cast<std::size_t>(resolution) * resolution);
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      mask[ix + iy * resolution] = geometry.phase_at((ix + 0.5) * h, (iy + 0.5) * h);
    }
  }
  return mask;
}

bool mask_tetragonal(const std::vector<int>& mask, int r) {
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) {
      const int v = mask[i + j * r];
      if (v != mask[j + i * r] || v != mask[(r - 1 - i) + j * r] ||
          v != mask[i + (r - 1 - j) * r]) {
        return false;
      }
    }
  }
  return true;
}

StructuredMesh build_mesh(const UnitCellGeometry& geometry, int n_cells,
                          int resolution) {
  if (n_cells < 1) throw ValidationError("build_mesh: n_cells must be >= 1");
  const auto mask = cell_mask(geometry, resolution);
  const int nx = n_cells * resolution;
  std::vector<int> phase(static_cast<std::size_t>(nx) * nx);
  for (int iy = 0; iy < nx; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      phase[ix + iy * nx] = mask[(ix % resolution) + (iy % resolution) * resolution];
    }
  }
  const double h = geometry.l / resolution;
  const double half = 0.5 * n_cells * geometry.l;
  return StructuredMesh(nx, nx, h, -half, -half, std::move(phase));
}

}  // namespace rmm
