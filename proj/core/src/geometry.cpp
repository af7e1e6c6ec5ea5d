#include "rmm/geometry.hpp"

#include <algorithm>

#include "rmm/error.hpp"

namespace rmm {

int UnitCellGeometry::phase_at(double x, double y) const {
  int phase = kVoid;
  for (const auto& op : program) {
    if (!op.rect.contains(x, y)) continue;
    phase = op.kind == ShapeOp::Kind::Union ? op.phase : kVoid;
  }
  return phase;
}

int UnitCellGeometry::phase_count() const {
  int n = 0;
  for (const auto& op : program) {
    if (op.kind == ShapeOp::Kind::Union) n = std::max(n, op.phase + 1);
  }
  return n;
}

void UnitCellGeometry::validate() const {
  if (!(l > 0.0)) throw ValidationError("geometry: cell edge l must be positive");
  if (l1 != 0.0 || l2 != 0.0) {
    if (!(0.0 < l2 && l2 < l1 && l1 < l)) {
      throw ValidationError("geometry: require 0 < l2 < l1 < l");
    }
  }
  if (program.empty()) throw ValidationError("geometry: empty shape program");
  for (const auto& op : program) {
    const auto& r = op.rect;
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) {
      throw ValidationError("geometry: degenerate rectangle in shape program");
    }
    if (op.phase < 0) throw ValidationError("geometry: negative phase index");
  }
}

UnitCellGeometry UnitCellGeometry::all_solid(double l) {
  UnitCellGeometry g;
  g.name = "solid";
  g.l = l;
  g.program.push_back({ShapeOp::Kind::Union, {0.0, l, 0.0, l}, 0});
  return g;
}

UnitCellGeometry UnitCellGeometry::cross_void(double l, double l1, double l2) {
  UnitCellGeometry g;
  g.name = "cross_void";
  g.l = l;
  g.l1 = l1;
  g.l2 = l2;
  const double a0 = 0.5 * (l - l1);
  const double a1 = 0.5 * (l + l1);
  const double b0 = 0.5 * (l - l2);
  const double b1 = 0.5 * (l + l2);
  g.program.push_back({ShapeOp::Kind::Union, {0.0, l, 0.0, l}, 0});
  g.program.push_back({ShapeOp::Kind::Difference, {a0, a1, b0, b1}, 0});
  g.program.push_back({ShapeOp::Kind::Difference, {b0, b1, a0, a1}, 0});
  return g;
}

UnitCellGeometry UnitCellGeometry::x_laminate(double l, double fraction) {
  UnitCellGeometry g;
  g.name = "x_laminate";
  g.l = l;
  g.program.push_back({ShapeOp::Kind::Union, {0.0, l, 0.0, l}, 1});
  g.program.push_back({ShapeOp::Kind::Union, {0.0, fraction * l, 0.0, l}, 0});
  return g;
}

}  // namespace rmm
