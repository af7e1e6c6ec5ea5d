#pragma once

#include <string>
#include <vector>

namespace rmm {

/// Axis-aligned rectangle in cell-local coordinates, origin at the lower-left
/// cell corner, extent [0, l]².
struct Rect {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;

  bool contains(double x, double y) const {
    return x > x0 && x < x1 && y > y0 && y < y1;
  }
};

/// One step of a shape program. Union paints the rectangle with `phase`,
/// Difference turns it into void.
struct ShapeOp {
  enum class Kind { Union, Difference };
  Kind kind = Kind::Union;
  Rect rect;
  int phase = 0;
};

inline constexpr int kVoid = -1;

/// Unit cell of edge `l`. The solid/void layout is whatever `program`
/// paints, starting from an all-void cell. l1 and l2 are informational
/// (reported and validated when non-zero).
struct UnitCellGeometry {
  std::string name;
  double l = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  std::vector<ShapeOp> program;

  /// Phase at a point of the cell (kVoid for void).
  int phase_at(double x, double y) const;
  int phase_count() const;

  /// Throws ValidationError on inconsistent dimensions.
  void validate() const;

  static UnitCellGeometry all_solid(double l);
  /// Square cell with a centred cross-shaped void of arm length l1 and arm
  /// width l2. This is the reading of the reference cell used throughout.
  static UnitCellGeometry cross_void(double l, double l1, double l2);
  /// Two-phase laminate with layers normal to x: phase 0 on x < f·l, phase 1
  /// elsewhere.
  static UnitCellGeometry x_laminate(double l, double fraction);
};

}  // namespace rmm
