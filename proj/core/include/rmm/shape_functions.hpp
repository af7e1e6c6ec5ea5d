#pragma once

#include <array>
#include <vector>

namespace rmm::fem {

/// Gauss–Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

/// 1D Lagrange polynomials through the given nodes.
class Lagrange1D {
 public:
  explicit Lagrange1D(std::vector<double> nodes);
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  double value(int i, double x) const;
  double derivative(int i, double x) const;

 private:
  std::vector<double> nodes_;
};

/// Biquadratic 9-node Lagrange element on [0,1]², node (a,b) ↦ a + 3b.
struct Q2Eval {
  std::array<double, 9> n;
  std::array<double, 9> dn_dxi;
  std::array<double, 9> dn_deta;
};
Q2Eval q2_eval(double xi, double eta);

/// First-kind Nédélec element of order r ≥ 1 on [0,1]² with a nodal basis:
/// the x-component lives in Q(r−1, r) and the y-component in Q(r, r−1).
/// The tangential direction uses Lagrange polynomials through r Gauss
/// points; the normal direction uses r+1 equispaced points including both
/// ends, so every degree of freedom is a point value of one component.
///
/// Local numbering: x-component dof (p, q) ↦ p + r·q (p along x, q along y),
/// then y-component dof (p, q) ↦ r(r+1) + q + r·p (p along x, q along y).
class NedelecBasis {
 public:
  explicit NedelecBasis(int order);

  int order() const { return order_; }
  int size() const { return 2 * order_ * (order_ + 1); }
  int per_edge() const { return order_; }
  int interior_per_component() const { return order_ * (order_ - 1); }

  struct Eval {
    std::vector<double> vx;
    std::vector<double> vy;
    std::vector<double> curl;  // ∂vy/∂ξ − ∂vx/∂η
  };
  void eval(double xi, double eta, Eval& out) const;

  /// Reference point and component (0 = x, 1 = y) a dof samples.
  struct DofSite {
    double xi;
    double eta;
    int component;
  };
  DofSite site(int local) const;

  /// Owning entity of a local dof.
  struct DofOwner {
    int edge = -1;       // 0 bottom, 1 right, 2 top, 3 left; −1 interior
    int position = 0;    // index along the edge, or interior index
  };
  DofOwner owner(int local) const;

 private:
  int order_;
  Lagrange1D tangential_;
  Lagrange1D normal_;
};

}  // namespace rmm::fem
