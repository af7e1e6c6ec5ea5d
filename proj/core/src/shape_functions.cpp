#include "rmm/shape_functions.hpp"

#include <cmath>
#include <numbers>

#include "rmm/error.hpp"

namespace rmm::fem {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Lagrange1D::Lagrange1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {}

double Lagrange1D::value(int i, double x) const {
  double v = 1.0;
  for (int j = 0; j < size(); ++j) {
    if (j != i) v *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
  }
  return v;
}

double Lagrange1D::derivative(int i, double x) const {
  double sum = 0.0;
  for (int k = 0; k < size(); ++k) {
    if (k == i) continue;
    double term = 1.0 / (nodes_[i] - nodes_[k]);
    for (int j = 0; j < size(); ++j) {
      if (j != i && j != k) term *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
    }
    sum += term;
  }
  return sum;
}

Q2Eval q2_eval(double xi, double eta) {
  static const Lagrange1D q({0.0, 0.5, 1.0});
  Q2Eval out{};
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      const int k = a + 3 * b;
      out.n[k] = q.value(a, xi) * q.value(b, eta);
      out.dn_dxi[k] = q.derivative(a, xi) * q.value(b, eta);
      out.dn_deta[k] = q.value(a, xi) * q.derivative(b, eta);
    }
  }
  return out;
}

namespace {

std::vector<double> equispaced(int r) {
  std::vector<double> x(r + 1);
  for (int i = 0; i <= r; ++i) x[i] = static_cast<double>(i) / r;
  return x;
}

}  // namespace

NedelecBasis::NedelecBasis(int order)
    : order_(order),
      tangential_(gauss_legendre(order >= 1 ? order : 1).points),
      normal_(equispaced(order >= 1 ? order : 1)) {
  if (order < 1) throw ValidationError("NedelecBasis: order must be >= 1");
}

void NedelecBasis::eval(double xi, double eta, Eval& out) const {
  const int r = order_;
  const int half = r * (r + 1);
  out.vx.assign(size(), 0.0);
  out.vy.assign(size(), 0.0);
  out.curl.assign(size(), 0.0);
  for (int q = 0; q <= r; ++q) {
    for (int p = 0; p < r; ++p) {
      // x-component: tangential in x, normal in y.
      const int kx = p + r * q;
      out.vx[kx] = tangential_.value(p, xi) * normal_.value(q, eta);
      out.curl[kx] = -tangential_.value(p, xi) * normal_.derivative(q, eta);
      // y-component: normal in x (index q), tangential in y (index p).
      const int ky = half + p + r * q;
      out.vy[ky] = normal_.value(q, xi) * tangential_.value(p, eta);
      out.curl[ky] = normal_.derivative(q, xi) * tangential_.value(p, eta);
    }
  }
}

NedelecBasis::DofSite NedelecBasis::site(int local) const {
  const int r = order_;
  const int half = r * (r + 1);
  if (local < half) {
    const int p = local % r;
    const int q = local / r;
    return {tangential_.nodes()[p], normal_.nodes()[q], 0};
  }
  const int k = local - half;
  const int q = k % r;   // along y (tangential)
  const int p = k / r;   // along x (normal)
  return {normal_.nodes()[p], tangential_.nodes()[q], 1};
}

NedelecBasis::DofOwner NedelecBasis::owner(int local) const {
  const int r = order_;
  const int half = r * (r + 1);
  const int interior = r * (r - 1);
  if (local < half) {
    const int p = local % r;
    const int q = local / r;
    if (q == 0) return {0, p};
    if (q == r) return {2, p};
    return {-1, p + r * (q - 1)};
  }
  const int k = local - half;
  const int q = k % r;
  const int p = k / r;
  if (p == 0) return {3, q};
  if (p == r) return {1, q};
  return {-1, interior + q + r * (p - 1)};
}

}  // namespace rmm::fem
