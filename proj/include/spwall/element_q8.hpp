#pragma once

// Eight-node serendipity quadrilateral for plane strain: shape functions,
// Gauss quadrature, kinematic matrices and the element-level stiffness,
// mass, body-force and strain kernels. Plane-strain thickness is 1 m
// throughout.

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "spwall/common.hpp"

namespace spwall {

// Parent-space node locations, corners first (counterclockwise), then the
// midside nodes: bottom, right, top, left.
inline constexpr std::array<std::array<double, 2>, 8> kQ8ParentNodes = {{
    {-1.0, -1.0},
    {1.0, -1.0},
    {1.0, 1.0},
    {-1.0, 1.0},
    {0.0, -1.0},
    {1.0, 0.0},
    {0.0, 1.0},
    {-1.0, 0.0},
}};

struct ShapeQ8 {
  Eigen::Matrix<double, 8, 1> N;
  Eigen::Matrix<double, 8, 2> dN;  // columns: d/dxi, d/deta
};

// Quadratic serendipity shape functions and parent-space gradients.
inline ShapeQ8 shape_q8(double xi, double eta) {
  ShapeQ8 s;
  for (int i = 0; i < 4; ++i) {
    const double xi_i = kQ8ParentNodes[i][0];
    const double eta_i = kQ8ParentNodes[i][1];
    s.N(i) = 0.25 * (1.0 + xi * xi_i) * (1.0 + eta * eta_i) *
             (xi * xi_i + eta * eta_i - 1.0);
    s.dN(i, 0) =
        0.25 * xi_i * (1.0 + eta * eta_i) * (2.0 * xi * xi_i + eta * eta_i);
    s.dN(i, 1) =
        0.25 * eta_i * (1.0 + xi * xi_i) * (xi * xi_i + 2.0 * eta * eta_i);
  }
  for (int i = 4; i < 8; ++i) {
    const double xi_i = kQ8ParentNodes[i][0];
    const double eta_i = kQ8ParentNodes[i][1];
    if (xi_i == 0.0) {  // midside on a horizontal edge
      s.N(i) = 0.5 * (1.0 - xi * xi) * (1.0 + eta * eta_i);
      s.dN(i, 0) = -xi * (1.0 + eta * eta_i);
      s.dN(i, 1) = 0.5 * (1.0 - xi * xi) * eta_i;
    } else {  // midside on a vertical edge
      s.N(i) = 0.5 * (1.0 + xi * xi_i) * (1.0 - eta * eta);
      s.dN(i, 0) = 0.5 * xi_i * (1.0 - eta * eta);
      s.dN(i, 1) = -eta * (1.0 + xi * xi_i);
    }
  }
  return s;
}

struct QuadraturePoint {
  double xi, eta, w;
};

// Tensor-product Gauss rule on [-1,1]^2. Weights sum to 4; the n-point
// rule integrates polynomials up to degree 2n-1 per direction exactly.
struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  int order_per_direction = 0;

  static QuadratureRule gauss(int n) {
    QuadratureRule rule;
    rule.order_per_direction = 2 * n - 1;
    std::vector<double> x, w;
    if (n == 1) {
      x = {0.0};
      w = {2.0};
    } else if (n == 2) {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
    } else if (n == 3) {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    } else {
      throw ConfigError("unsupported Gauss rule order");
    }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        rule.points.push_back({x[i], x[j], w[i] * w[j]});
    return rule;
  }

  static const QuadratureRule& gauss3x3() {
    static const QuadratureRule rule = gauss(3);
    return rule;
  }
};

using NodeCoords = Eigen::Matrix<double, 8, 2>;  // element nodal coordinates

struct IsoMap {
  double detJ = 0.0;
  Eigen::Matrix<double, 8, 2> dN_xy;  // gradients in physical coordinates
};

inline IsoMap iso_map(const ShapeQ8& s, const NodeCoords& coords) {
  Eigen::Matrix2d J = s.dN.transpose() * coords;  // rows: d(x,y)/d(xi,eta)
  IsoMap m;
  m.detJ = J.determinant();
  if (!(m.detJ > 0.0))
    throw SolverError("non-positive Jacobian determinant in Q8 element");
  m.dN_xy = s.dN * J.inverse().transpose();
  return m;
}

// Strain-displacement matrix for (eps_xx, eps_yy, gamma_xy) against the
// interleaved dof vector (u1x, u1y, ..., u8x, u8y).
inline Eigen::Matrix<double, 3, 16> b_matrix(
    const Eigen::Matrix<double, 8, 2>& dN_xy) {
  Eigen::Matrix<double, 3, 16> B = Eigen::Matrix<double, 3, 16>::Zero();
  for (int a = 0; a < 8; ++a) {
    B(0, 2 * a) = dN_xy(a, 0);
    B(1, 2 * a + 1) = dN_xy(a, 1);
    B(2, 2 * a) = dN_xy(a, 1);
    B(2, 2 * a + 1) = dN_xy(a, 0);
  }
  return B;
}

using ElementMatrix = Eigen::Matrix<double, 16, 16>;
using ElementVector = Eigen::Matrix<double, 16, 1>;

// Stiffness with one constitutive matrix per integration point.
inline ElementMatrix element_stiffness(
    const NodeCoords& coords, const std::vector<Eigen::Matrix3d>& D_gp,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  if (D_gp.size() != rule.points.size())
    throw SolverError("tangent count does not match quadrature rule");
  ElementMatrix K = ElementMatrix::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& pt = rule.points[q];
    const auto s = shape_q8(pt.xi, pt.eta);
    const auto m = iso_map(s, coords);
    const auto B = b_matrix(m.dN_xy);
    K.noalias() += pt.w * m.detJ * B.transpose() * D_gp[q] * B;
  }
  return K;
}

inline ElementMatrix element_stiffness(
    const NodeCoords& coords, const Eigen::Matrix3d& D,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  return element_stiffness(
      coords, std::vector<Eigen::Matrix3d>(rule.points.size(), D), rule);
}

// Consistent mass matrix; rho in Mg/m^3 gives mass in Mg.
inline ElementMatrix element_mass(
    const NodeCoords& coords, double rho,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  if (!(rho > 0.0)) throw ConfigError("density must be positive");
  ElementMatrix M = ElementMatrix::Zero();
  for (const auto& pt : rule.points) {
    const auto s = shape_q8(pt.xi, pt.eta);
    const auto m = iso_map(s, coords);
    const double c = pt.w * m.detJ * rho;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        const double nn = c * s.N(a) * s.N(b);
        M(2 * a, 2 * b) += nn;
        M(2 * a + 1, 2 * b + 1) += nn;
      }
  }
  return M;
}

// Row-sum lumping of the consistent mass. Preserves total mass; Q8 corner
// entries come out negative, so it is offered for diagnostics rather than
// time stepping.
inline ElementMatrix lump_row_sum(const ElementMatrix& M) {
  ElementMatrix L = ElementMatrix::Zero();
  for (int i = 0; i < 16; ++i) L(i, i) = M.row(i).sum();
  return L;
}

// Equivalent nodal loads of a constant body force (kN/m^3).
inline ElementVector element_body_force(
    const NodeCoords& coords, const Eigen::Vector2d& b,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  ElementVector f = ElementVector::Zero();
  for (const auto& pt : rule.points) {
    const auto s = shape_q8(pt.xi, pt.eta);
    const auto m = iso_map(s, coords);
    const double c = pt.w * m.detJ;
    for (int a = 0; a < 8; ++a) {
      f(2 * a) += c * s.N(a) * b(0);
      f(2 * a + 1) += c * s.N(a) * b(1);
    }
  }
  return f;
}

// Internal force of a stress field sampled at the integration points
// (in-plane components only; sigma_zz does no work under plane strain).
inline ElementVector element_internal_force(
    const NodeCoords& coords, const std::vector<Eigen::Vector3d>& sigma_gp,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  if (sigma_gp.size() != rule.points.size())
    throw SolverError("stress count does not match quadrature rule");
  ElementVector f = ElementVector::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& pt = rule.points[q];
    const auto s = shape_q8(pt.xi, pt.eta);
    const auto m = iso_map(s, coords);
    const auto B = b_matrix(m.dN_xy);
    f.noalias() += pt.w * m.detJ * B.transpose() * sigma_gp[q];
  }
  return f;
}

// Strains (eps_xx, eps_yy, gamma_xy) at the integration points of the rule.
inline std::vector<Eigen::Vector3d> gauss_point_strain(
    const NodeCoords& coords, const ElementVector& u_el,
    const QuadratureRule& rule = QuadratureRule::gauss3x3()) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(rule.points.size());
  for (const auto& pt : rule.points) {
    const auto s = shape_q8(pt.xi, pt.eta);
    const auto m = iso_map(s, coords);
    out.push_back(b_matrix(m.dN_xy) * u_el);
  }
  return out;
}

}  // namespace spwall
