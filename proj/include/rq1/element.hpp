#pragma once

// The rotated-Q1 tetrahedral element and the linear pressure element.
//
// The reference tetrahedron T^ is inscribed in the cube [-1,1]^3 with its six
// edges on face diagonals, so the edge midpoints are the face centres +-e_i of
// the cube and the centroid is the origin. Vertices are ordered so that the
// reference cell is positively oriented.

#include "rq1/common.hpp"

#include <array>

namespace rq1::element
{

inline constexpr double reference_volume = 8.0 / 3.0;

inline constexpr int num_basis = 6;

/// Local edges as pairs of local vertices, in lexicographic order.
inline constexpr std::array<std::array<int, 2>, 6> reference_edges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Local faces, face i is opposite local vertex i.
inline constexpr std::array<std::array<int, 3>, 4> reference_faces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

const std::array<Vector3, 4>& reference_vertices();

/// Basis nodes in basis order: e1, -e1, e2, -e2, e3, -e3.
const std::array<Vector3, 6>& nodes();

/// Index of the basis function whose node is the midpoint of a local edge.
int edge_basis(int local_edge);

/// Unit tangent of a reference edge, pointing from its first to its second
/// vertex.
Vector3 edge_tangent(int local_edge);

/// Monomial layout of the coefficient table: 1, x1, x2, x3, x1^2, x2^2, x3^2.
inline constexpr int num_monomials = 7;
using BasisCoefficients = std::array<std::array<double, num_monomials>, 6>;

/// phi_1..phi_6 with phi(x1,x2,x3) = (1 + 3x1 + 2x1^2 - x2^2 - x3^2)/6 and
/// phi_2 = phi(-x1,x2,x3), phi_3 = phi(x2,x1,x3), phi_4 = phi(-x2,x1,x3),
/// phi_5 = phi(x3,x1,x2), phi_6 = phi(-x3,x1,x2).
const BasisCoefficients& basis_coefficients();

std::array<double, 6> eval_basis(const Vector3& x);
std::array<Vector3, 6> eval_basis_grad(const Vector3& x);

/// 6x6 matrix N with N(i, j) = phi-space monomial basis j evaluated at node i,
/// for the span 1, x1, x2, x3, x1^2 - x2^2, x2^2 - x3^2.
Eigen::Matrix<double, 6, 6> nodal_matrix();

/// Linear Lagrange basis on T^ (barycentric coordinates).
std::array<double, 4> eval_p1_basis(const Vector3& x);
const std::array<Vector3, 4>& p1_basis_grad();

} // namespace rq1::element
