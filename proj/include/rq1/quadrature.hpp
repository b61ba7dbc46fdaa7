#pragma once

#include "rq1/common.hpp"

#include <array>
#include <vector>

namespace rq1
{

/// Volume rule on the reference tetrahedron. Weights sum to |T^| = 8/3.
struct QuadratureRule
{
  std::vector<Vector3> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Rule on a triangle in barycentric coordinates. Weights are fractions of
/// the triangle area and sum to 1, so the same rule applies to any face.
struct FaceQuadratureRule
{
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;

  std::size_t size() const { return barycentric.size(); }
};

/// Six edge midpoints of T^, each with weight |T^|/6 = 4/9. Exact on the
/// rotated-Q1 shape space.
QuadratureRule edge_midpoint_quadrature();

/// Rule exact for all polynomials of total degree <= min_degree on T^.
/// Degrees 0-2 use tabulated symmetric rules, 3-8 a collapsed Gauss-Jacobi
/// product rule.
QuadratureRule volume_quadrature(int min_degree);

/// Midpoints of the three triangle edges, weights 1/3. Exact for quadratics.
FaceQuadratureRule face_midpoint_quadrature();

/// Triangle rule exact for total degree <= min_degree (0-8).
FaceQuadratureRule face_quadrature(int min_degree);

/// Gauss-Jacobi nodes and weights on [0,1] for the weight (1-x)^alpha.
void gauss_jacobi(int n, double alpha, std::vector<double>& points,
                  std::vector<double>& weights);

} // namespace rq1
