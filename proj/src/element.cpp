#include "rq1/element.hpp"

namespace rq1::element
{

const std::array<Vector3, 4>& reference_vertices()
{
  static const std::array<Vector3, 4> vertices{
      Vector3(1, 1, 1), Vector3(1, -1, -1), Vector3(-1, -1, 1),
      Vector3(-1, 1, -1)};
  return vertices;
}

const std::array<Vector3, 6>& nodes()
{
  static const std::array<Vector3, 6> x{Vector3(1, 0, 0),  Vector3(-1, 0, 0),
                                        Vector3(0, 1, 0),  Vector3(0, -1, 0),
                                        Vector3(0, 0, 1),  Vector3(0, 0, -1)};
  return x;
}

int edge_basis(int local_edge)
{
  static const std::array<int, 6> table = []
  {
    std::array<int, 6> t{};
    const auto& v = reference_vertices();
    for (int e = 0; e < 6; ++e)
    {
      const Vector3 mid
          = 0.5 * (v[reference_edges[e][0]] + v[reference_edges[e][1]]);
      for (int i = 0; i < 6; ++i)
        if ((nodes()[i] - mid).norm() < 1e-14)
          t[e] = i;
    }
    return t;
  }();
  return table.at(local_edge);
}

Vector3 edge_tangent(int local_edge)
{
  const auto& v = reference_vertices();
  const auto& e = reference_edges.at(local_edge);
  return (v[e[1]] - v[e[0]]).normalized();
}

const BasisCoefficients& basis_coefficients()
{
  constexpr double s = 1.0 / 6.0;
  static const BasisCoefficients c{{
      {s, 3 * s, 0, 0, 2 * s, -s, -s},
      {s, -3 * s, 0, 0, 2 * s, -s, -s},
      {s, 0, 3 * s, 0, -s, 2 * s, -s},
      {s, 0, -3 * s, 0, -s, 2 * s, -s},
      {s, 0, 0, 3 * s, -s, -s, 2 * s},
      {s, 0, 0, -3 * s, -s, -s, 2 * s},
  }};
  return c;
}

std::array<double, 6> eval_basis(const Vector3& x)
{
  const std::array<double, num_monomials> m{
      1.0, x[0], x[1], x[2], x[0] * x[0], x[1] * x[1], x[2] * x[2]};
  std::array<double, 6> values{};
  const auto& c = basis_coefficients();
  for (int i = 0; i < 6; ++i)
  {
    double v = 0.0;
    for (int k = 0; k < num_monomials; ++k)
      v += c[i][k] * m[k];
    values[i] = v;
  }
  return values;
}

std::array<Vector3, 6> eval_basis_grad(const Vector3& x)
{
  std::array<Vector3, 6> grads;
  const auto& c = basis_coefficients();
  for (int i = 0; i < 6; ++i)
    for (int d = 0; d < 3; ++d)
      grads[i][d] = c[i][1 + d] + 2.0 * c[i][4 + d] * x[d];
  return grads;
}

Eigen::Matrix<double, 6, 6> nodal_matrix()
{
  Eigen::Matrix<double, 6, 6> n;
  for (int i = 0; i < 6; ++i)
  {
    const Vector3& x = nodes()[i];
    n.row(i) << 1.0, x[0], x[1], x[2], x[0] * x[0] - x[1] * x[1],
        x[1] * x[1] - x[2] * x[2];
  }
  return n;
}

// Since the reference vertices sum to zero and v_i . v_j = -1 for i != j,
// lambda_i(x) = (1 + v_i . x) / 4.
std::array<double, 4> eval_p1_basis(const Vector3& x)
{
  const auto& v = reference_vertices();
  return {0.25 * (1.0 + v[0].dot(x)), 0.25 * (1.0 + v[1].dot(x)),
          0.25 * (1.0 + v[2].dot(x)), 0.25 * (1.0 + v[3].dot(x))};
}

const std::array<Vector3, 4>& p1_basis_grad()
{
  static const std::array<Vector3, 4> g = []
  {
    std::array<Vector3, 4> out;
    for (int i = 0; i < 4; ++i)
      out[i] = 0.25 * reference_vertices()[i];
    return out;
  }();
  return g;
}

} // namespace rq1::element
