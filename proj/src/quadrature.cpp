#include "rq1/quadrature.hpp"
#include "rq1/element.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rq1
{

namespace
{

constexpr int max_degree = 8;

// Maps a rule given on the unit simplex (0, e1, e2, e3) onto T^.
QuadratureRule from_unit_simplex(const std::vector<Vector3>& s,
                                 const std::vector<double>& w)
{
  const auto& v = element::reference_vertices();
  Matrix3 jac;
  jac.col(0) = v[1] - v[0];
  jac.col(1) = v[2] - v[0];
  jac.col(2) = v[3] - v[0];
  const double det = std::abs(jac.determinant());

  QuadratureRule rule;
  rule.points.reserve(s.size());
  rule.weights.reserve(s.size());
  for (std::size_t q = 0; q < s.size(); ++q)
  {
    rule.points.push_back(v[0] + jac * s[q]);
    rule.weights.push_back(w[q] * det);
  }
  return rule;
}

} // namespace

void gauss_jacobi(int n, double alpha, std::vector<double>& points,
                  std::vector<double>& weights)
{
  if (n < 1)
    throw InvalidArgument("gauss_jacobi: need at least one point");

  // Golub-Welsch on [-1,1] with weight (1-x)^a (1+x)^b, b = 0.
  const double a = alpha;
  const double b = 0.0;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
  {
    const double s = 2.0 * k + a + b;
    jacobi(k, k) = (k == 0) ? (b - a) / (a + b + 2.0)
                            : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n)
    {
      const double k1 = k + 1.0;
      const double s1 = 2.0 * k1 + a + b;
      const double beta = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b)
                          / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0));
      jacobi(k, k + 1) = jacobi(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0)
                     * std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);

  // Change of variables x = (1 + t)/2 scales the weight by 2^-(a+1).
  const double scale = std::pow(0.5, a + 1.0);
  points.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i)
  {
    const double v0 = eig.eigenvectors()(0, i);
    points[i] = 0.5 * (1.0 + eig.eigenvalues()[i]);
    weights[i] = mu0 * v0 * v0 * scale;
  }
}

QuadratureRule edge_midpoint_quadrature()
{
  QuadratureRule rule;
  rule.points.assign(element::nodes().begin(), element::nodes().end());
  rule.weights.assign(6, element::reference_volume / 6.0);
  return rule;
}

QuadratureRule volume_quadrature(int min_degree)
{
  if (min_degree < 0 || min_degree > max_degree)
    throw InvalidArgument("volume_quadrature: unsupported degree "
                          + std::to_string(min_degree));

  if (min_degree <= 1)
    return {{Vector3::Zero()}, {element::reference_volume}};

  if (min_degree == 2)
  {
    const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
    const double b = (5.0 - std::sqrt(5.0)) / 20.0;
    std::vector<Vector3> s{Vector3(b, b, b), Vector3(a, b, b),
                           Vector3(b, a, b), Vector3(b, b, a)};
    return from_unit_simplex(s, std::vector<double>(4, 1.0 / 24.0));
  }

  // Collapsed product rule: s1 = u, s2 = (1-u) v, s3 = (1-u)(1-v) w, with
  // Jacobian (1-u)^2 (1-v) absorbed into the Gauss-Jacobi weights.
  const int n = (min_degree + 2) / 2;
  std::vector<double> pu, wu, pv, wv, pw, ww;
  gauss_jacobi(n, 2.0, pu, wu);
  gauss_jacobi(n, 1.0, pv, wv);
  gauss_jacobi(n, 0.0, pw, ww);

  std::vector<Vector3> s;
  std::vector<double> w;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
      {
        const double u = pu[i], v = pv[j], t = pw[k];
        s.emplace_back(u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * t);
        w.push_back(wu[i] * wv[j] * ww[k]);
      }
  return from_unit_simplex(s, w);
}

FaceQuadratureRule face_midpoint_quadrature()
{
  FaceQuadratureRule rule;
  rule.barycentric = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  rule.weights.assign(3, 1.0 / 3.0);
  return rule;
}

FaceQuadratureRule face_quadrature(int min_degree)
{
  if (min_degree < 0 || min_degree > max_degree)
    throw InvalidArgument("face_quadrature: unsupported degree "
                          + std::to_string(min_degree));
  if (min_degree <= 1)
    return {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {1.0}};
  if (min_degree == 2)
    return face_midpoint_quadrature();

  const int n = (min_degree + 2) / 2;
  std::vector<double> pu, wu, pv, wv;
  gauss_jacobi(n, 1.0, pu, wu);
  gauss_jacobi(n, 0.0, pv, wv);

  // The unit triangle has area 1/2; weights are normalised to sum to 1.
  FaceQuadratureRule rule;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
    {
      const double s1 = pu[i];
      const double s2 = (1.0 - pu[i]) * pv[j];
      rule.barycentric.push_back({1.0 - s1 - s2, s1, s2});
      rule.weights.push_back(2.0 * wu[i] * wv[j]);
    }
  return rule;
}

} // namespace rq1
