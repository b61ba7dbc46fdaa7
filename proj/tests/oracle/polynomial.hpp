#pragma once

// Exact integration of polynomials over simplices, independent of the
// library quadrature. A polynomial in physical coordinates is expanded in
// the barycentric coordinates of the simplex, where
//   int_T l0^k0 ... ld^kd = d! |T| k0! ... kd! / (k0 + ... + kd + d)!.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace oracle
{

using Vec3 = Eigen::Vector3d;

/// Monomial x1^a x2^b x3^c with a coefficient.
struct Term
{
  double coeff;
  int a, b, c;
};
using Polynomial = std::vector<Term>;

inline double factorial(int n)
{
  double f = 1.0;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

template <int N>
using Exponents = std::array<int, N>;

// Expands prod of linear forms x_d = sum_i l_i v_i[d] in barycentric powers.
template <int N>
std::map<Exponents<N>, double> expand(const std::array<Vec3, N>& v,
                                      const Term& t)
{
  std::map<Exponents<N>, double> p;
  p[Exponents<N>{}] = t.coeff;
  const std::array<int, 3> powers{t.a, t.b, t.c};
  for (int d = 0; d < 3; ++d)
    for (int k = 0; k < powers[d]; ++k)
    {
      std::map<Exponents<N>, double> next;
      for (const auto& [e, c] : p)
        for (int i = 0; i < N; ++i)
        {
          if (v[i][d] == 0.0)
            continue;
          auto e2 = e;
          ++e2[i];
          next[e2] += c * v[i][d];
        }
      p = std::move(next);
    }
  return p;
}

template <int N>
double integrate(const std::array<Vec3, N>& v, double measure,
                 const Polynomial& poly)
{
  constexpr int dim = N - 1;
  double total = 0.0;
  for (const auto& t : poly)
    for (const auto& [e, c] : expand<N>(v, t))
    {
      int sum = 0;
      double num = 1.0;
      for (int k : e)
      {
        sum += k;
        num *= factorial(k);
      }
      total += c * factorial(dim) * measure * num / factorial(sum + dim);
    }
  return total;
}

inline double tet_volume(const std::array<Vec3, 4>& v)
{
  return std::abs((v[1] - v[0]).dot((v[2] - v[0]).cross(v[3] - v[0]))) / 6.0;
}

inline double triangle_area(const std::array<Vec3, 3>& v)
{
  return 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
}

/// Exact integral of a polynomial over a tetrahedron.
inline double integrate_tet(const std::array<Vec3, 4>& v, const Polynomial& p)
{
  return integrate<4>(v, tet_volume(v), p);
}

/// Exact integral of a polynomial over a triangle in space.
inline double integrate_triangle(const std::array<Vec3, 3>& v,
                                 const Polynomial& p)
{
  return integrate<3>(v, triangle_area(v), p);
}

inline double evaluate(const Polynomial& p, const Vec3& x)
{
  double s = 0.0;
  for (const auto& t : p)
    s += t.coeff * std::pow(x[0], t.a) * std::pow(x[1], t.b)
         * std::pow(x[2], t.c);
  return s;
}

inline Polynomial product(const Polynomial& p, const Polynomial& q)
{
  Polynomial r;
  for (const auto& s : p)
    for (const auto& t : q)
      r.push_back({s.coeff * t.coeff, s.a + t.a, s.b + t.b, s.c + t.c});
  return r;
}

/// All monomials of total degree <= n, coefficient 1.
inline std::vector<Term> monomials(int n)
{
  std::vector<Term> m;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b)
      for (int c = 0; a + b + c <= n; ++c)
        m.push_back({1.0, a, b, c});
  return m;
}

} // namespace oracle
