// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "oracle/element.hpp"
#include "oracle/polynomial.hpp"

#include "rq1/analysis.hpp"
#include "rq1/element.hpp"
#include "rq1/quadrature.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace rq1;

namespace
{

struct Outcome
{
  bool passed;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool run(int id, const char* title, double budget_seconds,
         const std::function<Outcome()>& body)
{
  const auto start = Clock::now();
  Outcome o;
  try
  {
    o = body();
  }
  catch (const std::exception& e)
  {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = secs < budget_seconds;
  const bool ok = o.passed && in_time;
  std::printf("criterion %d [%s]: %s (%s; %.2f s of %.0f s)\n", id, title,
              ok ? "PASS" : "FAIL", o.detail.c_str(), secs, budget_seconds);
  std::fflush(stdout);
  return ok;
}

std::string fmt(const char* f, double a)
{
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Mesh centred_box(int n)
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {n, n, n});
  auto v = m.vertices();
  for (auto& x : v)
    x -= Vector3::Constant(0.5);
  return build_topology(v, m.cells());
}

// Oracle basis index of the node at a reference edge midpoint.
int oracle_node(const Vector3& mid)
{
  const auto nodes = oracle::reference_nodes();
  for (int i = 0; i < 6; ++i)
    if ((nodes[i] - mid).norm() < 1e-12)
      return i;
  return -1;
}

// Discrete velocity evaluated with the oracle basis and a test-side map.
Vector3 oracle_velocity(const Mesh& m, const Eigen::VectorXd& dofs, Index c,
                        const Vector3& x)
{
  static const auto basis = oracle::reference_basis();
  const auto& ref = element::reference_vertices();
  const auto& cv = m.cells()[c];
  Matrix3 a;
  for (int k = 0; k < 3; ++k)
    a.col(k) = m.vertex(cv[k + 1]) - m.vertex(cv[0]);
  Matrix3 ahat;
  for (int k = 0; k < 3; ++k)
    ahat.col(k) = ref[k + 1] - ref[0];
  const Vector3 xhat = ref[0] + ahat * a.inverse() * (x - m.vertex(cv[0]));
  Vector3 v = Vector3::Zero();
  for (int e = 0; e < 6; ++e)
  {
    const auto& re = element::reference_edges[e];
    const int i = oracle_node(0.5 * (ref[re[0]] + ref[re[1]]));
    v += oracle::evaluate(basis[i], xhat) * dofs.segment<3>(3 * m.cell_edges()[c][e]);
  }
  return v;
}

// ---------------------------------------------------------------------------

Outcome element_identities()
{
  const auto basis = oracle::reference_basis();
  const auto& nodes = element::nodes();
  double dev = 0.0;

  // Library basis against the oracle nodal solve, plus the identities.
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& v = element::reference_vertices();
  for (int k = 0; k < 500; ++k)
  {
    double a = u(rng), b = u(rng), c = u(rng);
    if (a + b + c > 1)
      continue;
    const Vector3 x = v[0] + a * (v[1] - v[0]) + b * (v[2] - v[0]) + c * (v[3] - v[0]);
    const auto phi = element::eval_basis(x);
    double sum = 0.0;
    Vector3 gsum = Vector3::Zero();
    for (int i = 0; i < 6; ++i)
    {
      dev = std::max(dev, std::abs(phi[i] - oracle::evaluate(basis[i], x)));
      sum += phi[i];
    }
    for (const auto& g : element::eval_basis_grad(x))
      gsum += g;
    dev = std::max({dev, std::abs(sum - 1.0), gsum.lpNorm<Eigen::Infinity>()});
  }
  for (int j = 0; j < 6; ++j)
  {
    const auto phi = element::eval_basis(nodes[j]);
    for (int i = 0; i < 6; ++i)
      dev = std::max(dev, std::abs(phi[i] - (i == j)));
    // N(x1^2 + x2^2 + x3^2) = N(1)
    dev = std::max(dev, std::abs(nodes[j].squaredNorm() - 1.0));
  }

  const Eigen::Matrix<double, 6, 6> n = element::nodal_matrix();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(n);
  const bool invertible = svd.singularValues()[5] > 1e-3;
  dev = std::max(dev, (n * n.inverse() - Eigen::Matrix<double, 6, 6>::Identity())
                          .lpNorm<Eigen::Infinity>());

  // Edge-midpoint rule against exact integrals of every shape function.
  const auto rule = edge_midpoint_quadrature();
  const auto tet = oracle::reference_tet();
  for (int i = 0; i < 6; ++i)
  {
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * element::eval_basis(rule.points[q])[i];
    dev = std::max(dev, std::abs(s - oracle::integrate_tet(tet, basis[i])));
  }
  return {invertible && dev <= 1e-12, fmt("max deviation %.2e", dev)};
}

Outcome reference_constants()
{
  const auto& v = element::reference_vertices();
  const auto basis = oracle::reference_basis();
  const auto tet = oracle::reference_tet();
  double dev = 0.0;

  const std::vector<Vector3> directions{{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                        {1, -2, 0.5}, {-0.3, 0.4, 1.1}};
  for (const auto& b : directions)
  {
    const oracle::Polynomial bx{{b[0], 1, 0, 0}, {b[1], 0, 1, 0}, {b[2], 0, 0, 1}};
    double combined_sum = 0.0, tb2 = 0.0;
    for (int e = 0; e < 6; ++e)
    {
      const auto& re = element::reference_edges[e];
      const Vector3 t = (v[re[1]] - v[re[0]]).normalized();
      const auto& phi = basis[oracle_node(0.5 * (v[re[0]] + v[re[1]]))];
      const double tb = t.dot(b);
      const double bulk = tb * tb * oracle::integrate_tet(tet, phi);
      double trace = 0.0;
      for (int f = 0; f < 4; ++f)
      {
        const auto& fv = element::reference_faces[f];
        const std::array<Vector3, 3> tri{v[fv[0]], v[fv[1]], v[fv[2]]};
        trace += (-v[f].normalized()).dot(t)
                 * oracle::integrate_triangle(tri, oracle::product(phi, bx));
      }
      const double boundary = tb * trace;
      dev = std::max({dev, std::abs(bulk - 4.0 / 9.0 * tb * tb),
                      std::abs(boundary - 4.0 / 15.0 * tb * tb),
                      std::abs(bulk - boundary - 8.0 / 45.0 * tb * tb)});
      combined_sum += bulk - boundary;
      tb2 += tb * tb;
    }
    dev = std::max(dev, std::abs(combined_sum - 8.0 / 45.0 * tb2));
    dev = std::max(dev, verify_reference_constants(b).max_deviation());
  }

  // Face Jacobian identity over random affine maps, both sides computed here
  // and compared with the library report.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ref_area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
  int maps = 0;
  double jac = 0.0;
  while (maps < 100)
  {
    Matrix3 a;
    for (int i = 0; i < 9; ++i)
      a.data()[i] = u(rng);
    if (a.determinant() < 0.05)
      continue;
    const Vector3 shift(u(rng), u(rng), u(rng));
    std::vector<Vector3> x;
    for (const auto& p : v)
      x.push_back(a * p + shift);
    const Mesh m = build_topology(x, {{0, 1, 2, 3}});
    for (int e = 0; e < 6; ++e)
      for (int f = 0; f < 4; ++f)
      {
        const auto& re = element::reference_edges[e];
        const auto& fv = element::reference_faces[f];
        const Vector3 t = (x[re[1]] - x[re[0]]).normalized();
        Vector3 nrm = (x[fv[1]] - x[fv[0]]).cross(x[fv[2]] - x[fv[0]]);
        const double area = 0.5 * nrm.norm();
        nrm.normalize();
        if (nrm.dot(x[f] - x[fv[0]]) > 0)
          nrm = -nrm;
        const Vector3 that = (v[re[1]] - v[re[0]]).normalized();
        const double ratio = a.determinant() / (a * that).norm();
        const double lhs = nrm.dot(t) * area / ref_area;
        const double rhs = ratio * (-v[f].normalized()).dot(that);
        jac = std::max(jac, std::abs(lhs - rhs) / ratio);

        const auto lib = verify_face_jacobian_identity(
            m, 0, m.cell_edges()[0][e], m.cell_faces()[0][f]);
        jac = std::max({jac, lib.relative_difference,
                        std::abs(lib.lhs - lhs) / ratio});
      }
    ++maps;
  }
  return {std::max(dev, jac) <= 1e-12,
          fmt("constants %.2e, ", dev) + fmt("face Jacobian %.2e over 100 maps", jac)};
}

Outcome patch_test()
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {2, 2, 2});
  const auto c = affine_case();
  const auto exact = interpolate_at_midpoints(m, c.velocity).values;
  double worst = 0.0;
  for (auto form : {FormKind::BConsistent, FormKind::BTilde})
  {
    const auto s = solve_manufactured(m, c, FormKind::Laplacian, form);
    worst = std::max(worst, (s.velocity.values - exact).lpNorm<Eigen::Infinity>()
                                / exact.lpNorm<Eigen::Infinity>());
    worst = std::max(worst, s.pressure.values.lpNorm<Eigen::Infinity>()
                                / exact.lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-10, fmt("max relative error %.2e", worst)};
}

Outcome convergence()
{
  std::vector<Mesh> meshes;
  for (int n : {2, 4, 8, 16})
    meshes.push_back(centred_box(n));
  bool ok = true;
  std::ostringstream detail;
  detail.precision(3);
  for (auto form : {FormKind::BConsistent, FormKind::BTilde})
  {
    const auto t = run_convergence_study(cubic_case(), meshes, FormKind::Laplacian,
                                         form, false);
    ok = ok && meets_rate_thresholds(t);
    if (!t.failure.empty())
    {
      detail << "failure: " << t.failure << "; ";
      continue;
    }
    const auto& r = t.rows.back();
    detail << (form == FormKind::BConsistent ? "b" : "b~") << " slopes "
           << r.slope_l2_velocity << "/" << r.slope_h1_velocity << "/"
           << r.slope_l2_pressure << "; ";
  }
  std::string s = detail.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

Outcome infsup()
{
  bool ok = true;
  std::ostringstream detail;
  detail.precision(3);
  for (auto form : {FormKind::BConsistent, FormKind::BTilde})
  {
    double lo = 1e300, hi = 0.0;
    for (int n : {3, 4, 5})
    {
      const Mesh m = generate_box_mesh({1, 1, 1}, {n, n, n});
      ok = ok && 3 * m.num_edges() <= 5000;
      const double b = estimate_infsup(m, form).beta;
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    ok = ok && lo > 0.0 && hi / lo <= 2.0;
    detail << (form == FormKind::BConsistent ? "b" : "b~") << " beta in [" << lo
           << ", " << hi << "]; ";
  }
  std::string s = detail.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

Outcome korn()
{
  double lo = 1e300, hi = 0.0;
  for (int n : {3, 4, 5})
  {
    const double a = estimate_korn(generate_box_mesh({1, 1, 1}, {n, n, n}), true).alpha;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  std::ostringstream d;
  d.precision(3);
  d << "alpha in [" << lo << ", " << hi << "]";
  return {lo > 0.0 && hi / lo <= 2.0, d.str()};
}

Outcome nonconformity()
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {3, 3, 3});
  // Symmetric 6-point rule of degree 4 on triangles.
  const double a = 0.445948490915965, wa = 0.223381589678011;
  const double b = 0.091576213509771, wb = 0.109951743655322;
  const std::array<std::array<double, 3>, 6> bary{
      {{a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
       {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}}};
  const std::array<double, 6> w{wa, wa, wa, wb, wb, wb};

  std::mt19937 rng(2024);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial)
  {
    Eigen::VectorXd v(3 * m.num_edges());
    for (Index i = 0; i < v.size(); ++i)
      v[i] = n(rng);
    for (Index f = 0; f < m.num_faces(); ++f)
    {
      if (m.is_boundary_face(f))
        continue;
      const auto& fv = m.faces()[f];
      const Vector3 x0 = m.vertex(fv[0]), x1 = m.vertex(fv[1]), x2 = m.vertex(fv[2]);
      const Vector3 normal = (x1 - x0).cross(x2 - x0);
      const double area = 0.5 * normal.norm();
      const auto [c0, c1] = m.face_cells()[f];
      double jump = 0.0;
      for (int q = 0; q < 6; ++q)
      {
        const Vector3 x = bary[q][0] * x0 + bary[q][1] * x1 + bary[q][2] * x2;
        jump += w[q] * area * normal.normalized().dot(oracle_velocity(m, v, c0, x)
                                                     - oracle_velocity(m, v, c1, x));
      }
      worst = std::max(worst, std::abs(jump));
    }
  }
  return {worst <= 1e-12, fmt("max |int_F [n.v]| %.2e over 50 fields", worst)};
}

Outcome form_equivalence()
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {4, 4, 4});
  const auto vd = build_velocity_dofs(m);
  const auto pd = build_pressure_dofs(m);
  const SparseMatrix bc = assemble_divergence_operator(m, vd, pd, FormKind::BConsistent);
  const SparseMatrix bt = assemble_divergence_operator(m, vd, pd, FormKind::BTilde);
  std::mt19937 rng(8);
  std::normal_distribution<double> n;
  double worst = 0.0, oracle_dev = 0.0;
  for (int trial = 0; trial < 20; ++trial)
  {
    std::vector<Vector3> nodal(m.num_vertices());
    for (Index v = 0; v < m.num_vertices(); ++v)
      nodal[v] = m.is_boundary_vertex(v) ? Vector3::Zero()
                                         : Vector3(n(rng), n(rng), n(rng));
    Eigen::VectorXd u(vd.size());
    for (Index e = 0; e < m.num_edges(); ++e)
      u.segment<3>(3 * e) = 0.5 * (nodal[m.edges()[e][0]] + nodal[m.edges()[e][1]]);
    Eigen::VectorXd q(pd.size());
    for (Index v = 0; v < pd.size(); ++v)
      q[v] = n(rng);

    // Exact (div v, q): div v is constant per cell, q averages its vertices.
    double exact = 0.0;
    for (Index c = 0; c < m.num_cells(); ++c)
    {
      const auto& cv = m.cells()[c];
      Matrix3 dx, du;
      for (int k = 0; k < 3; ++k)
      {
        dx.col(k) = m.vertex(cv[k + 1]) - m.vertex(cv[0]);
        du.col(k) = nodal[cv[k + 1]] - nodal[cv[0]];
      }
      const double div = (du * dx.inverse()).trace();
      const double qbar = 0.25 * (q[cv[0]] + q[cv[1]] + q[cv[2]] + q[cv[3]]);
      exact += div * qbar * m.volume(c);
    }
    const double vc = q.dot(bc * u), vt = q.dot(bt * u);
    worst = std::max(worst, std::abs(vc - vt));
    oracle_dev = std::max({oracle_dev, std::abs(vc - exact), std::abs(vt - exact)});
  }
  return {worst <= 1e-11 && oracle_dev <= 1e-11,
          fmt("max |b - b~| %.2e, ", worst) + fmt("vs exact %.2e", oracle_dev)};
}

Outcome poiseuille()
{
  bool ok = true;
  std::ostringstream d;
  d.precision(3);
  for (auto op : {FormKind::Laplacian, FormKind::Strain})
  {
    const auto r = run_poiseuille(op);
    ok = ok && r.symmetry_defect <= 0.02 && r.flux_imbalance <= 0.02;
    d << (op == FormKind::Laplacian ? "laplacian" : "strain") << " symmetry "
      << r.symmetry_defect << " flux " << r.flux_imbalance << "; ";
  }
  std::string s = d.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

} // namespace

int main()
{
  bool ok = true;
  ok &= run(1, "element identities", 1, element_identities);
  ok &= run(2, "reference-cell constants and face Jacobian", 5, reference_constants);
  ok &= run(3, "patch test", 5, patch_test);
  ok &= run(4, "convergence rates", 600, convergence);
  ok &= run(5, "inf-sup stability", 120, infsup);
  ok &= run(6, "discrete Korn", 120, korn);
  ok &= run(7, "face jump means", 10, nonconformity);
  ok &= run(8, "form equivalence on conforming fields", 5, form_equivalence);
  ok &= run(9, "channel flow", 120, poiseuille);
  std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
