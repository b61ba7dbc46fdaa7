#include "oracle/polynomial.hpp"

#include "rq1/analysis.hpp"
#include "rq1/element.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace rq1;

namespace
{

std::vector<Vector3> sample_grid()
{
  std::vector<Vector3> pts;
  for (double x : {-0.7, 0.1, 0.9})
    for (double y : {-0.4, 0.3})
      for (double z : {-0.2, 0.6})
        pts.emplace_back(x, y, z);
  return pts;
}

std::array<Vector3, 4> cell_vertices(const Mesh& m, Index c)
{
  std::array<Vector3, 4> v;
  for (int i = 0; i < 4; ++i)
    v[i] = m.vertex(m.cells()[c][i]);
  return v;
}

} // namespace

TEST_CASE("manufactured cases solve the Stokes equations")
{
  CHECK(manufactured_residual(cubic_case(), sample_grid()) < 1e-8);
  CHECK(manufactured_residual(affine_case(), sample_grid()) < 1e-8);
  CHECK(manufactured_residual(affine_linear_pressure_case(), sample_grid()) < 1e-8);
  auto broken = cubic_case();
  broken.pressure = [](const Vector3& x) { return x[0]; };
  CHECK(manufactured_residual(broken, sample_grid()) > 0.1);
}

TEST_CASE("error norms of the zero field match the oracle")
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {1, 1, 1});
  const auto c = cubic_case();
  const VelocityField u{Eigen::VectorXd::Zero(3 * m.num_edges())};
  const PressureField p{Eigen::VectorXd::Zero(m.num_vertices())};
  const auto e = error_norms(m, u, p, c);

  // u = (y^3 - z^3, x^3 - z^3, -x^3 - y^3), p = 6(xy - xz - yz).
  const oracle::Polynomial u1{{1, 0, 3, 0}, {-1, 0, 0, 3}};
  const oracle::Polynomial u2{{1, 3, 0, 0}, {-1, 0, 0, 3}};
  const oracle::Polynomial u3{{-1, 3, 0, 0}, {-1, 0, 3, 0}};
  const oracle::Polynomial grad_sq{{9, 0, 4, 0}, {9, 0, 0, 4}, {9, 4, 0, 0},
                                   {9, 0, 0, 4}, {9, 4, 0, 0}, {9, 0, 4, 0}};
  const oracle::Polynomial p6{{6, 1, 1, 0}, {-6, 1, 0, 1}, {-6, 0, 1, 1}};
  double l2u = 0.0, h1u = 0.0, p2 = 0.0, p1 = 0.0;
  for (Index cell = 0; cell < m.num_cells(); ++cell)
  {
    const auto v = cell_vertices(m, cell);
    for (const auto* q : {&u1, &u2, &u3})
      l2u += oracle::integrate_tet(v, oracle::product(*q, *q));
    h1u += oracle::integrate_tet(v, grad_sq);
    p2 += oracle::integrate_tet(v, oracle::product(p6, p6));
    p1 += oracle::integrate_tet(v, p6);
  }
  CHECK(e.l2_velocity == doctest::Approx(std::sqrt(l2u)).epsilon(1e-12));
  CHECK(e.h1_velocity == doctest::Approx(std::sqrt(h1u)).epsilon(1e-12));
  CHECK(e.l2_pressure == doctest::Approx(std::sqrt(p2 - p1 * p1)).epsilon(1e-12));
}

TEST_CASE("triple norm")
{
  const Mesh m = generate_box_mesh({1, 2, 1}, {2, 2, 2});
  const VelocityField v{Eigen::VectorXd::Zero(3 * m.num_edges())};
  const PressureField one{Eigen::VectorXd::Ones(m.num_vertices())};
  CHECK(triple_norm(m, v, one) == doctest::Approx(std::sqrt(2.0)));
  const auto u = interpolate_at_midpoints(
      m, [](const Vector3& x) { return Vector3(x[1], 0, 0); });
  const PressureField zero{Eigen::VectorXd::Zero(m.num_vertices())};
  CHECK(triple_norm(m, u, zero) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("inf-sup estimate")
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {3, 3, 3});
  for (auto form : {FormKind::BConsistent, FormKind::BTilde})
  {
    const auto r = estimate_infsup(m, form);
    CHECK(r.beta > 0.005);
    CHECK(r.beta < 1.0);
    CHECK(r.pressure_dofs == m.num_vertices());
  }
  CHECK_THROWS_AS(estimate_infsup(generate_box_mesh({1, 1, 1}, {1, 1, 1}),
                                  FormKind::BConsistent),
                  InvalidArgument);
}

TEST_CASE("inf-sup estimate matches a direct dense computation")
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {2, 2, 2});
  const auto vd = build_velocity_dofs(m);
  const auto pd = build_pressure_dofs(m);
  const Eigen::MatrixXd a(assemble_velocity_operator(m, vd, FormKind::Laplacian));
  const Eigen::MatrixXd b(assemble_divergence_operator(m, vd, pd, FormKind::BTilde));
  std::vector<Index> free;
  for (Index i = 0; i < vd.size(); ++i)
    if (!vd.is_boundary(i))
      free.push_back(i);
  const Index nf = static_cast<Index>(free.size());
  const Index np = pd.size();
  Eigen::MatrixXd af(nf, nf), bf(np, nf);
  for (Index j = 0; j < nf; ++j)
  {
    for (Index i = 0; i < nf; ++i)
      af(i, j) = a(free[i], free[j]);
    bf.col(j) = b.col(free[j]);
  }
  // sup_v (Bv.q)/|v|_A = |q|_{B A^-1 B^T}. Constants span the kernel of the
  // pencil and G 1 = M 1 is the mean functional, so the zero-mean minimum is
  // the second eigenvalue of the full pencil.
  const Eigen::MatrixXd s = bf * af.ldlt().solve(bf.transpose());
  const double h = m.h();
  const Eigen::MatrixXd g
      = Eigen::MatrixXd(assemble_pressure_gram(m, pd, PressureGram::Mass))
        + h * h * Eigen::MatrixXd(assemble_pressure_gram(m, pd, PressureGram::Stiffness));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, g);
  const double beta = estimate_infsup(m, FormKind::BTilde).beta;
  CHECK(std::abs(es.eigenvalues()[0]) < 1e-12);
  CHECK(beta * beta == doctest::Approx(es.eigenvalues()[1]).epsilon(1e-9));
}

TEST_CASE("discrete Korn constant")
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {2, 2, 2});
  const auto k = estimate_korn(m, true);
  CHECK(k.alpha > 0.1);
  CHECK(k.alpha <= 2.0);

  // Without boundary conditions the mode is a rigid motion.
  const auto free = estimate_korn(m, false);
  CHECK(std::abs(free.alpha) < 1e-10);
  Eigen::MatrixXd rotations(3 * m.num_edges(), 6);
  for (int r = 0; r < 3; ++r)
  {
    const Vector3 axis = Vector3::Unit(r);
    rotations.col(r) = interpolate_at_midpoints(
                           m, [&](const Vector3& x) { return axis.cross(x).eval(); })
                           .values;
    rotations.col(r + 3) = interpolate_at_midpoints(
                               m, [&](const Vector3&) { return axis; })
                               .values;
  }
  const Eigen::VectorXd coeff = rotations.colPivHouseholderQr().solve(free.mode);
  CHECK((rotations * coeff - free.mode).norm() < 1e-8 * free.mode.norm());
  CHECK_THROWS_AS(estimate_korn(generate_box_mesh({1, 1, 1}, {8, 8, 8}), true),
                  InvalidArgument);
}

TEST_CASE("candidate field")
{
  const Mesh m = generate_box_mesh({1, 1, 1}, {3, 3, 3});
  const auto q = interpolate_at_vertices(
      m, [](const Vector3& x) { return x[0] - 2 * x[1] + 0.5 * x[2]; });
  const auto v = verfurth_candidate(m, q);
  const double h = m.h();
  for (Index e = 0; e < m.num_edges(); ++e)
  {
    const Vector3 ve = v.values.segment<3>(3 * e);
    if (m.is_boundary_edge(e))
    {
      CHECK(ve.norm() == 0.0);
      continue;
    }
    const auto& ev = m.edges()[e];
    const Vector3 t = (m.vertex(ev[1]) - m.vertex(ev[0])).normalized();
    CHECK((ve + h * h * t.dot(Vector3(1, -2, 0.5)) * t).norm() < 1e-13);
  }
  const auto vd = build_velocity_dofs(m);
  const auto pd = build_pressure_dofs(m);
  const SparseMatrix b = assemble_divergence_operator(m, vd, pd, FormKind::BConsistent);
  CHECK(q.values.dot(b * v.values) > 0.0);

  CandidateOptions all;
  all.include_boundary_edges = true;
  all.scale = 1.0;
  const auto w = verfurth_candidate(m, q, all);
  CHECK(w.values.segment<3>(0).norm() > 0.0);
}

TEST_CASE("reference-cell constants")
{
  for (const auto& b : {Vector3(1, 0, 0), Vector3(0.2, -1.3, 0.8)})
  {
    const auto r = verify_reference_constants(b);
    CHECK(r.max_deviation() < 1e-13);
    double sum = 0.0;
    for (const auto& e : r.edges)
    {
      CHECK(e.total == doctest::Approx(8.0 / 45.0 * e.tangent_dot_b * e.tangent_dot_b));
      sum += e.total;
    }
    CHECK(r.divergence_pairing == doctest::Approx(sum));
  }
  CHECK(verify_reference_constants(Vector3(1, 0, 0)).divergence_pairing
        == doctest::Approx(16.0 / 45.0));
  ReferenceConstants wrong;
  wrong.combined = 1.0 / 6.0;
  CHECK(verify_reference_constants(Vector3(1, 0, 0), wrong).max_deviation() > 1e-3);
}

TEST_CASE("boundary constant against the oracle")
{
  // (t.b) int_dT (n.t) phi_E (b.x) = (4/15)(t.b)^2 on the reference cell.
  const auto& v = element::reference_vertices();
  const Vector3 b(0.4, 1.0, -0.3);
  for (int e = 0; e < 6; ++e)
  {
    const Vector3 t = element::edge_tangent(e);
    const auto& c = element::basis_coefficients()[element::edge_basis(e)];
    const oracle::Polynomial phi{{c[0], 0, 0, 0}, {c[1], 1, 0, 0}, {c[2], 0, 1, 0},
                                 {c[3], 0, 0, 1}, {c[4], 2, 0, 0}, {c[5], 0, 2, 0},
                                 {c[6], 0, 0, 2}};
    const oracle::Polynomial bx{{b[0], 1, 0, 0}, {b[1], 0, 1, 0}, {b[2], 0, 0, 1}};
    double trace = 0.0;
    for (int f = 0; f < 4; ++f)
    {
      const auto& fv = element::reference_faces[f];
      const std::array<Vector3, 3> tri{v[fv[0]], v[fv[1]], v[fv[2]]};
      const Vector3 n = -v[f].normalized();
      trace += n.dot(t) * oracle::integrate_triangle(tri, oracle::product(phi, bx));
    }
    CHECK(t.dot(b) * trace == doctest::Approx(4.0 / 15.0 * t.dot(b) * t.dot(b)).scale(1));
  }
}

TEST_CASE("face Jacobian identity")
{
  const Mesh m = generate_box_mesh({1, 2, 0.5}, {2, 1, 1});
  for (Index c = 0; c < m.num_cells(); ++c)
    for (Index e : m.cell_edges()[c])
      for (Index f : m.cell_faces()[c])
      {
        const auto r = verify_face_jacobian_identity(m, c, e, f);
        CHECK(r.relative_difference < 1e-13);
      }
  Index foreign = 0;
  while (std::find(m.cell_edges()[0].begin(), m.cell_edges()[0].end(), foreign)
         != m.cell_edges()[0].end())
    ++foreign;
  CHECK_THROWS_AS(verify_face_jacobian_identity(m, 0, foreign, m.cell_faces()[0][0]),
                  InvalidArgument);
}

TEST_CASE("convergence table and csv")
{
  std::vector<Mesh> meshes;
  for (int n : {2, 3})
    meshes.push_back(generate_box_mesh({1, 1, 1}, {n, n, n}));
  CHECK_THROWS_AS(run_convergence_study(cubic_case(), meshes, FormKind::Laplacian,
                                        FormKind::BTilde),
                  InvalidArgument);
  meshes.push_back(generate_box_mesh({1, 1, 1}, {4, 4, 4}));
  const auto t = run_convergence_study(cubic_case(), meshes, FormKind::Laplacian,
                                       FormKind::BTilde, false);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.failure.empty());
  CHECK(std::isnan(t.rows[0].slope_l2_velocity));
  CHECK(t.rows[2].errors.l2_velocity < t.rows[1].errors.l2_velocity);
  std::ostringstream out;
  write_convergence_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "h,ndof_u,ndof_p,eL2u,eH1u,eL2p,slope_eL2u,slope_eH1u,slope_eL2p,seconds");
  std::getline(in, line);
  CHECK(line.find(",,,,0") != std::string::npos);
  int rows = 1;
  while (std::getline(in, line))
    ++rows;
  CHECK(rows == 3);
}

TEST_CASE("rate thresholds")
{
  ConvergenceTable t;
  t.rows.resize(2);
  auto& r = t.rows[1];
  r.slope_l2_velocity = 2.1;
  r.slope_h1_velocity = 0.9;
  r.slope_l2_pressure = 1.4;
  CHECK(meets_rate_thresholds(t));
  r.slope_l2_pressure = 1.2;
  CHECK_FALSE(meets_rate_thresholds(t));
  r.slope_l2_pressure = 1.5;
  r.slope_h1_velocity = 1.25;
  CHECK_FALSE(meets_rate_thresholds(t));
  r.slope_h1_velocity = 1.0;
  t.failure = "x";
  CHECK_FALSE(meets_rate_thresholds(t));
}

TEST_CASE("channel flow on a coarse mesh")
{
  for (auto op : {FormKind::Laplacian, FormKind::Strain})
  {
    const auto r = run_poiseuille(op, {12, 4, 2}, 6);
    CHECK(r.inflow == doctest::Approx(1.0 / 60.0));
    CHECK(r.flux_imbalance < 0.02);
    CHECK(r.symmetry_defect < 0.02);
    CHECK(r.pressure_decreasing);
    CHECK(r.strip_pressure.size() == 6);
  }
}
