#include "rq1/analysis.hpp"
#include "rq1/element.hpp"
#include "rq1/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace rq1
{

// ---------------------------------------------------------------------------
// Manufactured solutions

ManufacturedCase cubic_case()
{
  ManufacturedCase c;
  c.name = "cubic";
  c.velocity = [](const Vector3& x)
  {
    const double a = x[0] * x[0] * x[0];
    const double b = x[1] * x[1] * x[1];
    const double d = x[2] * x[2] * x[2];
    return Vector3(b - d, a - d, -a - b);
  };
  c.velocity_gradient = [](const Vector3& x)
  {
    const double a = 3 * x[0] * x[0];
    const double b = 3 * x[1] * x[1];
    const double d = 3 * x[2] * x[2];
    Matrix3 g;
    g << 0, b, -d, //
        a, 0, -d,  //
        -a, -b, 0;
    return g;
  };
  c.pressure = [](const Vector3& x)
  { return 6.0 * (x[0] * x[1] - x[0] * x[2] - x[1] * x[2]); };
  c.force = [](const Vector3&) { return Vector3::Zero().eval(); };
  return c;
}

ManufacturedCase affine_case()
{
  ManufacturedCase c;
  c.name = "affine";
  c.velocity = [](const Vector3& x)
  { return Vector3(x[1] + 2 * x[2] + 0.5, 3 * x[0] - x[2], x[0] + x[1] - 1); };
  c.velocity_gradient = [](const Vector3&)
  {
    Matrix3 g;
    g << 0, 1, 2, //
        3, 0, -1, //
        1, 1, 0;
    return g;
  };
  c.pressure = [](const Vector3&) { return 0.0; };
  c.force = [](const Vector3&) { return Vector3::Zero().eval(); };
  return c;
}

ManufacturedCase affine_linear_pressure_case()
{
  ManufacturedCase c = affine_case();
  c.name = "affine-linear-pressure";
  c.pressure = [](const Vector3& x) { return x[0] - 2 * x[1] + x[2]; };
  c.force = [](const Vector3&) { return Vector3(1, -2, 1); };
  return c;
}

double manufactured_residual(const ManufacturedCase& c,
                             const std::vector<Vector3>& points)
{
  constexpr double step = 1e-4;
  double worst = 0.0;
  for (const auto& x : points)
  {
    Vector3 laplacian = Vector3::Zero();
    Vector3 grad_p;
    for (int j = 0; j < 3; ++j)
    {
      Vector3 dx = Vector3::Zero();
      dx[j] = step;
      const Matrix3 gp = c.velocity_gradient(x + dx);
      const Matrix3 gm = c.velocity_gradient(x - dx);
      laplacian += (gp.col(j) - gm.col(j)) / (2 * step);
      grad_p[j] = (c.pressure(x + dx) - c.pressure(x - dx)) / (2 * step);
    }
    const Vector3 r = -laplacian + grad_p - c.force(x);
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
    worst = std::max(worst, std::abs(c.velocity_gradient(x).trace()));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Norms

namespace
{

struct PointData
{
  QuadratureRule rule;
  std::vector<std::array<double, 6>> phi;
  std::vector<std::array<Vector3, 6>> dphi;
  std::vector<std::array<double, 4>> lambda;

  explicit PointData(int degree) : rule(volume_quadrature(degree))
  {
    for (const auto& x : rule.points)
    {
      phi.push_back(element::eval_basis(x));
      dphi.push_back(element::eval_basis_grad(x));
      lambda.push_back(element::eval_p1_basis(x));
    }
  }
};

} // namespace

ErrorNorms error_norms(const Mesh& mesh, const VelocityField& u,
                       const PressureField& p, const ManufacturedCase& c)
{
  const PointData data(7);
  double eu = 0.0, egrad = 0.0, ep = 0.0, ep_mean = 0.0, volume = 0.0;
  for (Index cell = 0; cell < mesh.num_cells(); ++cell)
  {
    const AffineMap map = affine_map(mesh, cell);
    const double det = std::abs(map.det);
    const auto& edges = mesh.cell_edges()[cell];
    const auto& verts = mesh.cells()[cell];

    std::array<Vector3, 6> coeff;
    for (int e = 0; e < 6; ++e)
      coeff[e] = u.values.segment<3>(3 * edges[e]);

    for (std::size_t q = 0; q < data.rule.size(); ++q)
    {
      const double w = data.rule.weights[q] * det;
      const Vector3 x = map.apply(data.rule.points[q]);

      Vector3 uh = Vector3::Zero();
      Matrix3 guh = Matrix3::Zero();
      for (int e = 0; e < 6; ++e)
      {
        const int i = element::edge_basis(e);
        uh += data.phi[q][i] * coeff[e];
        guh += coeff[e]
               * (map.inverse_transpose * data.dphi[q][i]).transpose();
      }
      double ph = 0.0;
      for (int k = 0; k < 4; ++k)
        ph += data.lambda[q][k] * p.values[verts[k]];

      eu += w * (uh - c.velocity(x)).squaredNorm();
      egrad += w * (guh - c.velocity_gradient(x)).squaredNorm();
      const double dp = ph - c.pressure(x);
      ep += w * dp * dp;
      ep_mean += w * dp;
      volume += w;
    }
  }
  ErrorNorms n;
  n.l2_velocity = std::sqrt(eu);
  n.h1_velocity = std::sqrt(egrad);
  n.l2_pressure = std::sqrt(std::max(0.0, ep - ep_mean * ep_mean / volume));
  return n;
}

double boundary_pressure_error(const Mesh& mesh, const PressureField& p,
                               const ManufacturedCase& c)
{
  const FaceQuadratureRule rule = face_quadrature(4);
  double e2 = 0.0, e1 = 0.0, area = 0.0;
  for (Index f = 0; f < mesh.num_faces(); ++f)
  {
    if (!mesh.is_boundary_face(f))
      continue;
    const auto& face = mesh.faces()[f];
    const Vector3 x0 = mesh.vertex(face[0]);
    const Vector3 x1 = mesh.vertex(face[1]);
    const Vector3 x2 = mesh.vertex(face[2]);
    const double a = 0.5 * (x1 - x0).cross(x2 - x0).norm();
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const auto& l = rule.barycentric[q];
      const Vector3 x = l[0] * x0 + l[1] * x1 + l[2] * x2;
      const double ph = l[0] * p.values[face[0]] + l[1] * p.values[face[1]]
                        + l[2] * p.values[face[2]];
      const double d = ph - c.pressure(x);
      const double w = rule.weights[q] * a;
      e2 += w * d * d;
      e1 += w * d;
      area += w;
    }
  }
  return std::sqrt(std::max(0.0, e2 - e1 * e1 / area));
}

double triple_norm(const Mesh& mesh, const VelocityField& v,
                   const PressureField& q)
{
  const auto vdofs = build_velocity_dofs(mesh);
  const auto pdofs = build_pressure_dofs(mesh);
  const SparseMatrix a
      = assemble_velocity_operator(mesh, vdofs, FormKind::Laplacian);
  const SparseMatrix m = assemble_pressure_gram(mesh, pdofs, PressureGram::Mass);
  const SparseMatrix k
      = assemble_pressure_gram(mesh, pdofs, PressureGram::Stiffness);
  const double h = mesh.h();
  const double sq = v.values.dot(a * v.values) + q.values.dot(m * q.values)
                    + h * h * q.values.dot(k * q.values);
  return std::sqrt(std::max(0.0, sq));
}

StokesSolution solve_manufactured(const Mesh& mesh, const ManufacturedCase& c,
                                  FormKind velocity_form,
                                  FormKind divergence_form,
                                  const AssemblyOptions& assembly)
{
  StokesOptions options;
  options.velocity_form = velocity_form;
  options.divergence_form = divergence_form;
  options.mean_constraint = true;
  options.assembly = assembly;
  return solve_stokes(mesh, c.force, dirichlet_everywhere(c.velocity),
                      options);
}

// ---------------------------------------------------------------------------
// Stability constants

namespace
{

std::vector<Index> interior_dofs(const VelocityDofMap& vdofs)
{
  std::vector<Index> free;
  for (Index i = 0; i < vdofs.size(); ++i)
    if (!vdofs.is_boundary(i))
      free.push_back(i);
  return free;
}

SparseMatrix selection(Index n, const std::vector<Index>& columns)
{
  std::vector<Eigen::Triplet<double, Index>> t;
  for (std::size_t j = 0; j < columns.size(); ++j)
    t.emplace_back(columns[j], static_cast<Index>(j), 1.0);
  SparseMatrix p(n, static_cast<Index>(columns.size()));
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

// Orthonormal basis of the complement of span(vectors).
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& vectors)
{
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vectors);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(vectors.rows() - vectors.cols());
}

} // namespace

InfSupEstimate estimate_infsup(const Mesh& mesh, FormKind form)
{
  const auto report = check_internal_edge_assumption(mesh);
  if (!report.passed)
    throw InvalidArgument(
        "mesh violates the internal edge assumption: "
        + std::to_string(report.offending_cells.size())
        + " cells have fewer than three internal edges");

  const auto vdofs = build_velocity_dofs(mesh);
  const auto pdofs = build_pressure_dofs(mesh);
  const auto free = interior_dofs(vdofs);
  if (free.empty())
    throw InvalidArgument("no interior velocity DOFs");

  const SparseMatrix p = selection(vdofs.size(), free);
  const SparseMatrix a
      = assemble_velocity_operator(mesh, vdofs, FormKind::Laplacian);
  const SparseMatrix aff = p.transpose() * a * p;
  const SparseMatrix bf
      = assemble_divergence_operator(mesh, vdofs, pdofs, form) * p;

  Eigen::SimplicialLLT<SparseMatrix> llt(aff);
  if (llt.info() != Eigen::Success)
    throw InvalidArgument("velocity operator is singular on the interior DOFs");

  const Eigen::MatrixXd bt = Eigen::MatrixXd(bf.transpose());
  const Eigen::MatrixXd x = llt.solve(bt);
  Eigen::MatrixXd schur = bf * x;

  const double h = mesh.h();
  const Eigen::MatrixXd gram
      = Eigen::MatrixXd(assemble_pressure_gram(mesh, pdofs, PressureGram::Mass))
        + h * h
              * Eigen::MatrixXd(assemble_pressure_gram(
                  mesh, pdofs, PressureGram::Stiffness));

  const Eigen::VectorXd mean = assemble_pressure_mean(mesh, pdofs);
  const Eigen::MatrixXd z = complement_basis(mean);
  Eigen::MatrixXd sz = z.transpose() * schur * z;
  Eigen::MatrixXd gz = z.transpose() * gram * z;
  sz = 0.5 * (sz + sz.transpose()).eval();
  gz = 0.5 * (gz + gz.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      sz, gz, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (eig.info() != Eigen::Success)
    throw Error("inf-sup eigenvalue problem did not converge");

  InfSupEstimate out;
  out.beta = std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
  out.h = h;
  out.free_velocity_dofs = static_cast<Index>(free.size());
  out.pressure_dofs = pdofs.size();
  return out;
}

KornEstimate estimate_korn(const Mesh& mesh, bool dirichlet)
{
  const auto vdofs = build_velocity_dofs(mesh);
  const Index n = vdofs.size();
  const SparseMatrix lap
      = assemble_velocity_operator(mesh, vdofs, FormKind::Laplacian);
  const SparseMatrix strain
      = assemble_velocity_operator(mesh, vdofs, FormKind::Strain);

  Eigen::MatrixXd s, l, basis;
  if (dirichlet)
  {
    const auto free = interior_dofs(vdofs);
    if (static_cast<Index>(free.size()) > dense_dof_limit)
      throw InvalidArgument("Korn estimate limited to "
                            + std::to_string(dense_dof_limit) + " DOFs");
    const SparseMatrix p = selection(n, free);
    s = Eigen::MatrixXd(SparseMatrix(p.transpose() * strain * p));
    l = Eigen::MatrixXd(SparseMatrix(p.transpose() * lap * p));
  }
  else
  {
    if (n > dense_dof_limit)
      throw InvalidArgument("Korn estimate limited to "
                            + std::to_string(dense_dof_limit) + " DOFs");
    Eigen::MatrixXd constants = Eigen::MatrixXd::Zero(n, 3);
    for (Index i = 0; i < n; ++i)
      constants(i, VelocityDofMap::component_of(i)) = 1.0;
    basis = complement_basis(constants);
    s = basis.transpose() * (strain * basis);
    l = basis.transpose() * (lap * basis);
  }
  s = 0.5 * (s + s.transpose()).eval();
  l = 0.5 * (l + l.transpose()).eval();

  const int opts = dirichlet ? Eigen::EigenvaluesOnly : Eigen::ComputeEigenvectors;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      s, l, opts | Eigen::Ax_lBx);
  if (eig.info() != Eigen::Success)
    throw Error("Korn eigenvalue problem did not converge");

  KornEstimate out;
  out.alpha = eig.eigenvalues()[0];
  out.dofs = static_cast<Index>(s.cols());
  if (!dirichlet)
    out.mode = basis * eig.eigenvectors().col(0);
  return out;
}

std::vector<double> estimate_korn(const std::vector<Mesh>& meshes)
{
  std::vector<double> alphas;
  for (const auto& m : meshes)
    alphas.push_back(estimate_korn(m, true).alpha);
  return alphas;
}

VelocityField verfurth_candidate(const Mesh& mesh, const PressureField& q,
                                 const CandidateOptions& options)
{
  const double h = mesh.h();
  const double scale = options.scale.value_or(-h * h);

  std::vector<Vector3> grad_sum(mesh.num_edges(), Vector3::Zero());
  std::vector<int> count(mesh.num_edges(), 0);
  for (Index cell = 0; cell < mesh.num_cells(); ++cell)
  {
    const Vector3 g = gradient(mesh, q, cell);
    for (Index e : mesh.cell_edges()[cell])
    {
      grad_sum[e] += g;
      ++count[e];
    }
  }

  VelocityField v{Eigen::VectorXd::Zero(3 * mesh.num_edges())};
  for (Index e = 0; e < mesh.num_edges(); ++e)
  {
    if (mesh.is_boundary_edge(e) && !options.include_boundary_edges)
      continue;
    const auto& ev = mesh.edges()[e];
    const Vector3 t = (mesh.vertex(ev[1]) - mesh.vertex(ev[0])).normalized();
    const Vector3 g = grad_sum[e] / count[e];
    v.values.segment<3>(3 * e) = scale * t.dot(g) * t;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Element identities

namespace
{

struct ReferenceFace
{
  std::array<Vector3, 3> x;
  Vector3 normal;
  double area;
};

ReferenceFace reference_face(int local_face)
{
  const auto& v = element::reference_vertices();
  const auto& f = element::reference_faces[local_face];
  ReferenceFace out{{v[f[0]], v[f[1]], v[f[2]]}, Vector3::Zero(), 0.0};
  Vector3 n = (out.x[1] - out.x[0]).cross(out.x[2] - out.x[0]);
  out.area = 0.5 * n.norm();
  n.normalize();
  if (n.dot(v[local_face] - out.x[0]) > 0.0)
    n = -n;
  out.normal = n;
  return out;
}

} // namespace

double ReferenceConstantsReport::max_deviation() const
{
  return std::max({bulk_deviation, boundary_deviation, total_deviation,
                   pairing_deviation});
}

ReferenceConstantsReport verify_reference_constants(const Vector3& b,
                                         const ReferenceConstants& k)
{
  const QuadratureRule vol = volume_quadrature(6);
  const FaceQuadratureRule face = face_quadrature(6);

  ReferenceConstantsReport r;
  double sum_tb2 = 0.0;
  for (int e = 0; e < 6; ++e)
  {
    const int i = element::edge_basis(e);
    const Vector3 t = element::edge_tangent(e);
    const double tb = t.dot(b);

    double integral_phi = 0.0;
    for (std::size_t q = 0; q < vol.size(); ++q)
      integral_phi += vol.weights[q] * element::eval_basis(vol.points[q])[i];

    double trace = 0.0;
    for (int lf = 0; lf < 4; ++lf)
    {
      const ReferenceFace rf = reference_face(lf);
      const double nt = rf.normal.dot(t);
      for (std::size_t q = 0; q < face.size(); ++q)
      {
        const auto& l = face.barycentric[q];
        const Vector3 x = l[0] * rf.x[0] + l[1] * rf.x[1] + l[2] * rf.x[2];
        trace += face.weights[q] * rf.area * nt * element::eval_basis(x)[i]
                 * b.dot(x);
      }
    }

    auto& terms = r.edges[e];
    terms.tangent_dot_b = tb;
    terms.bulk = tb * tb * integral_phi;
    terms.boundary = tb * trace;
    terms.total = terms.bulk - terms.boundary;
    sum_tb2 += tb * tb;

    r.bulk_deviation
        = std::max(r.bulk_deviation, std::abs(terms.bulk - k.bulk * tb * tb));
    r.boundary_deviation = std::max(
        r.boundary_deviation, std::abs(terms.boundary - k.boundary * tb * tb));
    r.total_deviation = std::max(
        r.total_deviation, std::abs(terms.total - k.combined * tb * tb));
  }

  // (div v*, b.x) with v* = -sum_E (t_E.b) t_E phi_E.
  for (std::size_t q = 0; q < vol.size(); ++q)
  {
    const auto grads = element::eval_basis_grad(vol.points[q]);
    double div = 0.0;
    for (int e = 0; e < 6; ++e)
    {
      const Vector3 t = element::edge_tangent(e);
      div -= t.dot(b) * t.dot(grads[element::edge_basis(e)]);
    }
    r.divergence_pairing += vol.weights[q] * div * b.dot(vol.points[q]);
  }
  r.pairing_deviation
      = std::abs(r.divergence_pairing - k.combined * sum_tb2);
  return r;
}

FaceJacobianReport verify_face_jacobian_identity(const Mesh& mesh, Index cell,
                                                 Index edge, Index face)
{
  if (cell < 0 || cell >= mesh.num_cells())
    throw InvalidArgument("cell index out of range");
  const auto& ce = mesh.cell_edges()[cell];
  const auto& cf = mesh.cell_faces()[cell];
  const auto le = std::find(ce.begin(), ce.end(), edge) - ce.begin();
  const auto lf = std::find(cf.begin(), cf.end(), face) - cf.begin();
  if (le == 6)
    throw InvalidArgument("edge does not belong to the cell");
  if (lf == 4)
    throw InvalidArgument("face does not belong to the cell");

  const AffineMap map = affine_map(mesh, cell);
  const auto& verts = mesh.cells()[cell];

  // Physical side.
  const auto& re = element::reference_edges[le];
  const Vector3 t
      = (mesh.vertex(verts[re[1]]) - mesh.vertex(verts[re[0]])).normalized();
  const auto& rf = element::reference_faces[lf];
  const Vector3 x0 = mesh.vertex(verts[rf[0]]);
  const Vector3 x1 = mesh.vertex(verts[rf[1]]);
  const Vector3 x2 = mesh.vertex(verts[rf[2]]);
  Vector3 n = (x1 - x0).cross(x2 - x0);
  const double area = 0.5 * n.norm();
  n.normalize();
  if (n.dot(mesh.vertex(verts[lf]) - x0) > 0.0)
    n = -n;

  // Reference side.
  const ReferenceFace ref = reference_face(static_cast<int>(lf));
  const Vector3 that = element::edge_tangent(static_cast<int>(le));
  const double stretch = (map.matrix * that).norm();
  const double volume_ratio = mesh.volume(cell) / element::reference_volume;

  FaceJacobianReport out;
  out.lhs = n.dot(t) * area / ref.area;
  out.rhs = volume_ratio * ref.normal.dot(that) / stretch;
  out.relative_difference
      = std::abs(out.lhs - out.rhs) / (volume_ratio / stretch);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceTable run_convergence_study(const ManufacturedCase& c,
                                       const std::vector<Mesh>& meshes,
                                       FormKind velocity_form,
                                       FormKind divergence_form,
                                       bool record_time)
{
  if (meshes.size() < 3)
    throw InvalidArgument("convergence study needs at least 3 meshes");

  ConvergenceTable table;
  for (const auto& mesh : meshes)
  {
    const auto start = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.h = mesh.h();
    row.ndof_u = 3 * mesh.num_edges();
    row.ndof_p = mesh.num_vertices();
    try
    {
      const StokesSolution s
          = solve_manufactured(mesh, c, velocity_form, divergence_form);
      row.errors = error_norms(mesh, s.velocity, s.pressure, c);
      row.boundary_pressure_error
          = boundary_pressure_error(mesh, s.pressure, c);
    }
    catch (const Error& e)
    {
      table.failure = e.what();
      return table;
    }
    if (record_time)
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (!table.rows.empty())
    {
      const auto& prev = table.rows.back();
      const double lh = std::log(prev.h / row.h);
      row.slope_l2_velocity
          = std::log(prev.errors.l2_velocity / row.errors.l2_velocity) / lh;
      row.slope_h1_velocity
          = std::log(prev.errors.h1_velocity / row.errors.h1_velocity) / lh;
      row.slope_l2_pressure
          = std::log(prev.errors.l2_pressure / row.errors.l2_pressure) / lh;
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table)
{
  std::ostringstream s;
  s.precision(17);
  s << "h,ndof_u,ndof_p,eL2u,eH1u,eL2p,slope_eL2u,slope_eH1u,slope_eL2p,"
       "seconds\n";
  auto slope = [&](double v)
  {
    if (!std::isnan(v))
      s << v;
  };
  for (const auto& r : table.rows)
  {
    s << r.h << ',' << r.ndof_u << ',' << r.ndof_p << ','
      << r.errors.l2_velocity << ',' << r.errors.h1_velocity << ','
      << r.errors.l2_pressure << ',';
    slope(r.slope_l2_velocity);
    s << ',';
    slope(r.slope_h1_velocity);
    s << ',';
    slope(r.slope_l2_pressure);
    s << ',' << r.seconds << '\n';
  }
  out << s.str();
}

bool meets_rate_thresholds(const ConvergenceTable& table,
                           const RateThresholds& t)
{
  if (table.rows.size() < 2 || !table.failure.empty())
    return false;
  const auto& r = table.rows.back();
  return std::abs(r.slope_l2_velocity - t.l2_velocity) <= t.l2_velocity_tol
         && std::abs(r.slope_h1_velocity - t.h1_velocity) <= t.h1_velocity_tol
         && r.slope_l2_pressure >= t.l2_pressure_min;
}

// ---------------------------------------------------------------------------
// Channel flow

BoundarySpec poiseuille_boundary()
{
  constexpr double tol = 1e-12;
  const VectorFunction profile = [](const Vector3& x)
  { return Vector3(x[1] * (1.0 - x[1]), 0.0, 0.0); };
  const VectorFunction zero = [](const Vector3&)
  { return Vector3::Zero().eval(); };

  BoundarySpec spec;
  spec.regions.push_back(
      {[](const Vector3& x) { return std::abs(x[0]) < tol; },
       {true, true, true},
       profile});
  spec.regions.push_back({[](const Vector3& x)
                          {
                            return std::abs(x[1]) < tol
                                   || std::abs(x[1] - 1.0) < tol;
                          },
                          {true, true, true},
                          profile});
  spec.regions.push_back({[](const Vector3& x)
                          {
                            return std::abs(x[2]) < tol
                                   || std::abs(x[2] - 0.1) < tol;
                          },
                          {false, false, true},
                          zero});
  return spec;
}

PoiseuilleResult run_poiseuille(FormKind velocity_form,
                                const std::array<int, 3>& subdivisions,
                                int strips)
{
  constexpr double length = 3.0;
  if (strips < 2)
    throw InvalidArgument("need at least two pressure strips");

  Mesh mesh = generate_box_mesh({length, 1.0, 0.1}, subdivisions);
  StokesOptions options;
  options.velocity_form = velocity_form;
  options.divergence_form = FormKind::BTilde;
  options.mean_constraint = false;
  StokesSolution s = solve_stokes(
      mesh, [](const Vector3&) { return Vector3::Zero().eval(); },
      poiseuille_boundary(), options);

  PoiseuilleResult r{std::move(mesh), std::move(s), 0.0, 0.0, 0.0, 0.0, {}, false, 0.0};
  const Mesh& m = r.mesh;
  const Eigen::VectorXd& u = r.solution.velocity.values;

  // Face-midpoint quadrature of u1 on the inflow and outflow planes.
  for (Index f = 0; f < m.num_faces(); ++f)
  {
    if (!m.is_boundary_face(f))
      continue;
    const auto& fv = m.faces()[f];
    const Vector3 x0 = m.vertex(fv[0]);
    const Vector3 x1 = m.vertex(fv[1]);
    const Vector3 x2 = m.vertex(fv[2]);
    const bool in = std::max({x0[0], x1[0], x2[0]}) < 1e-12;
    const bool out = std::min({x0[0], x1[0], x2[0]}) > length - 1e-12;
    if (!in && !out)
      continue;
    const double area = 0.5 * (x1 - x0).cross(x2 - x0).norm();
    const Index cell = m.face_cells()[f][0];
    int local = 0;
    while (m.cell_faces()[cell][local] != f)
      ++local;
    double sum = 0.0;
    for (int e = 0; e < 6; ++e)
    {
      const auto& re = element::reference_edges[e];
      if (re[0] != local && re[1] != local)
        sum += u[3 * m.cell_edges()[cell][e]];
    }
    (in ? r.inflow : r.outflow) += area * sum / 3.0;
  }
  r.flux_imbalance = std::abs(r.inflow - r.outflow) / std::abs(r.inflow);

  // Mirror about x2 = 1/2.
  auto key = [](const Vector3& x)
  {
    return std::array<long long, 3>{std::llround(x[0] * 1e8),
                                    std::llround(x[1] * 1e8),
                                    std::llround(x[2] * 1e8)};
  };
  std::map<std::array<long long, 3>, Index> by_position;
  for (Index e = 0; e < m.num_edges(); ++e)
    by_position[key(m.edge_midpoints()[e])] = e;
  double defect = 0.0;
  const double umax = u.lpNorm<Eigen::Infinity>();
  for (Index e = 0; e < m.num_edges(); ++e)
  {
    Vector3 x = m.edge_midpoints()[e];
    x[1] = 1.0 - x[1];
    const auto it = by_position.find(key(x));
    if (it == by_position.end())
    {
      defect = std::numeric_limits<double>::infinity();
      break;
    }
    Vector3 mirrored = u.segment<3>(3 * it->second);
    mirrored[1] = -mirrored[1];
    defect = std::max(defect,
                      (u.segment<3>(3 * e) - mirrored).lpNorm<Eigen::Infinity>());
  }
  r.symmetry_defect = defect / umax;

  // Volume-weighted pressure means over strips along x1.
  std::vector<double> psum(strips, 0.0), vsum(strips, 0.0);
  const Eigen::VectorXd& p = r.solution.pressure.values;
  for (Index c = 0; c < m.num_cells(); ++c)
  {
    const auto& cv = m.cells()[c];
    const double mean = 0.25 * (p[cv[0]] + p[cv[1]] + p[cv[2]] + p[cv[3]]);
    const double vol = m.volume(c);
    const int k = std::clamp(
        static_cast<int>(m.centroid(c)[0] / length * strips), 0, strips - 1);
    psum[k] += vol * mean;
    vsum[k] += vol;
    r.pressure_integral += vol * mean;
  }
  r.pressure_decreasing = true;
  for (int k = 0; k < strips; ++k)
  {
    r.strip_pressure.push_back(psum[k] / vsum[k]);
    if (k > 0 && !(r.strip_pressure[k] < r.strip_pressure[k - 1]))
      r.pressure_decreasing = false;
  }
  return r;
}

} // namespace rq1
