#include "rq1/system.hpp"
#include "rq1/element.hpp"
#include "rq1/quadrature.hpp"

#include <Eigen/Geometry>

#include <umfpack.h>

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace rq1
{

BoundarySpec dirichlet_everywhere(VectorFunction g)
{
  BoundarySpec spec;
  spec.regions.push_back({{}, {true, true, true}, std::move(g)});
  return spec;
}

Index DirichletValues::count() const
{
  Index n = 0;
  for (char c : constrained)
    n += c != 0;
  return n;
}

DirichletValues resolve_boundary(const Mesh& mesh, const BoundarySpec& spec)
{
  DirichletValues out;
  const Index n = 3 * mesh.num_edges();
  out.constrained.assign(n, 0);
  out.values = Eigen::VectorXd::Zero(n);

  for (const auto& region : spec.regions)
  {
    if (!region.value)
      throw InvalidArgument("boundary region without a value function");
    for (Index e = 0; e < mesh.num_edges(); ++e)
    {
      const Vector3& x = mesh.edge_midpoints()[e];
      const bool selected
          = region.contains ? region.contains(x) : mesh.is_boundary_edge(e);
      if (!selected)
        continue;
      if (!mesh.is_boundary_edge(e))
        throw InvalidArgument("boundary region selects the interior midpoint ("
                              + std::to_string(x[0]) + ", "
                              + std::to_string(x[1]) + ", "
                              + std::to_string(x[2]) + ")");
      const Vector3 g = region.value(x);
      for (int a = 0; a < 3; ++a)
      {
        if (!region.components[a])
          continue;
        const Index dof = 3 * e + a;
        if (out.constrained[dof]
            && std::abs(out.values[dof] - g[a]) > 1e-10)
          throw InvalidArgument("conflicting boundary values at midpoint ("
                                + std::to_string(x[0]) + ", "
                                + std::to_string(x[1]) + ", "
                                + std::to_string(x[2]) + ")");
        out.constrained[dof] = 1;
        out.values[dof] = g[a];
      }
    }
  }
  return out;
}

Eigen::VectorXd assemble_boundary_flux(const Mesh& mesh,
                                       const BoundarySpec& spec)
{
  const FaceQuadratureRule rule = face_quadrature(5);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (Index f = 0; f < mesh.num_faces(); ++f)
  {
    if (!mesh.is_boundary_face(f))
      continue;
    const auto& face = mesh.faces()[f];
    const Vector3 x0 = mesh.vertex(face[0]);
    const Vector3 x1 = mesh.vertex(face[1]);
    const Vector3 x2 = mesh.vertex(face[2]);
    const Vector3 centre = (x0 + x1 + x2) / 3.0;

    const VectorFunction* g = nullptr;
    for (const auto& region : spec.regions)
      if (!region.contains || region.contains(0.5 * (x0 + x1)))
      {
        g = &region.value;
        break;
      }
    if (g == nullptr)
      continue;

    Vector3 normal = (x1 - x0).cross(x2 - x0);
    const double area = 0.5 * normal.norm();
    normal.normalize();
    if (normal.dot(mesh.centroid(mesh.face_cells()[f][0]) - centre) > 0.0)
      normal = -normal;

    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const auto& l = rule.barycentric[q];
      const Vector3 x = l[0] * x0 + l[1] * x1 + l[2] * x2;
      const double flux = rule.weights[q] * area * normal.dot((*g)(x));
      for (int i = 0; i < 3; ++i)
        r[face[i]] += flux * l[i];
    }
  }
  return r;
}

SaddleSystem build_saddle_system(const SparseMatrix& A, const SparseMatrix& B,
                                 const Eigen::VectorXd& f,
                                 std::optional<Eigen::VectorXd> mean_weights)
{
  if (A.rows() != A.cols() || B.cols() != A.rows() || f.size() != A.rows())
    throw InvalidArgument("saddle system: dimension mismatch");
  if (mean_weights && mean_weights->size() != B.rows())
    throw InvalidArgument("saddle system: mean weights dimension mismatch");

  SaddleSystem s;
  s.A = A;
  s.B = B;
  s.mean_weights = std::move(mean_weights);
  s.n_u = static_cast<Index>(A.rows());
  s.n_p = static_cast<Index>(B.rows());
  s.n_lambda = s.mean_weights ? 1 : 0;
  s.constrained.assign(s.n_u, 0);
  s.prescribed = Eigen::VectorXd::Zero(s.n_u);

  std::vector<Eigen::Triplet<double, Index>> t;
  t.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * s.n_p);
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it)
    {
      t.emplace_back(s.n_u + it.row(), it.col(), -it.value());
      t.emplace_back(it.col(), s.n_u + it.row(), -it.value());
    }
  if (s.mean_weights)
  {
    const Index last = s.n_u + s.n_p;
    for (Index i = 0; i < s.n_p; ++i)
    {
      t.emplace_back(s.n_u + i, last, (*s.mean_weights)[i]);
      t.emplace_back(last, s.n_u + i, (*s.mean_weights)[i]);
    }
  }
  s.matrix.resize(s.size(), s.size());
  s.matrix.setFromTriplets(t.begin(), t.end());
  s.matrix.makeCompressed();

  s.rhs = Eigen::VectorXd::Zero(s.size());
  s.rhs.head(s.n_u) = f;
  return s;
}

SaddleSystem apply_dirichlet(SaddleSystem system,
                             const DirichletValues& constraints)
{
  if (static_cast<Index>(constraints.constrained.size()) != system.n_u)
    throw InvalidArgument("dirichlet constraints: dimension mismatch");

  const Index n = system.size();
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < system.n_u; ++i)
    if (constraints.constrained[i])
    {
      fixed[i] = 1;
      g[i] = constraints.values[i];
      system.constrained[i] = 1;
      system.prescribed[i] = constraints.values[i];
    }

  system.rhs -= system.matrix * g;

  SparseMatrix& m = system.matrix;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (fixed[it.row()] || fixed[it.col()])
        it.valueRef() = 0.0;
  m.prune(0.0);

  std::vector<Eigen::Triplet<double, Index>> diag;
  for (Index i = 0; i < n; ++i)
    if (fixed[i])
    {
      diag.emplace_back(i, i, 1.0);
      system.rhs[i] = g[i];
    }
  SparseMatrix d(n, n);
  d.setFromTriplets(diag.begin(), diag.end());
  m += d;
  m.makeCompressed();
  return system;
}

SaddleSystem apply_dirichlet(SaddleSystem system, const Mesh& mesh,
                             const BoundarySpec& spec)
{
  return apply_dirichlet(std::move(system), resolve_boundary(mesh, spec));
}

std::string to_string(NullSpaceHint hint)
{
  switch (hint)
  {
  case NullSpaceHint::None:
    return "none";
  case NullSpaceHint::ConstantPressure:
    return "constant-pressure";
  case NullSpaceHint::InsufficientVelocityConstraints:
    return "insufficient-velocity-constraints";
  }
  return "unknown";
}

void write_diagnostics(std::ostream& out, const SolverDiagnostics& d)
{
  std::ostringstream s;
  s.precision(17);
  s << "n_u=" << d.n_u << '\n'
    << "n_p=" << d.n_p << '\n'
    << "n_lambda=" << d.n_lambda << '\n'
    << "nonzeros=" << d.nonzeros << '\n'
    << "constrained=" << d.constrained << '\n'
    << "relative_residual=" << d.relative_residual << '\n'
    << "refinement_steps=" << d.refinement_steps << '\n'
    << "rcond=" << d.rcond << '\n'
    << "pivot_min=" << d.pivot_min << '\n'
    << "pivot_max=" << d.pivot_max << '\n'
    << "status=" << d.status << '\n';
  out << s.str();
}

namespace
{

class UmfpackLu
{
public:
  explicit UmfpackLu(SparseMatrix m) : n_(m.rows())
  {
    // Long indices: the fill of 3D saddle systems outgrows the int variant.
    m.makeCompressed();
    values_.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
    columns_.assign(m.outerIndexPtr(), m.outerIndexPtr() + n_ + 1);
    rows_.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
    umfpack_dl_defaults(control_);
    control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    control_[UMFPACK_ORDERING] = ordering();
    status_ = umfpack_dl_symbolic(n_, n_, columns_.data(), rows_.data(),
                                  values_.data(), &symbolic_, control_, info_);
    if (status_ != UMFPACK_OK)
      return;
    status_ = umfpack_dl_numeric(columns_.data(), rows_.data(), values_.data(),
                                 symbolic_, &numeric_, control_, info_);
  }
  UmfpackLu(const UmfpackLu&) = delete;
  UmfpackLu& operator=(const UmfpackLu&) = delete;
  ~UmfpackLu()
  {
    if (numeric_)
      umfpack_dl_free_numeric(&numeric_);
    if (symbolic_)
      umfpack_dl_free_symbolic(&symbolic_);
  }

  int status() const { return status_; }
  double info(int key) const { return info_[key]; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b)
  {
    Eigen::VectorXd x(b.size());
    double info[UMFPACK_INFO];
    const auto st = umfpack_dl_solve(UMFPACK_A, columns_.data(), rows_.data(),
                                     values_.data(), x.data(), b.data(),
                                     numeric_, control_, info);
    if (st < 0)
      throw SolverError("umfpack solve failed with status "
                            + std::to_string(st),
                        NullSpaceHint::None);
    return x;
  }

private:
  static double ordering()
  {
    const char* env = std::getenv("RQ1_ORDERING");
    if (env && std::string(env) == "amd")
      return UMFPACK_ORDERING_AMD;
    return UMFPACK_ORDERING_METIS;
  }

  SuiteSparse_long n_;
  std::vector<SuiteSparse_long> columns_;
  std::vector<SuiteSparse_long> rows_;
  std::vector<double> values_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  double control_[UMFPACK_CONTROL];
  double info_[UMFPACK_INFO];
  int status_ = UMFPACK_OK;
};

double max_abs(const SparseMatrix& m)
{
  double v = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      v = std::max(v, std::abs(it.value()));
  return v;
}

} // namespace

StokesSolution solve(const SaddleSystem& system)
{
  const Index n = system.size();
  SolverDiagnostics diag;
  diag.n_u = system.n_u;
  diag.n_p = system.n_p;
  diag.n_lambda = system.n_lambda;
  diag.nonzeros = static_cast<Index>(system.matrix.nonZeros());
  for (char c : system.constrained)
    diag.constrained += c != 0;

  // A constant pressure in the kernel makes the system exactly singular, but
  // rounding can hide it from the factorisation.
  const double scale = max_abs(system.matrix);
  {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    z.segment(system.n_u, system.n_p).setOnes();
    const Eigen::VectorXd r = system.matrix * z;
    if (system.n_p > 0 && r.lpNorm<Eigen::Infinity>() <= 1e-12 * scale)
      throw SolverError("saddle system is singular: constant pressures lie "
                        "in the kernel (enable the mean constraint)",
                        NullSpaceHint::ConstantPressure);
  }
  for (int a = 0; a < 3 && system.n_u > 0; ++a)
  {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (Index i = a; i < system.n_u; i += 3)
      z[i] = 1.0;
    const Eigen::VectorXd r = system.matrix * z;
    if (r.lpNorm<Eigen::Infinity>() <= 1e-12 * scale)
      throw SolverError("saddle system is singular: constant velocities lie "
                        "in the kernel (check the velocity boundary "
                        "conditions)",
                        NullSpaceHint::InsufficientVelocityConstraints);
  }

  UmfpackLu lu(system.matrix);
  diag.rcond = lu.info(UMFPACK_RCOND);
  diag.pivot_min = lu.info(UMFPACK_UMIN);
  diag.pivot_max = lu.info(UMFPACK_UMAX);
  if (lu.status() != UMFPACK_OK
      && lu.status() != UMFPACK_WARNING_singular_matrix)
    throw SolverError("umfpack factorisation failed with status "
                          + std::to_string(lu.status()),
                      NullSpaceHint::None);
  if (lu.status() == UMFPACK_WARNING_singular_matrix || diag.rcond < 1e-13)
    throw SolverError("saddle system is singular (rcond "
                          + std::to_string(diag.rcond)
                          + "): check the velocity boundary conditions",
                      NullSpaceHint::InsufficientVelocityConstraints);

  Eigen::VectorXd x = lu.solve(system.rhs);
  const double bnorm = system.rhs.norm();
  auto residual = [&]
  {
    const double r = (system.rhs - system.matrix * x).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  diag.relative_residual = residual();
  while (diag.relative_residual > 1e-14 && diag.refinement_steps < 2)
  {
    x += lu.solve(system.rhs - system.matrix * x);
    ++diag.refinement_steps;
    diag.relative_residual = residual();
  }
  if (!(diag.relative_residual <= 1e-10))
    throw SolverError("relative residual "
                          + std::to_string(diag.relative_residual)
                          + " exceeds 1e-10",
                      NullSpaceHint::None);
  diag.status = "ok";

  StokesSolution s;
  s.velocity.values = x.head(system.n_u);
  s.pressure.values = x.segment(system.n_u, system.n_p);
  s.multiplier = system.n_lambda ? x[n - 1] : 0.0;
  s.diagnostics = diag;
  return s;
}

StokesSolution solve_stokes(const Mesh& mesh, const VectorFunction& f,
                            const BoundarySpec& bc,
                            const StokesOptions& options)
{
  const auto vdofs = build_velocity_dofs(mesh);
  const auto pdofs = build_pressure_dofs(mesh);
  const auto constraints = resolve_boundary(mesh, bc);

  if (options.divergence_form == FormKind::BConsistent)
    for (Index i = 0; i < vdofs.size(); ++i)
      if (vdofs.is_boundary(i) && !constraints.constrained[i])
        throw InvalidArgument(
            "the consistent divergence form requires Dirichlet data on every "
            "boundary midpoint; use the b-tilde form with natural boundaries");

  const SparseMatrix A = assemble_velocity_operator(
      mesh, vdofs, options.velocity_form, options.assembly);
  const SparseMatrix B = assemble_divergence_operator(
      mesh, vdofs, pdofs, options.divergence_form, options.assembly);
  const Eigen::VectorXd rhs = assemble_rhs(mesh, vdofs, f, options.assembly);

  std::optional<Eigen::VectorXd> mean;
  if (options.mean_constraint)
    mean = assemble_pressure_mean(mesh, pdofs);

  auto system = build_saddle_system(A, B, rhs, std::move(mean));
  system = apply_dirichlet(std::move(system), constraints);
  if (options.divergence_form == FormKind::BConsistent)
    system.rhs.segment(system.n_u, system.n_p)
        += assemble_boundary_flux(mesh, bc);
  return solve(system);
}

} // namespace rq1
