#include "rq1/assembly.hpp"
#include "rq1/element.hpp"
#include "rq1/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace rq1
{

namespace
{

// Reference basis data at the points of a volume rule.
struct Tabulation
{
  QuadratureRule rule;
  std::vector<std::array<double, 6>> phi;
  std::vector<std::array<Vector3, 6>> dphi;
  std::vector<std::array<double, 4>> lambda;

  explicit Tabulation(int degree) : rule(volume_quadrature(degree))
  {
    for (const auto& x : rule.points)
    {
      phi.push_back(element::eval_basis(x));
      dphi.push_back(element::eval_basis_grad(x));
      lambda.push_back(element::eval_p1_basis(x));
    }
  }
};

int resolve_threads(const AssemblyOptions& options)
{
  return options.threads > 0 ? options.threads : assembly_threads();
}

// Computes element blocks of size nr x nc for every cell, possibly in
// parallel, and merges them in cell order so the result does not depend on
// the thread count.
template <class Kernel>
SparseMatrix assemble_blocks(const Mesh& mesh, Index global_rows,
                             Index global_cols, int nr, int nc, int threads,
                             const Kernel& kernel)
{
  const auto ncells = static_cast<std::size_t>(mesh.num_cells());
  std::vector<Index> rows(ncells * nr);
  std::vector<Index> cols(ncells * nc);
  std::vector<double> values(ncells * nr * nc);

  auto work = [&](std::size_t begin, std::size_t end)
  {
    for (std::size_t c = begin; c < end; ++c)
      kernel(static_cast<Index>(c), rows.data() + c * nr,
             cols.data() + c * nc, values.data() + c * nr * nc);
  };

  const auto nthreads
      = std::clamp<std::size_t>(static_cast<std::size_t>(threads), 1,
                                std::max<std::size_t>(ncells, 1));
  if (nthreads == 1)
    work(0, ncells);
  else
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (ncells + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t)
    {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(ncells, begin + chunk);
      if (begin < end)
        pool.emplace_back(work, begin, end);
    }
  }

  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(values.size());
  for (std::size_t c = 0; c < ncells; ++c)
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j)
        triplets.emplace_back(rows[c * nr + i], cols[c * nc + j],
                              values[(c * nr + i) * nc + j]);

  SparseMatrix m(global_rows, global_cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

} // namespace

int assembly_threads()
{
  const char* env = std::getenv("RQ1_THREADS");
  if (env == nullptr)
    return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || n < 1)
    return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

SparseMatrix assemble_velocity_operator(const Mesh& mesh,
                                        const VelocityDofMap& vdofs,
                                        FormKind kind,
                                        const AssemblyOptions& options)
{
  if (kind != FormKind::Laplacian && kind != FormKind::Strain)
    throw InvalidArgument("velocity operator must be Laplacian or Strain");

  const Tabulation tab(options.quadrature_degree);
  const bool strain = kind == FormKind::Strain;

  auto kernel = [&](Index cell, Index* rows, Index* cols, double* values)
  {
    const AffineMap map = affine_map(mesh, cell);
    const double det = std::abs(map.det);
    for (int e = 0; e < 6; ++e)
      for (int a = 0; a < 3; ++a)
        rows[3 * e + a] = cols[3 * e + a] = vdofs.global(cell, e, a);
    std::fill(values, values + 18 * 18, 0.0);

    for (std::size_t q = 0; q < tab.rule.size(); ++q)
    {
      const double w = tab.rule.weights[q] * det;
      std::array<Vector3, 6> g;
      for (int e = 0; e < 6; ++e)
        g[e] = map.inverse_transpose * tab.dphi[q][element::edge_basis(e)];
      for (int e = 0; e < 6; ++e)
        for (int f = 0; f < 6; ++f)
        {
          const double gg = w * g[e].dot(g[f]);
          for (int a = 0; a < 3; ++a)
          {
            values[(3 * e + a) * 18 + 3 * f + a] += gg;
            if (strain)
              for (int b = 0; b < 3; ++b)
                values[(3 * e + a) * 18 + 3 * f + b]
                    += w * g[e][b] * g[f][a];
          }
        }
    }
  };
  return assemble_blocks(mesh, vdofs.size(), vdofs.size(), 18, 18,
                         resolve_threads(options), kernel);
}

SparseMatrix assemble_divergence_operator(const Mesh& mesh,
                                          const VelocityDofMap& vdofs,
                                          const PressureDofMap& pdofs,
                                          FormKind kind,
                                          const AssemblyOptions& options)
{
  if (kind != FormKind::BConsistent && kind != FormKind::BTilde)
    throw InvalidArgument(
        "divergence operator must be BConsistent or BTilde");

  const Tabulation tab(options.quadrature_degree);
  const bool consistent = kind == FormKind::BConsistent;

  auto kernel = [&](Index cell, Index* rows, Index* cols, double* values)
  {
    const AffineMap map = affine_map(mesh, cell);
    const double det = std::abs(map.det);
    for (int k = 0; k < 4; ++k)
      rows[k] = pdofs.global(cell, k);
    for (int e = 0; e < 6; ++e)
      for (int a = 0; a < 3; ++a)
        cols[3 * e + a] = vdofs.global(cell, e, a);
    std::fill(values, values + 4 * 18, 0.0);

    std::array<Vector3, 4> grad_lambda;
    for (int k = 0; k < 4; ++k)
      grad_lambda[k] = map.inverse_transpose * element::p1_basis_grad()[k];

    for (std::size_t q = 0; q < tab.rule.size(); ++q)
    {
      const double w = tab.rule.weights[q] * det;
      for (int e = 0; e < 6; ++e)
      {
        const int i = element::edge_basis(e);
        if (consistent)
        {
          for (int k = 0; k < 4; ++k)
            for (int a = 0; a < 3; ++a)
              values[k * 18 + 3 * e + a]
                  -= w * tab.phi[q][i] * grad_lambda[k][a];
        }
        else
        {
          const Vector3 g = map.inverse_transpose * tab.dphi[q][i];
          for (int k = 0; k < 4; ++k)
            for (int a = 0; a < 3; ++a)
              values[k * 18 + 3 * e + a] += w * g[a] * tab.lambda[q][k];
        }
      }
    }
  };
  return assemble_blocks(mesh, pdofs.size(), vdofs.size(), 4, 18,
                         resolve_threads(options), kernel);
}

Eigen::VectorXd assemble_rhs(const Mesh& mesh, const VelocityDofMap& vdofs,
                             const VectorFunction& f,
                             const AssemblyOptions& options)
{
  const Tabulation tab(options.quadrature_degree);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(vdofs.size());
  for (Index cell = 0; cell < mesh.num_cells(); ++cell)
  {
    const AffineMap map = affine_map(mesh, cell);
    const double det = std::abs(map.det);
    for (std::size_t q = 0; q < tab.rule.size(); ++q)
    {
      const Vector3 fq
          = tab.rule.weights[q] * det * f(map.apply(tab.rule.points[q]));
      for (int e = 0; e < 6; ++e)
      {
        const double phi = tab.phi[q][element::edge_basis(e)];
        for (int a = 0; a < 3; ++a)
          rhs[vdofs.global(cell, e, a)] += phi * fq[a];
      }
    }
  }
  return rhs;
}

SparseMatrix assemble_pressure_gram(const Mesh& mesh,
                                    const PressureDofMap& pdofs,
                                    PressureGram weight,
                                    const AssemblyOptions& options)
{
  const Tabulation tab(std::max(2, std::min(options.quadrature_degree, 8)));
  const bool mass = weight == PressureGram::Mass;

  auto kernel = [&](Index cell, Index* rows, Index* cols, double* values)
  {
    const AffineMap map = affine_map(mesh, cell);
    const double det = std::abs(map.det);
    for (int k = 0; k < 4; ++k)
      rows[k] = cols[k] = pdofs.global(cell, k);
    std::fill(values, values + 16, 0.0);
    if (mass)
    {
      for (std::size_t q = 0; q < tab.rule.size(); ++q)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            values[4 * k + l] += tab.rule.weights[q] * det
                                 * tab.lambda[q][k] * tab.lambda[q][l];
    }
    else
    {
      const double vol = det * element::reference_volume;
      std::array<Vector3, 4> g;
      for (int k = 0; k < 4; ++k)
        g[k] = map.inverse_transpose * element::p1_basis_grad()[k];
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          values[4 * k + l] = vol * g[k].dot(g[l]);
    }
  };
  return assemble_blocks(mesh, pdofs.size(), pdofs.size(), 4, 4,
                         resolve_threads(options), kernel);
}

Eigen::VectorXd assemble_pressure_mean(const Mesh& mesh,
                                       const PressureDofMap& pdofs)
{
  Eigen::VectorXd m = Eigen::VectorXd::Zero(pdofs.size());
  for (Index cell = 0; cell < mesh.num_cells(); ++cell)
  {
    const double quarter = 0.25 * mesh.volume(cell);
    for (int k = 0; k < 4; ++k)
      m[pdofs.global(cell, k)] += quarter;
  }
  return m;
}

bool is_symmetric(const SparseMatrix& m, double tol)
{
  if (m.rows() != m.cols())
    return false;
  const SparseMatrix t = m.transpose();
  const SparseMatrix d = m - t;
  double dmax = 0.0;
  double mmax = 0.0;
  for (Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it)
      dmax = std::max(dmax, std::abs(it.value()));
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      mmax = std::max(mmax, std::abs(it.value()));
  return dmax <= tol * mmax;
}

} // namespace rq1
