#pragma once

#include "rq1/spaces.hpp"

#include <Eigen/SparseCore>

namespace rq1
{

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Element kernels.
///  - Laplacian:   sum_T (grad v, grad w)_T, block diagonal in components
///  - Strain:      sum_T 2 (eps(v), eps(w))_T
///  - BConsistent: sum_T (div v, q)_T - (n.v, q)_dT = -sum_T (v, grad q)_T
///  - BTilde:      sum_T (div v, q)_T
/// The consistent form is evaluated through the volume identity only.
enum class FormKind
{
  Laplacian,
  Strain,
  BConsistent,
  BTilde,
};

enum class PressureGram
{
  Mass,
  Stiffness,
};

struct AssemblyOptions
{
  int quadrature_degree = 4;
  /// 0 selects assembly_threads().
  int threads = 0;
};

/// Thread cap from the RQ1_THREADS environment variable, default 1.
int assembly_threads();

/// Square operator on the velocity DOFs for Laplacian or Strain.
SparseMatrix assemble_velocity_operator(const Mesh& mesh,
                                        const VelocityDofMap& vdofs,
                                        FormKind kind,
                                        const AssemblyOptions& options = {});

/// Divergence operator B with rows = pressure DOFs and columns = velocity
/// DOFs, so that q^T B v = b(v, q).
SparseMatrix assemble_divergence_operator(const Mesh& mesh,
                                          const VelocityDofMap& vdofs,
                                          const PressureDofMap& pdofs,
                                          FormKind kind,
                                          const AssemblyOptions& options = {});

/// Load vector (f, phi_i e_a).
Eigen::VectorXd assemble_rhs(const Mesh& mesh, const VelocityDofMap& vdofs,
                             const VectorFunction& f,
                             const AssemblyOptions& options = {});

SparseMatrix assemble_pressure_gram(const Mesh& mesh,
                                    const PressureDofMap& pdofs,
                                    PressureGram weight,
                                    const AssemblyOptions& options = {});

/// Integrals of the pressure basis functions, m_i = (lambda_i, 1).
Eigen::VectorXd assemble_pressure_mean(const Mesh& mesh,
                                       const PressureDofMap& pdofs);

/// max |M - M^T| <= tol * max |M|.
bool is_symmetric(const SparseMatrix& m, double tol = 1e-12);

} // namespace rq1
