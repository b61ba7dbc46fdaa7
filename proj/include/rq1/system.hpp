#pragma once

#include "rq1/assembly.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace rq1
{

/// Dirichlet data on edge midpoints, per velocity component.
struct BoundaryRegion
{
  /// Midpoint selector; an empty predicate selects every boundary midpoint.
  std::function<bool(const Vector3&)> contains;
  std::array<bool, 3> components{true, true, true};
  VectorFunction value;
};

struct BoundarySpec
{
  std::vector<BoundaryRegion> regions;
};

/// Whole boundary, all components, prescribed by g.
BoundarySpec dirichlet_everywhere(VectorFunction g);

/// Continuity-equation load r_k = (n.g, lambda_k) over the boundary, with g
/// taken from the first region selecting each boundary face. The consistent
/// form b(v, q) = -(v, grad q) differs from (div v, q) by exactly this term,
/// so it is needed whenever the boundary data has a normal component.
Eigen::VectorXd assemble_boundary_flux(const Mesh& mesh,
                                       const BoundarySpec& spec);

/// Resolved constraints: a mask and a value for every velocity DOF.
struct DirichletValues
{
  std::vector<char> constrained;
  Eigen::VectorXd values;

  Index count() const;
};

/// Evaluates a BoundarySpec on the mesh midpoints. Throws InvalidArgument if
/// a region selects an interior midpoint or two regions prescribe different
/// values (beyond 1e-10) for the same DOF.
DirichletValues resolve_boundary(const Mesh& mesh, const BoundarySpec& spec);

/// Bordered symmetric system
///
///   [  A   -B^T  0 ] [u]   [f]
///   [ -B    0    m ] [p] = [0]
///   [  0   m^T   0 ] [l]   [0]
///
/// whose first row is a_h(u, v) - b(v, p) = (f, v) and whose second row is
/// b(u, q) = 0 up to the multiplier for constants. The last row and column
/// are present only with the mean constraint.
struct SaddleSystem
{
  SparseMatrix A;
  SparseMatrix B;
  std::optional<Eigen::VectorXd> mean_weights;

  SparseMatrix matrix;
  Eigen::VectorXd rhs;

  Index n_u = 0;
  Index n_p = 0;
  Index n_lambda = 0;

  /// Velocity constraints applied so far.
  std::vector<char> constrained;
  Eigen::VectorXd prescribed;

  Index size() const { return n_u + n_p + n_lambda; }
};

SaddleSystem build_saddle_system(const SparseMatrix& A, const SparseMatrix& B,
                                 const Eigen::VectorXd& f,
                                 std::optional<Eigen::VectorXd> mean_weights);

/// Symmetric elimination: constrained rows and columns become identity and
/// the prescribed values move to the right-hand side.
SaddleSystem apply_dirichlet(SaddleSystem system,
                             const DirichletValues& constraints);
SaddleSystem apply_dirichlet(SaddleSystem system, const Mesh& mesh,
                             const BoundarySpec& spec);

enum class NullSpaceHint
{
  None,
  ConstantPressure,
  InsufficientVelocityConstraints,
};

std::string to_string(NullSpaceHint hint);

class SolverError : public Error
{
public:
  SolverError(const std::string& what, NullSpaceHint hint)
      : Error(what), hint_(hint)
  {
  }
  NullSpaceHint hint() const noexcept { return hint_; }

private:
  NullSpaceHint hint_;
};

struct SolverDiagnostics
{
  Index n_u = 0;
  Index n_p = 0;
  Index n_lambda = 0;
  Index nonzeros = 0;
  Index constrained = 0;
  double relative_residual = 0.0;
  int refinement_steps = 0;
  /// Pivot summary from the LU factorisation.
  double rcond = 0.0;
  double pivot_min = 0.0;
  double pivot_max = 0.0;
  std::string status;
};

/// key=value lines, one per field.
void write_diagnostics(std::ostream& out, const SolverDiagnostics& d);

struct StokesSolution
{
  VelocityField velocity;
  PressureField pressure;
  double multiplier = 0.0;
  SolverDiagnostics diagnostics;
};

/// Sparse LU (UMFPACK) with up to two steps of iterative refinement. Throws
/// SolverError for singular systems or a relative residual above 1e-10.
StokesSolution solve(const SaddleSystem& system);

struct StokesOptions
{
  FormKind velocity_form = FormKind::Laplacian;
  FormKind divergence_form = FormKind::BConsistent;
  bool mean_constraint = true;
  AssemblyOptions assembly;
};

/// Assembles, constrains and solves the discrete Stokes problem. The
/// consistent divergence form is rejected if any boundary DOF is left
/// unconstrained, since it assumes the element boundary terms vanish; with
/// it, the boundary flux load is added to the continuity equation.
StokesSolution solve_stokes(const Mesh& mesh, const VectorFunction& f,
                            const BoundarySpec& bc,
                            const StokesOptions& options);

} // namespace rq1
