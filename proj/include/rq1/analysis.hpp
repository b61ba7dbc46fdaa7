#pragma once

#include "rq1/system.hpp"

#include <iosfwd>
#include <limits>
#include <string>

namespace rq1
{

/// Exact Stokes solution with matching body force.
struct ManufacturedCase
{
  std::string name;
  VectorFunction velocity;
  std::function<Matrix3(const Vector3&)> velocity_gradient;
  ScalarFunction pressure;
  VectorFunction force;
};

/// u = (x2^3 - x3^3, x1^3 - x3^3, -x1^3 - x2^3), p = 6(x1x2 - x1x3 - x2x3),
/// f = 0.
ManufacturedCase cubic_case();

/// Divergence-free affine velocity with p = 0 and f = 0; reproduced exactly
/// by the discretisation.
ManufacturedCase affine_case();

/// Affine velocity with a linear pressure, f = grad p.
ManufacturedCase affine_linear_pressure_case();

/// Largest residual of -lap u + grad p - f and div u at the sample points,
/// from central differences of the supplied gradient.
double manufactured_residual(const ManufacturedCase& c,
                             const std::vector<Vector3>& points);

struct ErrorNorms
{
  double l2_velocity = 0.0;
  double h1_velocity = 0.0;
  /// L2 error of the pressure modulo constants.
  double l2_pressure = 0.0;
};

/// Cell-wise quadrature (exact to degree 7) of the velocity L2, broken H1
/// seminorm and pressure L2 errors.
ErrorNorms error_norms(const Mesh& mesh, const VelocityField& u,
                       const PressureField& p, const ManufacturedCase& c);

/// L2 error of the pressure modulo constants on the boundary surface.
double boundary_pressure_error(const Mesh& mesh, const PressureField& p,
                               const ManufacturedCase& c);

/// (||v||_{a_h}^2 + ||q||^2 + h^2 ||grad q||^2)^{1/2} from assembled Gram
/// matrices.
double triple_norm(const Mesh& mesh, const VelocityField& v,
                   const PressureField& q);

/// Dirichlet solve with the exact velocity as boundary data and a zero-mean
/// pressure multiplier.
StokesSolution solve_manufactured(const Mesh& mesh, const ManufacturedCase& c,
                                  FormKind velocity_form,
                                  FormKind divergence_form,
                                  const AssemblyOptions& assembly = {});

struct InfSupEstimate
{
  double beta = 0.0;
  double h = 0.0;
  Index free_velocity_dofs = 0;
  Index pressure_dofs = 0;
};

/// Discrete inf-sup constant: beta_h^2 is the smallest eigenvalue of
/// B A^{-1} B^T q = mu (M + h^2 K) q over zero-mean pressures, with A the
/// Laplacian on the interior velocity DOFs. Dense in the pressure space.
/// Throws InvalidArgument if the mesh violates the internal edge assumption.
InfSupEstimate estimate_infsup(const Mesh& mesh, FormKind form);

struct KornEstimate
{
  double alpha = 0.0;
  Index dofs = 0;
  /// Eigenvector of alpha over all velocity DOFs; only filled without
  /// boundary conditions.
  Eigen::VectorXd mode;
};

/// Smallest generalised eigenvalue of the strain form against the Laplacian.
/// With homogeneous Dirichlet conditions the problem is posed on the
/// interior DOFs; without, on the complement of the constant fields.
/// Dense; throws InvalidArgument above 5000 DOFs.
KornEstimate estimate_korn(const Mesh& mesh, bool dirichlet = true);
std::vector<double> estimate_korn(const std::vector<Mesh>& meshes);

inline constexpr Index dense_dof_limit = 5000;

struct CandidateOptions
{
  /// Factor in front of (t_E . grad q) t_E; defaults to -h^2.
  std::optional<double> scale;
  bool include_boundary_edges = false;
};

/// v* = sum_E scale (t_E . grad q(x_E)) t_E phi_E over interior edges, with
/// grad q averaged over the cells containing E (its tangential part is
/// single valued).
VelocityField verfurth_candidate(const Mesh& mesh, const PressureField& q,
                                 const CandidateOptions& options = {});

struct ReferenceConstants
{
  double bulk = 4.0 / 9.0;
  double boundary = 4.0 / 15.0;
  double combined = 8.0 / 45.0;
};

struct ReferenceEdgeTerms
{
  double tangent_dot_b = 0.0;
  double bulk = 0.0;
  double boundary = 0.0;
  double total = 0.0;
};

struct ReferenceConstantsReport
{
  std::array<ReferenceEdgeTerms, 6> edges;
  /// (div v*, q) on the reference cell for v* = -sum (t_E.b) t_E phi_E.
  double divergence_pairing = 0.0;
  double bulk_deviation = 0.0;
  double boundary_deviation = 0.0;
  double total_deviation = 0.0;
  /// |divergence_pairing - combined * sum (t_E.b)^2|.
  double pairing_deviation = 0.0;

  double max_deviation() const;
};

/// Evaluates, on the reference tetrahedron with q = b.x, the per-edge bulk
/// term (t.b)^2 int phi_E, the boundary term (t.b) int_dT (n.t) phi_E (b.x),
/// and their difference, and compares them with the closed forms.
ReferenceConstantsReport verify_reference_constants(const Vector3& b,
                                         const ReferenceConstants& k = {});

struct FaceJacobianReport
{
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_difference = 0.0;
};

/// Compares (n.t_E) |F|/|F^| from the physical geometry with
/// |T|/|T^| (n^.t^_E) / |A t^_E| from the reference geometry and the affine
/// map. Edge and face are global indices; both must belong to the cell.
FaceJacobianReport verify_face_jacobian_identity(const Mesh& mesh, Index cell,
                                                 Index edge, Index face);

struct ConvergenceRow
{
  double h = 0.0;
  Index ndof_u = 0;
  Index ndof_p = 0;
  ErrorNorms errors;
  double boundary_pressure_error = 0.0;
  double seconds = 0.0;
  /// Slopes against the previous row; NaN on the first row.
  double slope_l2_velocity = std::numeric_limits<double>::quiet_NaN();
  double slope_h1_velocity = std::numeric_limits<double>::quiet_NaN();
  double slope_l2_pressure = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable
{
  std::vector<ConvergenceRow> rows;
  /// Set when a level failed; rows holds the completed levels.
  std::string failure;
};

/// Solves each mesh with exact-solution Dirichlet data and records errors
/// and log-log slopes between consecutive levels. Needs at least 3 meshes.
ConvergenceTable run_convergence_study(const ManufacturedCase& c,
                                       const std::vector<Mesh>& meshes,
                                       FormKind velocity_form,
                                       FormKind divergence_form,
                                       bool record_time = true);

/// CSV with header h,ndof_u,ndof_p,eL2u,eH1u,eL2p,slope_eL2u,slope_eH1u,
/// slope_eL2p,seconds and 17 significant digits.
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);

/// Rate targets of the convergence gate on the finest pair.
struct RateThresholds
{
  double l2_velocity = 2.0;
  double l2_velocity_tol = 0.25;
  double h1_velocity = 1.0;
  double h1_velocity_tol = 0.2;
  double l2_pressure_min = 1.3;
};

bool meets_rate_thresholds(const ConvergenceTable& table,
                           const RateThresholds& t = {});

struct PoiseuilleResult
{
  Mesh mesh;
  StokesSolution solution;
  double inflow = 0.0;
  double outflow = 0.0;
  /// |inflow - outflow| / |inflow|.
  double flux_imbalance = 0.0;
  /// max |u(x) - R u(R x)| / max |u| for the mirror R about x2 = 1/2.
  double symmetry_defect = 0.0;
  std::vector<double> strip_pressure;
  bool pressure_decreasing = false;
  double pressure_integral = 0.0;
};

/// Channel (0,3)x(0,1)x(0,1/10) with u = (x2(1-x2),0,0) at x1 = 0, x2 = 0 and
/// x2 = 1, u3 = 0 at x3 = 0 and x3 = 1/10, natural outflow at x1 = 3, and the
/// b-tilde divergence form without a mean constraint.
PoiseuilleResult run_poiseuille(FormKind velocity_form,
                                const std::array<int, 3>& subdivisions
                                = {36, 12, 2},
                                int strips = 12);

BoundarySpec poiseuille_boundary();

} // namespace rq1
