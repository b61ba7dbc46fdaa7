#pragma once

#include "rq1/mesh.hpp"

#include <array>
#include <functional>
#include <vector>

namespace rq1
{

/// Velocity degrees of freedom: three scalar values at every edge midpoint,
/// numbered edge-major, component-minor (dof = 3 * edge + component). Edges
/// shared by several cells share their DOFs, which is the midpoint coupling
/// of the nonconforming space.
class VelocityDofMap
{
public:
  explicit VelocityDofMap(const Mesh& mesh);

  Index size() const { return 3 * num_edges_; }
  Index num_edges() const { return num_edges_; }

  Index global(Index cell, int local_edge, int component) const
  {
    return 3 * cell_edges_[cell][local_edge] + component;
  }
  static Index edge_of(Index dof) { return dof / 3; }
  static int component_of(Index dof) { return static_cast<int>(dof % 3); }

  bool is_boundary(Index dof) const { return boundary_[dof / 3] != 0; }

private:
  Index num_edges_;
  std::vector<std::array<Index, 6>> cell_edges_;
  std::vector<char> boundary_;
};

/// Continuous P1 pressure: one DOF per vertex.
class PressureDofMap
{
public:
  explicit PressureDofMap(const Mesh& mesh);

  Index size() const { return num_vertices_; }
  Index global(Index cell, int local_vertex) const
  {
    return cells_[cell][local_vertex];
  }

private:
  Index num_vertices_;
  std::vector<Mesh::Cell> cells_;
};

VelocityDofMap build_velocity_dofs(const Mesh& mesh);
PressureDofMap build_pressure_dofs(const Mesh& mesh);

/// Coefficients of a discrete velocity, laid out as in VelocityDofMap.
struct VelocityField
{
  Eigen::VectorXd values;
};

/// Vertex values of a continuous piecewise linear pressure.
struct PressureField
{
  Eigen::VectorXd values;
};

using VectorFunction = std::function<Vector3(const Vector3&)>;
using ScalarFunction = std::function<double(const Vector3&)>;

/// Samples a vector field at the edge midpoints.
VelocityField interpolate_at_midpoints(const Mesh& mesh,
                                       const VectorFunction& field);

/// Samples a scalar field at the vertices.
PressureField interpolate_at_vertices(const Mesh& mesh,
                                      const ScalarFunction& field);

/// Value of the field at a reference point of a cell.
Vector3 evaluate_reference(const Mesh& mesh, const VelocityField& field,
                           Index cell, const Vector3& xhat);
double evaluate_reference(const Mesh& mesh, const PressureField& field,
                          Index cell, const Vector3& xhat);

/// Physical gradient (rows = components) at a reference point of a cell.
Matrix3 gradient_reference(const Mesh& mesh, const VelocityField& field,
                           Index cell, const Vector3& xhat);
Vector3 gradient(const Mesh& mesh, const PressureField& field, Index cell);

/// Barycentric coordinates of a physical point with respect to a cell.
std::array<double, 4> barycentric(const Mesh& mesh, Index cell,
                                  const Vector3& x);

/// Field value at a physical point, pulled back to the reference cell.
/// Throws OutOfCell if a barycentric coordinate is below -1e-10.
Vector3 evaluate_field(const Mesh& mesh, const VelocityField& field,
                       Index cell, const Vector3& x);
double evaluate_field(const Mesh& mesh, const PressureField& field, Index cell,
                      const Vector3& x);

} // namespace rq1
