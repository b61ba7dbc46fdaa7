#include "rq1/spaces.hpp"
#include "rq1/element.hpp"

namespace rq1
{

VelocityDofMap::VelocityDofMap(const Mesh& mesh)
    : num_edges_(mesh.num_edges()), cell_edges_(mesh.cell_edges()),
      boundary_(mesh.num_edges())
{
  for (Index e = 0; e < num_edges_; ++e)
    boundary_[e] = mesh.is_boundary_edge(e) ? 1 : 0;
}

PressureDofMap::PressureDofMap(const Mesh& mesh)
    : num_vertices_(mesh.num_vertices()), cells_(mesh.cells())
{
}

VelocityDofMap build_velocity_dofs(const Mesh& mesh)
{
  return VelocityDofMap(mesh);
}

PressureDofMap build_pressure_dofs(const Mesh& mesh)
{
  return PressureDofMap(mesh);
}

VelocityField interpolate_at_midpoints(const Mesh& mesh,
                                       const VectorFunction& field)
{
  VelocityField v{Eigen::VectorXd(3 * mesh.num_edges())};
  for (Index e = 0; e < mesh.num_edges(); ++e)
    v.values.segment<3>(3 * e) = field(mesh.edge_midpoints()[e]);
  return v;
}

PressureField interpolate_at_vertices(const Mesh& mesh,
                                      const ScalarFunction& field)
{
  PressureField p{Eigen::VectorXd(mesh.num_vertices())};
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    p.values[v] = field(mesh.vertex(v));
  return p;
}

Vector3 evaluate_reference(const Mesh& mesh, const VelocityField& field,
                           Index cell, const Vector3& xhat)
{
  const auto phi = element::eval_basis(xhat);
  Vector3 value = Vector3::Zero();
  for (int e = 0; e < 6; ++e)
  {
    const Index edge = mesh.cell_edges()[cell][e];
    value += phi[element::edge_basis(e)] * field.values.segment<3>(3 * edge);
  }
  return value;
}

double evaluate_reference(const Mesh& mesh, const PressureField& field,
                          Index cell, const Vector3& xhat)
{
  const auto lambda = element::eval_p1_basis(xhat);
  double value = 0.0;
  for (int i = 0; i < 4; ++i)
    value += lambda[i] * field.values[mesh.cells()[cell][i]];
  return value;
}

Matrix3 gradient_reference(const Mesh& mesh, const VelocityField& field,
                           Index cell, const Vector3& xhat)
{
  const AffineMap map = affine_map(mesh, cell);
  const auto grads = element::eval_basis_grad(xhat);
  Matrix3 g = Matrix3::Zero();
  for (int e = 0; e < 6; ++e)
  {
    const Index edge = mesh.cell_edges()[cell][e];
    const Vector3 dphi
        = map.inverse_transpose * grads[element::edge_basis(e)];
    g += field.values.segment<3>(3 * edge) * dphi.transpose();
  }
  return g;
}

Vector3 gradient(const Mesh& mesh, const PressureField& field, Index cell)
{
  const AffineMap map = affine_map(mesh, cell);
  Vector3 g = Vector3::Zero();
  for (int i = 0; i < 4; ++i)
    g += field.values[mesh.cells()[cell][i]]
         * (map.inverse_transpose * element::p1_basis_grad()[i]);
  return g;
}

std::array<double, 4> barycentric(const Mesh& mesh, Index cell,
                                  const Vector3& x)
{
  const AffineMap map = affine_map(mesh, cell);
  return element::eval_p1_basis(map.pullback(x));
}

namespace
{

Vector3 checked_pullback(const Mesh& mesh, Index cell, const Vector3& x)
{
  const AffineMap map = affine_map(mesh, cell);
  const Vector3 xhat = map.pullback(x);
  for (double l : element::eval_p1_basis(xhat))
    if (l < -1e-10)
      throw OutOfCell("point is outside cell " + std::to_string(cell));
  return xhat;
}

} // namespace

Vector3 evaluate_field(const Mesh& mesh, const VelocityField& field,
                       Index cell, const Vector3& x)
{
  return evaluate_reference(mesh, field, cell,
                            checked_pullback(mesh, cell, x));
}

double evaluate_field(const Mesh& mesh, const PressureField& field, Index cell,
                      const Vector3& x)
{
  return evaluate_reference(mesh, field, cell,
                            checked_pullback(mesh, cell, x));
}

} // namespace rq1
