#pragma once

#include "rq1/common.hpp"

#include <array>
#include <vector>

namespace rq1
{

/// Conforming tetrahedral mesh with derived topology.
///
/// Constructed only through build_topology (directly or via a generator) and
/// immutable afterwards. Cells are stored with positive orientation relative
/// to the reference tetrahedron. Local face i of a cell is opposite local
/// vertex i; local edges follow element::reference_edges.
class Mesh
{
public:
  using Cell = std::array<Index, 4>;
  using Face = std::array<Index, 3>;
  using Edge = std::array<Index, 2>;

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  Index num_faces() const { return static_cast<Index>(faces_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<Vector3>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  /// Faces as sorted vertex triples.
  const std::vector<Face>& faces() const { return faces_; }
  /// Incident cells of each face; the second entry is -1 on the boundary.
  const std::vector<std::array<Index, 2>>& face_cells() const
  {
    return face_cells_;
  }
  /// Edges as (min vertex, max vertex).
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vector3>& edge_midpoints() const { return midpoints_; }
  const std::vector<std::array<Index, 4>>& cell_faces() const
  {
    return cell_faces_;
  }
  const std::vector<std::array<Index, 6>>& cell_edges() const
  {
    return cell_edges_;
  }

  bool is_boundary_face(Index f) const { return face_cells_[f][1] < 0; }
  bool is_boundary_edge(Index e) const { return boundary_edge_[e] != 0; }
  bool is_boundary_vertex(Index v) const { return boundary_vertex_[v] != 0; }

  Vector3 vertex(Index v) const { return vertices_[v]; }
  Vector3 centroid(Index cell) const;
  double volume(Index cell) const;
  double diameter(Index cell) const;

  /// Maximum cell diameter.
  double h() const { return h_; }

  /// Sum of cell volumes.
  double total_volume() const;

  friend Mesh build_topology(std::vector<Vector3> vertices,
                             std::vector<Cell> cells);

private:
  Mesh() = default;

  std::vector<Vector3> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<std::array<Index, 2>> face_cells_;
  std::vector<Edge> edges_;
  std::vector<Vector3> midpoints_;
  std::vector<std::array<Index, 4>> cell_faces_;
  std::vector<std::array<Index, 6>> cell_edges_;
  std::vector<char> boundary_edge_;
  std::vector<char> boundary_vertex_;
  double h_ = 0.0;
};

/// Derives faces, edges, midpoints and boundary flags. Negatively oriented
/// cells are flipped. Throws MeshInvalid on out-of-range indices, degenerate
/// or duplicate cells, and faces shared by more than two cells.
Mesh build_topology(std::vector<Vector3> vertices,
                    std::vector<Mesh::Cell> cells);

/// Structured mesh of (0,ex)x(0,ey)x(0,ez). Every sub-box is split into six
/// Kuhn tetrahedra around a main diagonal. The diagonal of each box ends at
/// the box corner nearest the centre of the domain, so with at least two
/// boxes per direction every cell has a vertex and three edges in the
/// interior. Neighbouring boxes still induce matching face diagonals.
Mesh generate_box_mesh(const std::array<double, 3>& extent,
                       const std::array<int, 3>& subdivisions);

/// Ball of the given radius centred at the origin: a Kuhn-subdivided cube
/// [-1,1]^3 with 2^(refinement+1) boxes per direction, mapped radially so that
/// the cube surface lands on the sphere.
Mesh generate_ball_mesh(double radius, int refinement);

/// Affine map x = A x^ + x_T from the reference tetrahedron onto a cell.
struct AffineMap
{
  Matrix3 matrix;
  Vector3 translation;
  double det = 0.0;
  Matrix3 inverse_transpose;

  Vector3 apply(const Vector3& xhat) const
  {
    return matrix * xhat + translation;
  }
  Vector3 pullback(const Vector3& x) const
  {
    return inverse_transpose.transpose() * (x - translation);
  }
};

AffineMap affine_map(const Mesh& mesh, Index cell);

struct InternalEdgeReport
{
  /// Every cell has at least three edges that are not on the boundary.
  bool passed = true;
  std::vector<Index> offending_cells;
  /// Every cell's internal edges contain three linearly independent tangents.
  bool tangents_span = true;
  std::vector<Index> cells_without_spanning_tangents;
};

InternalEdgeReport check_internal_edge_assumption(const Mesh& mesh);

} // namespace rq1
