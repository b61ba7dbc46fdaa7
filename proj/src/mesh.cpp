#include "rq1/mesh.hpp"
#include "rq1/element.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rq1
{

namespace
{

double signed_volume6(const Vector3& a, const Vector3& b, const Vector3& c,
                      const Vector3& d)
{
  return (b - a).cross(c - a).dot(d - a);
}

double max_edge_length(const std::array<Vector3, 4>& x)
{
  double h = 0.0;
  for (const auto& e : element::reference_edges)
    h = std::max(h, (x[e[1]] - x[e[0]]).norm());
  return h;
}

// Groups sorted keys; returns for each entry the index of its group.
template <std::size_t N>
std::vector<Index> number_entities(const std::vector<std::array<Index, N>>& keys,
                                   std::vector<std::array<Index, N>>& unique)
{
  std::vector<Index> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return keys[a] < keys[b]; });
  std::vector<Index> id(keys.size());
  unique.clear();
  for (std::size_t i = 0; i < order.size(); ++i)
  {
    if (i == 0 || keys[order[i]] != keys[order[i - 1]])
      unique.push_back(keys[order[i]]);
    id[order[i]] = static_cast<Index>(unique.size() - 1);
  }
  return id;
}

} // namespace

Vector3 Mesh::centroid(Index cell) const
{
  const auto& c = cells_[cell];
  return 0.25
         * (vertices_[c[0]] + vertices_[c[1]] + vertices_[c[2]]
            + vertices_[c[3]]);
}

double Mesh::volume(Index cell) const
{
  const auto& c = cells_[cell];
  return std::abs(signed_volume6(vertices_[c[0]], vertices_[c[1]],
                                 vertices_[c[2]], vertices_[c[3]]))
         / 6.0;
}

double Mesh::diameter(Index cell) const
{
  const auto& c = cells_[cell];
  return max_edge_length(
      {vertices_[c[0]], vertices_[c[1]], vertices_[c[2]], vertices_[c[3]]});
}

double Mesh::total_volume() const
{
  double v = 0.0;
  for (Index c = 0; c < num_cells(); ++c)
    v += volume(c);
  return v;
}

Mesh build_topology(std::vector<Vector3> vertices,
                    std::vector<Mesh::Cell> cells)
{
  const auto nv = static_cast<Index>(vertices.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    auto& cell = cells[c];
    for (Index v : cell)
      if (v < 0 || v >= nv)
        throw MeshInvalid("cell " + std::to_string(c)
                          + " references vertex " + std::to_string(v)
                          + " out of range");
    std::array<Vector3, 4> x{vertices[cell[0]], vertices[cell[1]],
                             vertices[cell[2]], vertices[cell[3]]};
    const double vol6 = signed_volume6(x[0], x[1], x[2], x[3]);
    const double scale = max_edge_length(x);
    if (!(std::abs(vol6) > 1e-14 * scale * scale * scale))
      throw MeshInvalid("cell " + std::to_string(c) + " is degenerate");
    if (vol6 < 0.0)
      std::swap(cell[2], cell[3]);
  }

  {
    std::vector<Mesh::Cell> sorted = cells;
    for (auto& s : sorted)
      std::sort(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
      throw MeshInvalid("duplicate cell with vertices "
                        + std::to_string((*dup)[0]) + " "
                        + std::to_string((*dup)[1]) + " "
                        + std::to_string((*dup)[2]) + " "
                        + std::to_string((*dup)[3]));
  }

  Mesh mesh;
  const auto nc = cells.size();

  std::vector<Mesh::Face> face_keys;
  face_keys.reserve(4 * nc);
  for (const auto& cell : cells)
    for (const auto& f : element::reference_faces)
    {
      Mesh::Face key{cell[f[0]], cell[f[1]], cell[f[2]]};
      std::sort(key.begin(), key.end());
      face_keys.push_back(key);
    }
  const auto face_id = number_entities(face_keys, mesh.faces_);

  std::vector<Mesh::Edge> edge_keys;
  edge_keys.reserve(6 * nc);
  for (const auto& cell : cells)
    for (const auto& e : element::reference_edges)
      edge_keys.push_back({std::min(cell[e[0]], cell[e[1]]),
                           std::max(cell[e[0]], cell[e[1]])});
  const auto edge_id = number_entities(edge_keys, mesh.edges_);

  mesh.face_cells_.assign(mesh.faces_.size(), {-1, -1});
  mesh.cell_faces_.resize(nc);
  mesh.cell_edges_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c)
  {
    for (int i = 0; i < 4; ++i)
    {
      const Index f = face_id[4 * c + i];
      mesh.cell_faces_[c][i] = f;
      auto& fc = mesh.face_cells_[f];
      if (fc[0] < 0)
        fc[0] = static_cast<Index>(c);
      else if (fc[1] < 0)
        fc[1] = static_cast<Index>(c);
      else
        throw MeshInvalid("face " + std::to_string(f)
                          + " has more than two incident cells");
    }
    for (int e = 0; e < 6; ++e)
      mesh.cell_edges_[c][e] = edge_id[6 * c + e];
  }

  mesh.midpoints_.reserve(mesh.edges_.size());
  for (const auto& e : mesh.edges_)
    mesh.midpoints_.push_back(0.5 * (vertices[e[0]] + vertices[e[1]]));

  mesh.boundary_edge_.assign(mesh.edges_.size(), 0);
  mesh.boundary_vertex_.assign(vertices.size(), 0);
  for (std::size_t f = 0; f < mesh.faces_.size(); ++f)
  {
    if (mesh.face_cells_[f][1] >= 0)
      continue;
    const Index c = mesh.face_cells_[f][0];
    int local = 0;
    while (mesh.cell_faces_[c][local] != static_cast<Index>(f))
      ++local;
    // Edges of the face are the cell edges not touching the opposite vertex.
    for (int e = 0; e < 6; ++e)
    {
      const auto& re = element::reference_edges[e];
      if (re[0] != local && re[1] != local)
        mesh.boundary_edge_[mesh.cell_edges_[c][e]] = 1;
    }
    for (Index v : mesh.faces_[f])
      mesh.boundary_vertex_[v] = 1;
  }

  mesh.vertices_ = std::move(vertices);
  mesh.cells_ = std::move(cells);
  for (Index c = 0; c < mesh.num_cells(); ++c)
    mesh.h_ = std::max(mesh.h_, mesh.diameter(c));
  return mesh;
}

namespace
{

// Six Kuhn tetrahedra of a unit box, as paths 0 -> e_a -> e_a + e_b -> 7
// through the corner bit patterns (bit d set = upper side in axis d).
std::vector<std::array<int, 4>> kuhn_paths()
{
  std::vector<std::array<int, 4>> paths;
  std::array<int, 3> perm{0, 1, 2};
  do
  {
    const int a = 1 << perm[0];
    const int b = a | (1 << perm[1]);
    paths.push_back({0, a, b, 7});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return paths;
}

struct StructuredCube
{
  std::vector<Vector3> vertices;
  std::vector<Mesh::Cell> cells;
};

StructuredCube kuhn_grid(const std::array<double, 3>& lower,
                         const std::array<double, 3>& upper,
                         const std::array<int, 3>& n)
{
  StructuredCube grid;
  const Index sx = n[0] + 1;
  const Index sy = n[1] + 1;
  grid.vertices.reserve(static_cast<std::size_t>(sx) * sy * (n[2] + 1));
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i)
      {
        const std::array<int, 3> ijk{i, j, k};
        Vector3 x;
        for (int d = 0; d < 3; ++d)
          x[d] = (ijk[d] == n[d])
                     ? upper[d]
                     : lower[d] + (upper[d] - lower[d]) * ijk[d] / n[d];
        grid.vertices.push_back(x);
      }

  const auto paths = kuhn_paths();
  grid.cells.reserve(6 * static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
      {
        const std::array<int, 3> ijk{i, j, k};
        auto corner = [&](int bits)
        {
          std::array<int, 3> p{};
          for (int d = 0; d < 3; ++d)
          {
            int bit = (bits >> d) & 1;
            if (2 * ijk[d] >= n[d])
              bit = 1 - bit;
            p[d] = ijk[d] + bit;
          }
          return static_cast<Index>(p[0] + sx * (p[1] + sy * p[2]));
        };
        for (const auto& path : paths)
          grid.cells.push_back(
              {corner(path[0]), corner(path[1]), corner(path[2]),
               corner(path[3])});
      }
  return grid;
}

} // namespace

Mesh generate_box_mesh(const std::array<double, 3>& extent,
                       const std::array<int, 3>& subdivisions)
{
  for (int d = 0; d < 3; ++d)
  {
    if (!(extent[d] > 0.0) || !std::isfinite(extent[d]))
      throw InvalidArgument("box extent must be positive");
    if (subdivisions[d] < 1)
      throw InvalidArgument("box subdivisions must be at least 1");
  }
  auto grid = kuhn_grid({0.0, 0.0, 0.0}, extent, subdivisions);
  return build_topology(std::move(grid.vertices), std::move(grid.cells));
}

Mesh generate_ball_mesh(double radius, int refinement)
{
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("ball radius must be positive");
  if (refinement < 0 || refinement > 8)
    throw InvalidArgument("ball refinement must be in [0, 8]");

  const int n = 2 << refinement;
  auto grid = kuhn_grid({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, {n, n, n});

  // Orientation of each cell in the cube, to detect folds after mapping.
  std::vector<double> sign(grid.cells.size());
  for (std::size_t c = 0; c < grid.cells.size(); ++c)
  {
    const auto& cell = grid.cells[c];
    sign[c] = signed_volume6(grid.vertices[cell[0]], grid.vertices[cell[1]],
                             grid.vertices[cell[2]], grid.vertices[cell[3]]);
  }

  // x -> x |x|_inf / |x|_2 sends the cube surface to the unit sphere; blending
  // with the identity by |x|_inf keeps the cells near the centre undistorted.
  for (auto& x : grid.vertices)
  {
    const double rinf = x.cwiseAbs().maxCoeff();
    const double r2 = x.norm();
    if (r2 == 0.0)
      continue;
    if (rinf == 1.0)
      x = radius * (x / r2);
    else
      x *= radius * ((1.0 - rinf) + rinf * rinf / r2);
  }

  for (std::size_t c = 0; c < grid.cells.size(); ++c)
  {
    const auto& cell = grid.cells[c];
    const double v
        = signed_volume6(grid.vertices[cell[0]], grid.vertices[cell[1]],
                         grid.vertices[cell[2]], grid.vertices[cell[3]]);
    if (v * sign[c] <= 0.0)
      throw Error("ball mapping inverted cell " + std::to_string(c));
  }
  return build_topology(std::move(grid.vertices), std::move(grid.cells));
}

AffineMap affine_map(const Mesh& mesh, Index cell)
{
  if (cell < 0 || cell >= mesh.num_cells())
    throw InvalidArgument("cell index out of range");
  const auto& c = mesh.cells()[cell];
  const auto& ref = element::reference_vertices();

  Matrix3 physical, reference;
  for (int i = 0; i < 3; ++i)
  {
    physical.col(i) = mesh.vertex(c[i + 1]) - mesh.vertex(c[0]);
    reference.col(i) = ref[i + 1] - ref[0];
  }

  AffineMap map;
  map.matrix = physical * reference.inverse();
  map.translation = mesh.centroid(cell);
  map.det = map.matrix.determinant();
  const double scale = mesh.diameter(cell);
  if (!(std::abs(map.det) > 1e-14 * scale * scale * scale))
    throw SingularMap("cell " + std::to_string(cell)
                      + " has a singular affine map");
  map.inverse_transpose = map.matrix.inverse().transpose();
  return map;
}

InternalEdgeReport check_internal_edge_assumption(const Mesh& mesh)
{
  InternalEdgeReport report;
  for (Index c = 0; c < mesh.num_cells(); ++c)
  {
    Eigen::Matrix<double, 3, Eigen::Dynamic> tangents(3, 0);
    int internal = 0;
    for (Index e : mesh.cell_edges()[c])
    {
      if (mesh.is_boundary_edge(e))
        continue;
      ++internal;
      const auto& ev = mesh.edges()[e];
      tangents.conservativeResize(Eigen::NoChange, tangents.cols() + 1);
      tangents.col(tangents.cols() - 1)
          = (mesh.vertex(ev[1]) - mesh.vertex(ev[0])).normalized();
    }
    if (internal < 3)
    {
      report.passed = false;
      report.offending_cells.push_back(c);
    }
    bool spans = false;
    if (tangents.cols() >= 3)
    {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(tangents);
      spans = svd.singularValues()[2] > 1e-8;
    }
    if (!spans)
    {
      report.tangents_span = false;
      report.cells_without_spanning_tangents.push_back(c);
    }
  }
  return report;
}

} // namespace rq1
