#pragma once

#include "rq1/mesh.hpp"
#include "rq1/spaces.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>

namespace rq1
{

/// Reads the line-based `rq1mesh 1` format. Throws ParseError with the
/// offending line number.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

/// Writes vertices with 17 significant digits so read_mesh round-trips.
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

/// Legacy ASCII VTK unstructured grid: pressure as point data, velocity
/// averaged per cell as cell data.
void write_vtk(std::ostream& out, const Mesh& mesh, const VelocityField& u,
               const PressureField& p);

/// Point cloud of edge midpoints carrying the native velocity values.
void write_vtk_midpoints(std::ostream& out, const Mesh& mesh,
                         const VelocityField& u);

/// Writes `<stem>.vtk` and `<stem>_midpoints.vtk`.
void write_vtk_files(const std::string& stem, const Mesh& mesh,
                     const VelocityField& u, const PressureField& p);

/// MatrixMarket coordinate real general.
void write_matrix_market(std::ostream& out,
                         const Eigen::SparseMatrix<double>& m);

} // namespace rq1
