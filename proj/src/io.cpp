#include "rq1/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace rq1
{

namespace
{

class LineReader
{
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line, or throws at end of input.
  std::istringstream next(const char* expected)
  {
    std::string line;
    while (std::getline(in_, line))
    {
      ++line_;
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        return std::istringstream(line);
    }
    throw ParseError(std::string("unexpected end of file, expected ")
                         + expected,
                     line_ + 1);
  }

  std::size_t line() const { return line_; }

private:
  std::istream& in_;
  std::size_t line_ = 0;
};

void expect_end(std::istringstream& s, std::size_t line)
{
  std::string rest;
  if (s >> rest)
    throw ParseError("trailing token '" + rest + "'", line);
}

long read_count(LineReader& r, const std::string& keyword)
{
  auto s = r.next(keyword.c_str());
  std::string word;
  long n = -1;
  if (!(s >> word) || word != keyword || !(s >> n) || n < 0)
    throw ParseError("expected '" + keyword + " <count>'", r.line());
  expect_end(s, r.line());
  return n;
}

std::ofstream open_output(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw InvalidArgument("cannot open '" + path + "' for writing");
  return out;
}

} // namespace

Mesh read_mesh(std::istream& in)
{
  LineReader r(in);
  {
    auto s = r.next("header");
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "rq1mesh" || version != 1)
      throw ParseError("expected header 'rq1mesh 1'", r.line());
    expect_end(s, r.line());
  }

  const long nv = read_count(r, "vertices");
  std::vector<Vector3> vertices(nv);
  for (long i = 0; i < nv; ++i)
  {
    auto s = r.next("vertex");
    if (!(s >> vertices[i][0] >> vertices[i][1] >> vertices[i][2]))
      throw ParseError("expected three coordinates", r.line());
    expect_end(s, r.line());
  }

  const long nc = read_count(r, "cells");
  std::vector<Mesh::Cell> cells(nc);
  for (long c = 0; c < nc; ++c)
  {
    auto s = r.next("cell");
    for (auto& v : cells[c])
    {
      long long i = 0;
      if (!(s >> i))
        throw ParseError("expected four vertex indices", r.line());
      if (i < 0 || i >= nv)
        throw ParseError("vertex index " + std::to_string(i)
                             + " out of range",
                         r.line());
      v = static_cast<Index>(i);
    }
    expect_end(s, r.line());
  }

  std::string rest;
  if (in >> rest)
    throw ParseError("unexpected content after cells", r.line() + 1);
  return build_topology(std::move(vertices), std::move(cells));
}

Mesh read_mesh_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open '" + path + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
  std::ostringstream s;
  s << std::setprecision(17);
  s << "rq1mesh 1\nvertices " << mesh.num_vertices() << '\n';
  for (const auto& x : mesh.vertices())
    s << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  s << "cells " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells())
    s << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  out << s.str();
}

void write_mesh_file(const std::string& path, const Mesh& mesh)
{
  auto out = open_output(path);
  write_mesh(out, mesh);
}

void write_vtk(std::ostream& out, const Mesh& mesh, const VelocityField& u,
               const PressureField& p)
{
  std::ostringstream s;
  s << std::setprecision(17);
  s << "# vtk DataFile Version 3.0\nrq1 solution\nASCII\n"
       "DATASET UNSTRUCTURED_GRID\n";
  s << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& x : mesh.vertices())
    s << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  s << "CELLS " << mesh.num_cells() << ' ' << 5 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells())
    s << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  s << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c)
    s << "10\n";

  s << "POINT_DATA " << mesh.num_vertices()
    << "\nSCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    s << p.values[v] << '\n';

  s << "CELL_DATA " << mesh.num_cells() << "\nVECTORS velocity double\n";
  for (Index c = 0; c < mesh.num_cells(); ++c)
  {
    // The basis functions average to 1/6 each over the cell.
    Vector3 mean = Vector3::Zero();
    for (Index e : mesh.cell_edges()[c])
      mean += u.values.segment<3>(3 * e);
    mean /= 6.0;
    s << mean[0] << ' ' << mean[1] << ' ' << mean[2] << '\n';
  }
  out << s.str();
}

void write_vtk_midpoints(std::ostream& out, const Mesh& mesh,
                         const VelocityField& u)
{
  const Index n = mesh.num_edges();
  std::ostringstream s;
  s << std::setprecision(17);
  s << "# vtk DataFile Version 3.0\nrq1 edge midpoint velocity\nASCII\n"
       "DATASET UNSTRUCTURED_GRID\n";
  s << "POINTS " << n << " double\n";
  for (const auto& x : mesh.edge_midpoints())
    s << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  s << "CELLS " << n << ' ' << 2 * n << '\n';
  for (Index e = 0; e < n; ++e)
    s << "1 " << e << '\n';
  s << "CELL_TYPES " << n << '\n';
  for (Index e = 0; e < n; ++e)
    s << "1\n";
  s << "POINT_DATA " << n << "\nVECTORS velocity double\n";
  for (Index e = 0; e < n; ++e)
    s << u.values[3 * e] << ' ' << u.values[3 * e + 1] << ' '
      << u.values[3 * e + 2] << '\n';
  out << s.str();
}

void write_vtk_files(const std::string& stem, const Mesh& mesh,
                     const VelocityField& u, const PressureField& p)
{
  auto a = open_output(stem + ".vtk");
  write_vtk(a, mesh, u, p);
  auto b = open_output(stem + "_midpoints.vtk");
  write_vtk_midpoints(b, mesh, u);
}

void write_matrix_market(std::ostream& out,
                         const Eigen::SparseMatrix<double>& m)
{
  std::ostringstream s;
  s << std::setprecision(17);
  s << "%%MatrixMarket matrix coordinate real general\n"
    << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      s << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  out << s.str();
}

} // namespace rq1
