// rq1: command-line driver for the rotated-Q1 / P1 Stokes solver.

#include "rq1/analysis.hpp"
#include "rq1/element.hpp"
#include "rq1/io.hpp"
#include "rq1/quadrature.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <random>

namespace
{

using namespace rq1;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_input = 2;
constexpr int exit_solve = 3;

// ---------------------------------------------------------------------------
// Element and reference-cell checks

struct Check
{
  std::string name;
  double deviation;
  double tolerance;
  bool passed() const { return deviation <= tolerance; }
};

double lagrange_deviation()
{
  const auto& nodes = element::nodes();
  double dev = 0.0;
  for (int j = 0; j < 6; ++j)
  {
    const auto phi = element::eval_basis(nodes[j]);
    for (int i = 0; i < 6; ++i)
      dev = std::max(dev, std::abs(phi[i] - (i == j ? 1.0 : 0.0)));
  }
  return dev;
}

std::vector<Vector3> sample_points(int count)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& v = element::reference_vertices();
  std::vector<Vector3> pts;
  for (int k = 0; k < count; ++k)
  {
    std::array<double, 4> w{};
    double sum = 0.0;
    for (auto& x : w)
      sum += (x = -std::log(u(rng) + 1e-300));
    Vector3 p = Vector3::Zero();
    for (int i = 0; i < 4; ++i)
      p += w[i] / sum * v[i];
    pts.push_back(p);
  }
  return pts;
}

double partition_deviation(const std::vector<Vector3>& pts)
{
  double dev = 0.0;
  for (const auto& x : pts)
  {
    const auto phi = element::eval_basis(x);
    double sum = 0.0;
    for (double p : phi)
      sum += p;
    dev = std::max(dev, std::abs(sum - 1.0));
  }
  return dev;
}

double gradient_sum_deviation(const std::vector<Vector3>& pts)
{
  double dev = 0.0;
  for (const auto& x : pts)
  {
    Vector3 sum = Vector3::Zero();
    for (const auto& g : element::eval_basis_grad(x))
      sum += g;
    dev = std::max(dev, sum.lpNorm<Eigen::Infinity>());
  }
  return dev;
}

// Residual of N N^-1 = I; infinite if N is numerically singular.
double nodal_invertibility_deviation()
{
  const Eigen::Matrix<double, 6, 6> n = element::nodal_matrix();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(n);
  if (!(svd.singularValues()[5] > 1e-8))
    return std::numeric_limits<double>::infinity();
  const Eigen::Matrix<double, 6, 6> inv = n.inverse();
  return (n * inv - Eigen::Matrix<double, 6, 6>::Identity())
      .lpNorm<Eigen::Infinity>();
}

// N(x1^2 + x2^2 + x3^2) = N(1): the interpolant of |x|^2 is the constant 1.
double radial_deviation(const std::vector<Vector3>& pts)
{
  std::array<double, 6> values{};
  const auto& nodes = element::nodes();
  for (int i = 0; i < 6; ++i)
    values[i] = nodes[i].squaredNorm();
  double dev = 0.0;
  for (int i = 0; i < 6; ++i)
    dev = std::max(dev, std::abs(values[i] - 1.0));
  for (const auto& x : pts)
  {
    const auto phi = element::eval_basis(x);
    double s = 0.0;
    for (int i = 0; i < 6; ++i)
      s += values[i] * phi[i];
    dev = std::max(dev, std::abs(s - 1.0));
  }
  return dev;
}

// Edge-midpoint rule against a high-order rule for the basis and for the
// monomials spanning the shape space.
double midpoint_quadrature_deviation()
{
  const QuadratureRule mid = edge_midpoint_quadrature();
  const QuadratureRule ref = volume_quadrature(4);
  auto integrate = [](const QuadratureRule& r, auto&& f)
  {
    double s = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q)
      s += r.weights[q] * f(r.points[q]);
    return s;
  };
  std::vector<std::function<double(const Vector3&)>> fs;
  for (int i = 0; i < 6; ++i)
    fs.push_back([i](const Vector3& x) { return element::eval_basis(x)[i]; });
  fs.push_back([](const Vector3&) { return 1.0; });
  for (int d = 0; d < 3; ++d)
    fs.push_back([d](const Vector3& x) { return x[d]; });
  fs.push_back([](const Vector3& x) { return x[0] * x[0] - x[1] * x[1]; });
  fs.push_back([](const Vector3& x) { return x[1] * x[1] - x[2] * x[2]; });
  double dev = 0.0;
  for (const auto& f : fs)
    dev = std::max(dev, std::abs(integrate(mid, f) - integrate(ref, f)));
  return dev;
}

double face_jacobian_deviation(int maps)
{
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& ref = element::reference_vertices();
  double dev = 0.0;
  int done = 0;
  while (done < maps)
  {
    Matrix3 a;
    for (int i = 0; i < 9; ++i)
      a.data()[i] = u(rng);
    if (std::abs(a.determinant()) < 0.05)
      continue;
    const Vector3 c(u(rng), u(rng), u(rng));
    std::vector<Vector3> verts;
    for (const auto& v : ref)
      verts.push_back(a * v + c);
    const Mesh mesh = build_topology(verts, {{0, 1, 2, 3}});
    for (Index e : mesh.cell_edges()[0])
      for (Index f : mesh.cell_faces()[0])
        dev = std::max(
            dev, verify_face_jacobian_identity(mesh, 0, e, f).relative_difference);
    ++done;
  }
  return dev;
}

std::vector<Check> element_checks(const ReferenceConstants& constants)
{
  const auto pts = sample_points(200);
  std::vector<Check> checks;
  checks.push_back({"lagrange", lagrange_deviation(), 1e-12});
  checks.push_back({"partition_of_unity", partition_deviation(pts), 1e-12});
  checks.push_back({"gradient_sum_zero", gradient_sum_deviation(pts), 1e-12});
  checks.push_back(
      {"nodal_map_invertible", nodal_invertibility_deviation(), 1e-12});
  checks.push_back({"radial_interpolant", radial_deviation(pts), 1e-12});
  checks.push_back(
      {"edge_midpoint_quadrature", midpoint_quadrature_deviation(), 1e-12});

  double bulk = 0.0, boundary = 0.0, combined = 0.0, pairing = 0.0;
  const std::vector<Vector3> directions{
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 2, -1}, {0.3, -0.7, 0.4}};
  for (const auto& b : directions)
  {
    const auto r = verify_reference_constants(b, constants);
    bulk = std::max(bulk, r.bulk_deviation);
    boundary = std::max(boundary, r.boundary_deviation);
    combined = std::max(combined, r.total_deviation);
    pairing = std::max(pairing, r.pairing_deviation);
  }
  checks.push_back({"reference_bulk", bulk, 1e-12});
  checks.push_back({"reference_boundary", boundary, 1e-12});
  checks.push_back({"reference_combined", combined, 1e-12});
  checks.push_back({"reference_divergence_pairing", pairing, 1e-12});
  checks.push_back({"face_jacobian_identity", face_jacobian_deviation(100), 1e-12});
  return checks;
}

// ---------------------------------------------------------------------------
// Shared helpers

FormKind parse_form(const std::string& s)
{
  return s == "b" ? FormKind::BConsistent : FormKind::BTilde;
}

FormKind parse_operator(const std::string& s)
{
  return s == "strain" ? FormKind::Strain : FormKind::Laplacian;
}

Mesh centred_box(int n)
{
  const Mesh m = generate_box_mesh({1.0, 1.0, 1.0}, {n, n, n});
  auto verts = m.vertices();
  for (auto& x : verts)
    x -= Vector3::Constant(0.5);
  return build_topology(std::move(verts), m.cells());
}

std::ofstream open_file(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw InvalidArgument("cannot open '" + path + "' for writing");
  return out;
}

void print_json(const json& j)
{
  std::cout << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

struct Options
{
  std::string form = "b";
  std::string op = "laplacian";
  std::string domain = "box";
  int levels = 4;
  std::string out;
  bool json = false;
  bool no_timing = false;
  double inject_combined = 0.0;
  std::string mesh_file;
  std::string mesh_case = "cubic";
  std::vector<int> subdivisions{4, 4, 4};
  std::vector<double> extent{1.0, 1.0, 1.0};
  int refinement = 1;
  double radius = 1.0;
  std::string vtk;
};

int cmd_verify_element(const Options& o)
{
  ReferenceConstants k;
  if (o.inject_combined != 0.0)
    k.combined = o.inject_combined;
  const auto checks = element_checks(k);
  bool ok = true;
  json report = json::array();
  for (const auto& c : checks)
  {
    ok = ok && c.passed();
    if (o.json)
      report.push_back({{"check", c.name},
                        {"max_deviation", c.deviation},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed()}});
    else
      std::cout << std::left << std::setw(30) << c.name << ' '
                << (c.passed() ? "PASS" : "FAIL") << "  max deviation "
                << std::scientific << std::setprecision(3) << c.deviation
                << '\n';
  }
  if (o.json)
    print_json({{"checks", report}, {"passed", ok}});
  return ok ? exit_ok : exit_check_failed;
}

int cmd_convergence(const Options& o)
{
  std::vector<Mesh> meshes;
  for (int l = 1; l <= o.levels; ++l)
    meshes.push_back(o.domain == "ball" ? generate_ball_mesh(1.0, l - 1)
                                        : centred_box(1 << l));

  const auto table
      = run_convergence_study(cubic_case(), meshes, parse_operator(o.op),
                              parse_form(o.form), !o.no_timing);
  if (!o.out.empty())
  {
    auto f = open_file(o.out);
    write_convergence_csv(f, table);
  }
  else
    write_convergence_csv(std::cout, table);

  for (const auto& r : table.rows)
    std::cerr << "h=" << r.h << " boundary pressure error "
              << r.boundary_pressure_error << '\n';
  if (!table.failure.empty())
  {
    std::cerr << "error: " << table.failure << '\n';
    return exit_solve;
  }
  const auto& last = table.rows.back();
  const bool ok = meets_rate_thresholds(table);
  std::cerr << "finest slopes: eL2u " << last.slope_l2_velocity << ", eH1u "
            << last.slope_h1_velocity << ", eL2p " << last.slope_l2_pressure
            << (ok ? "  PASS" : "  FAIL") << '\n';
  return ok ? exit_ok : exit_check_failed;
}

int cmd_infsup(const Options& o)
{
  std::vector<Mesh> meshes;
  if (!o.mesh_file.empty())
    meshes.push_back(read_mesh_file(o.mesh_file));
  else
    for (int l = 1; l <= o.levels; ++l)
      meshes.push_back(generate_box_mesh({1.0, 1.0, 1.0}, {l + 2, l + 2, l + 2}));

  std::ostringstream csv;
  csv << std::setprecision(17) << "h,beta\n";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& m : meshes)
  {
    const auto r = estimate_infsup(m, parse_form(o.form));
    csv << r.h << ',' << r.beta << '\n';
    lo = std::min(lo, r.beta);
    hi = std::max(hi, r.beta);
  }
  if (!o.out.empty())
    open_file(o.out) << csv.str();
  else
    std::cout << csv.str();
  const bool ok = lo > 0.0 && hi / lo <= 2.0;
  std::cerr << "min beta " << lo << ", max/min " << hi / lo
            << (ok ? "  PASS" : "  FAIL") << '\n';
  return ok ? exit_ok : exit_check_failed;
}

int cmd_korn(const Options& o)
{
  std::ostringstream csv;
  csv << std::setprecision(17) << "h,alpha\n";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int l = 1; l <= o.levels; ++l)
  {
    const Mesh m = generate_box_mesh({1.0, 1.0, 1.0}, {l + 2, l + 2, l + 2});
    const double a = estimate_korn(m, true).alpha;
    csv << m.h() << ',' << a << '\n';
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (!o.out.empty())
    open_file(o.out) << csv.str();
  else
    std::cout << csv.str();
  const bool ok = lo > 0.0 && hi / lo <= 2.0;
  std::cerr << "min alpha " << lo << ", max/min " << hi / lo
            << (ok ? "  PASS" : "  FAIL") << '\n';
  return ok ? exit_ok : exit_check_failed;
}

int cmd_poiseuille(const Options& o)
{
  const auto r = run_poiseuille(parse_operator(o.op));
  if (!o.out.empty())
    write_vtk_files(o.out, r.mesh, r.solution.velocity, r.solution.pressure);

  const bool ok = r.symmetry_defect <= 0.02 && r.flux_imbalance <= 0.02
                  && r.pressure_decreasing;
  if (o.json)
  {
    print_json({{"operator", o.op},
                {"inflow", r.inflow},
                {"outflow", r.outflow},
                {"flux_imbalance", r.flux_imbalance},
                {"symmetry_defect", r.symmetry_defect},
                {"strip_pressure", r.strip_pressure},
                {"pressure_decreasing", r.pressure_decreasing},
                {"pressure_integral", r.pressure_integral},
                {"passed", ok}});
  }
  else
  {
    std::cout << std::setprecision(10) << "inflow " << r.inflow
              << "\noutflow " << r.outflow << "\nflux imbalance "
              << r.flux_imbalance << "\nsymmetry defect " << r.symmetry_defect
              << "\npressure integral " << r.pressure_integral
              << "\nstrip pressure";
    for (double p : r.strip_pressure)
      std::cout << ' ' << p;
    std::cout << "\npressure decreasing "
              << (r.pressure_decreasing ? "yes" : "no") << '\n'
              << (ok ? "PASS" : "FAIL") << '\n';
  }
  return ok ? exit_ok : exit_check_failed;
}

int cmd_solve(const Options& o)
{
  const Mesh mesh = read_mesh_file(o.mesh_file);
  ManufacturedCase c;
  if (o.mesh_case == "cubic")
    c = cubic_case();
  else if (o.mesh_case == "affine")
    c = affine_case();
  else
  {
    c = affine_case();
    c.name = "zero";
    c.velocity = [](const Vector3&) { return Vector3::Zero().eval(); };
    c.velocity_gradient = [](const Vector3&) { return Matrix3::Zero().eval(); };
  }
  const auto s = solve_manufactured(mesh, c, parse_operator(o.op),
                                    parse_form(o.form));
  const auto e = error_norms(mesh, s.velocity, s.pressure, c);
  if (!o.out.empty())
    write_vtk_files(o.out, mesh, s.velocity, s.pressure);

  if (o.json)
  {
    print_json({{"case", c.name},
                {"eL2u", e.l2_velocity},
                {"eH1u", e.h1_velocity},
                {"eL2p", e.l2_pressure},
                {"max_velocity", s.velocity.values.lpNorm<Eigen::Infinity>()},
                {"relative_residual", s.diagnostics.relative_residual},
                {"rcond", s.diagnostics.rcond}});
  }
  else
  {
    std::cout << std::setprecision(17) << "case=" << c.name
              << "\neL2u=" << e.l2_velocity << "\neH1u=" << e.h1_velocity
              << "\neL2p=" << e.l2_pressure << "\nmax_velocity="
              << s.velocity.values.lpNorm<Eigen::Infinity>() << '\n';
    write_diagnostics(std::cout, s.diagnostics);
  }
  return exit_ok;
}

int cmd_mesh(const Options& o)
{
  const Mesh m = o.domain == "ball"
                     ? generate_ball_mesh(o.radius, o.refinement)
                     : generate_box_mesh(
                         {o.extent[0], o.extent[1], o.extent[2]},
                         {o.subdivisions[0], o.subdivisions[1],
                          o.subdivisions[2]});
  if (!o.out.empty())
    write_mesh_file(o.out, m);
  if (!o.vtk.empty())
  {
    auto f = open_file(o.vtk);
    write_vtk(f, m, VelocityField{Eigen::VectorXd::Zero(3 * m.num_edges())},
              PressureField{Eigen::VectorXd::Zero(m.num_vertices())});
  }
  const auto report = check_internal_edge_assumption(m);
  std::cerr << std::setprecision(10) << "vertices " << m.num_vertices()
            << "\ncells " << m.num_cells() << "\nfaces " << m.num_faces()
            << "\nedges " << m.num_edges() << "\nh " << m.h() << "\nvolume "
            << m.total_volume() << "\ninternal edge assumption "
            << (report.passed ? "holds" : "violated") << '\n';
  if (o.out.empty())
    write_mesh(std::cout, m);
  return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Rotated-Q1 / P1 Stokes solver"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::string> forms{"b", "btilde"};
  const std::vector<std::string> ops{"laplacian", "strain"};
  const std::vector<std::string> domains{"box", "ball"};

  auto* verify = app.add_subcommand("verify-element",
                                    "Element and reference-cell identities");
  verify->add_flag("--json", o.json, "Machine-readable report");
  verify->add_option("--inject-combined", o.inject_combined)
      ->group("")
      ->description("Test hook: override the combined constant");

  auto* conv = app.add_subcommand("convergence",
                                  "Manufactured-solution convergence study");
  conv->add_option("--levels", o.levels, "Number of meshes (h = 1/2, 1/4, ...)")
      ->check(CLI::Range(3, 4));
  conv->add_option("--form", o.form)->check(CLI::IsMember(forms));
  conv->add_option("--operator", o.op)->check(CLI::IsMember(ops));
  conv->add_option("--domain", o.domain)->check(CLI::IsMember(domains));
  conv->add_option("--out", o.out, "CSV output path");
  conv->add_flag("--no-timing", o.no_timing, "Write 0 in the seconds column");

  auto* infsup = app.add_subcommand("infsup", "Discrete inf-sup constants");
  infsup->add_option("--levels", o.levels, "Number of box meshes")
      ->check(CLI::Range(1, 6));
  infsup->add_option("--form", o.form)->check(CLI::IsMember(forms));
  infsup->add_option("--mesh", o.mesh_file, "Use this rq1mesh file instead")
      ->check(CLI::ExistingFile);
  infsup->add_option("--out", o.out, "CSV output path");

  auto* korn = app.add_subcommand("korn", "Discrete Korn constants");
  korn->add_option("--levels", o.levels, "Number of box meshes")
      ->check(CLI::Range(1, 3));
  korn->add_option("--out", o.out, "CSV output path");

  auto* pois = app.add_subcommand("poiseuille", "Channel flow demo");
  pois->add_option("--operator", o.op)->check(CLI::IsMember(ops));
  pois->add_option("--form", o.form)->check(CLI::IsMember(forms));
  pois->add_option("--out", o.out, "VTK output stem");
  pois->add_flag("--json", o.json);

  auto* solve = app.add_subcommand("solve", "Solve on a mesh file");
  solve->add_option("--mesh", o.mesh_file)->required();
  solve->add_option("--case", o.mesh_case)
      ->check(CLI::IsMember({"cubic", "affine", "zero"}));
  solve->add_option("--form", o.form)->check(CLI::IsMember(forms));
  solve->add_option("--operator", o.op)->check(CLI::IsMember(ops));
  solve->add_option("--out", o.out, "VTK output stem");
  solve->add_flag("--json", o.json);

  auto* mesh = app.add_subcommand("mesh", "Generate and export a mesh");
  mesh->add_option("--domain", o.domain)->check(CLI::IsMember(domains));
  mesh->add_option("--subdivisions", o.subdivisions, "Boxes per direction")
      ->expected(3);
  mesh->add_option("--extent", o.extent, "Box side lengths")->expected(3);
  mesh->add_option("--refinement", o.refinement)->check(CLI::Range(0, 5));
  mesh->add_option("--radius", o.radius);
  mesh->add_option("--out", o.out, "rq1mesh output path");
  mesh->add_option("--vtk", o.vtk, "VTK output path");

  try
  {
    app.parse(argc, argv);
    // The consistent form needs Dirichlet data on the whole boundary.
    if (pois->parsed() && pois->count("--form") && o.form == "b")
      throw CLI::ValidationError(
          "--form", "form b is not available with natural boundary conditions");
  }
  catch (const CLI::CallForHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    app.exit(e);
    return exit_input;
  }

  try
  {
    if (verify->parsed())
      return cmd_verify_element(o);
    if (conv->parsed())
      return cmd_convergence(o);
    if (infsup->parsed())
      return cmd_infsup(o);
    if (korn->parsed())
      return cmd_korn(o);
    if (pois->parsed())
      return cmd_poiseuille(o);
    if (solve->parsed())
      return cmd_solve(o);
    if (mesh->parsed())
      return cmd_mesh(o);
  }
  catch (const SolverError& e)
  {
    std::cerr << "solver error: " << e.what() << '\n';
    return exit_solve;
  }
  catch (const ParseError& e)
  {
    std::cerr << "parse error: " << e.what() << '\n';
    return exit_input;
  }
  catch (const InvalidArgument& e)
  {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_input;
  }
  catch (const MeshInvalid& e)
  {
    std::cerr << "invalid mesh: " << e.what() << '\n';
    return exit_input;
  }
  catch (const Error& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solve;
  }
  return exit_input;
}
