#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dtnlab/error.hpp"
#include "dtnlab/fem.hpp"
#include "dtnlab/liouville.hpp"
#include "dtnlab/trace_space.hpp"

using namespace dtnlab;

namespace {

Field random_interior(const Mesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Field w = Field::Zero(mesh.num_vertices());
  for (int v : mesh.interior_vertices) w(v) = n(rng);
  return w;
}

}  // namespace

TEST_CASE("conductivity families") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<Conductivity> conds = {constant_conductivity(2.0), affine_conductivity(Vec3(0.2, -0.1, 0.3), 1.0),
                                           gaussian_bump(Vec3(0.5, 0.4, 0.6), 0.3, 0.7), product_conductivity(0.3)};
  for (const auto& c : conds) {
    for (int i = 0; i < 100; ++i) {
      const Vec3 x(u(rng), u(rng), u(rng));
      CHECK(c.sigma(x) >= 1.0 / c.kappa);
      CHECK(c.sigma(x) <= c.kappa);
      const Vec3 g = c.grad_sigma(x);
      for (int j = 0; j < 3; ++j) {
        Vec3 e = Vec3::Zero();
        e[j] = 1e-5;
        const double fd = (c.sigma(x + e) - c.sigma(x - e)) / 2e-5;
        CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
      }
    }
  }
  CHECK_THROWS_AS(make_conductivity("affine", {1, 0, 0}), Error);
  CHECK_THROWS_AS(make_conductivity("nope", {}), Error);
  CHECK_THROWS_AS(constant_conductivity(-1.0), Error);
  // 1 + x1 is elliptic on the cube but touches zero in the ball
  const Conductivity lin = affine_conductivity(Vec3(1, 0, 0), 1.0);
  CHECK_NOTHROW(assemble_forms(build_cube_mesh(2), lin));
  CHECK_THROWS_AS(assemble_forms(build_ball_mesh(1), lin), Error);
}

TEST_CASE("stiffness on affine functions") {
  const Mesh mesh = build_cube_mesh(4);
  const FemForms one = assemble_forms(mesh, constant_conductivity(1.0));
  const FemForms two = assemble_forms(mesh, constant_conductivity(2.0));
  const Field x1 = interpolate(mesh, [](const Vec3& x) { return x.x(); });
  CHECK(std::abs(x1.dot(one.stiffness * x1) - 1.0) < 1e-12);
  CHECK((one.stiffness * Field::Ones(mesh.num_vertices())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((SparseMatrix(two.stiffness - 2.0 * one.stiffness)).coeffs().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(Field::Ones(mesh.num_vertices()).dot(one.mass * Field::Ones(mesh.num_vertices())) - 1.0) < 1e-12);
  CHECK_THROWS_AS(assemble_stiffness(mesh, std::vector<double>(3, 1.0)), Error);
}

TEST_CASE("energy") {
  const Mesh mesh = build_cube_mesh(3);
  const Conductivity c = constant_conductivity(1.0);
  const Field x1 = interpolate(mesh, [](const Vec3& x) { return x.x(); });
  CHECK(std::abs(energy(mesh, c, Field::Constant(mesh.num_vertices(), 3.0))) < 1e-12);
  CHECK(std::abs(energy(mesh, c, x1) - 1.0) < 1e-12);
  CHECK(std::abs(energy(mesh, c, 2.0 * x1) - 4.0 * energy(mesh, c, x1)) < 1e-12);
}

TEST_CASE("dirichlet solves") {
  const Mesh mesh = build_cube_mesh(5);
  const Conductivity one = constant_conductivity(1.0);
  const Vector g1 = boundary_trace(mesh, [](const Vec3& x) { return x.x(); });
  const Field u = solve_dirichlet(mesh, one, g1);
  for (int v = 0; v < mesh.num_vertices(); ++v) CHECK(std::abs(u(v) - mesh.vertices[v].x()) < 1e-10);
  const Field c = solve_dirichlet(mesh, one, Vector::Constant(mesh.num_boundary(), 2.5));
  CHECK((c.array() - 2.5).abs().maxCoeff() < 1e-10);

  const Conductivity bump = gaussian_bump(Vec3(0.4, 0.5, 0.6), 0.3, 1.5);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  Vector g(mesh.num_boundary());
  for (int i = 0; i < g.size(); ++i) g(i) = n(rng);
  const Field ub = solve_dirichlet(mesh, bump, g);
  CHECK((restrict_to_boundary(mesh, ub) - g).cwiseAbs().maxCoeff() == 0.0);
  const SparseMatrix k = assemble_forms(mesh, bump).stiffness;
  const Vector r = k * ub;
  for (int v : mesh.interior_vertices) CHECK(std::abs(r(v)) < 1e-10);
  // Galerkin orthogonality and the Dirichlet principle
  const double q = energy(mesh, bump, ub);
  for (int i = 0; i < 20; ++i) {
    const Field w = random_interior(mesh, rng);
    CHECK(std::abs(w.dot(k * ub)) <= 1e-10 * w.norm());
    CHECK(q <= energy(mesh, bump, ub + 0.1 * w));
  }
  // discrete maximum principle
  CHECK(ub.maxCoeff() <= g.maxCoeff() + 1e-9);
  CHECK(ub.minCoeff() >= g.minCoeff() - 1e-9);
}

TEST_CASE("extension bound stays flat under refinement") {
  std::vector<double> worst;
  for (int m : {4, 8}) {
    const Mesh mesh = build_cube_mesh(m);
    const TraceBasis basis(mesh);
    const Conductivity c = product_conductivity(0.3);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    double w = 0.0;
    for (int i = 0; i < 50; ++i) {
      // smooth random data: a few low modes of the boundary pencil
      Vector g = Vector::Zero(mesh.num_boundary());
      for (int j = 0; j < 10; ++j) g += n(rng) * basis.eigenvectors().col(j);
      w = std::max(w, h1_norm(mesh, solve_dirichlet(mesh, c, g)) / basis.hs_norm(g, 0.5));
    }
    worst.push_back(w);
  }
  CHECK(worst[1] < 1.2 * worst[0]);
}

TEST_CASE("schrodinger solves") {
  const Mesh mesh = build_cube_mesh(4);
  const Vector g1 = boundary_trace(mesh, [](const Vec3& x) { return x.x(); });
  const ScalarField zero = [](const Vec3&) { return 0.0; };
  const Field v = solve_schrodinger(mesh, zero, g1);
  for (int i = 0; i < mesh.num_vertices(); ++i) CHECK(std::abs(v(i) - mesh.vertices[i].x()) < 1e-10);
  const Field c = solve_schrodinger(mesh, zero, Vector::Constant(mesh.num_boundary(), -1.0));
  CHECK((c.array() + 1.0).abs().maxCoeff() < 1e-10);
  // -Laplace - 3 pi^2 is singular on the continuous cube; on the mesh a
  // shift onto the discrete first eigenvalue must be reported
  const double lambda = smallest_eigenpair(mesh, constant_conductivity(1.0)).lambda1;
  const ScalarField resonant = [lambda](const Vec3&) { return -lambda; };
  try {
    solve_schrodinger(mesh, resonant, g1);
    FAIL("expected resonance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resonance);
  }
}

TEST_CASE("matrix market export") {
  const Mesh mesh = build_cube_mesh(2);
  std::ostringstream os;
  write_matrix_market(os, assemble_forms(mesh, constant_conductivity(1.0)).mass);
  const std::string s = os.str();
  CHECK(s.rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
  std::istringstream in(s);
  std::string line;
  std::getline(in, line);
  int rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  CHECK(rows == 27);
  CHECK(cols == 27);
  int count = 0;
  for (int i, j; in >> i >> j;) {
    double x;
    in >> x;
    CHECK(i >= j);
    ++count;
  }
  CHECK(count == nnz);
}
