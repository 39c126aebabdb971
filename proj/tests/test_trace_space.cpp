#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dtnlab/dtn.hpp"
#include "dtnlab/error.hpp"
#include "dtnlab/trace_space.hpp"

using namespace dtnlab;

namespace {

Vector random_trace(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Vector g(n);
  for (int i = 0; i < n; ++i) g(i) = d(rng);
  return g;
}

}  // namespace

TEST_CASE("basis invariants") {
  const Mesh mesh = build_cube_mesh(4);
  const TraceBasis basis(mesh);
  CHECK(basis.size() == mesh.num_boundary());
  CHECK(std::abs(basis.eigenvalues()(0)) < 1e-9);
  CHECK(basis.eigenvalues().minCoeff() > -1e-9);
  const DenseMatrix& e = basis.eigenvectors();
  const DenseMatrix gram = e.transpose() * basis.mass() * e;
  CHECK((gram - DenseMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-9);
  const Vector e0 = e.col(0);
  CHECK((e0.array() - e0.mean()).abs().maxCoeff() < 1e-9 * std::abs(e0.mean()));
  CHECK((basis.stiffness() * Vector::Ones(basis.size())).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 1; i < basis.size(); ++i) CHECK(basis.eigenvalues()(i) >= basis.eigenvalues()(i - 1));
}

TEST_CASE("sphere spectrum and constant norms") {
  const Mesh mesh = build_ball_mesh(3);
  const TraceBasis basis(mesh);
  CHECK(basis.eigenvalues()(1) == doctest::Approx(2.0).epsilon(0.05));
  const Vector one = Vector::Ones(basis.size());
  for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    CHECK(basis.hs_norm(one, s) == doctest::Approx(std::sqrt(4 * M_PI)).epsilon(0.05));
  }
}

TEST_CASE("hs norms") {
  const Mesh mesh = build_cube_mesh(4);
  const TraceBasis basis(mesh);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vector g = random_trace(basis.size(), rng);
    const Vector f = random_trace(basis.size(), rng);
    const double l2 = std::sqrt(g.dot(basis.mass() * g));
    CHECK(std::abs(basis.hs_norm(g, 0.0) - l2) < 1e-12 * l2);
    CHECK(basis.hs_norm(g, 0.5) * basis.hs_norm(g, -0.5) >= l2 * l2 * (1 - 1e-12));
    // duality of the load-vector norm against H^{1/2}
    const Vector load = basis.mass() * f;
    CHECK(std::abs(g.dot(load)) <= basis.functional_norm(load, -0.5) * basis.hs_norm(g, 0.5) + 1e-10);
  }
  CHECK_THROWS_AS(basis.hs_norm(Vector::Ones(basis.size()), 1.5), Error);
}

TEST_CASE("lanczos norms agree with the dense basis") {
  const Mesh mesh = build_cube_mesh(5);
  const TraceBasis basis(mesh);
  const LanczosTraceNorm lanczos(mesh);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i) {
    const Vector g = random_trace(basis.size(), rng);
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      CHECK(lanczos.hs_norm(g, s) == doctest::Approx(basis.hs_norm(g, s)).epsilon(1e-8));
    }
  }
}

TEST_CASE("operator norm") {
  const Mesh mesh = build_ball_mesh(2);
  const TraceBasis basis(mesh);
  const DenseMatrix zero = DenseMatrix::Zero(basis.size(), basis.size());
  CHECK(basis.operator_norm_half(zero) == 0.0);
  const DtnOperator l1 = assemble_dtn(mesh, constant_conductivity(1.0));
  const DtnOperator l2 = assemble_dtn(mesh, constant_conductivity(2.0));
  const DenseMatrix d = l2.matrix - l1.matrix;
  const double n = basis.operator_norm_half(d);
  CHECK(basis.operator_norm_half(-3.0 * d) == doctest::Approx(3.0 * n).epsilon(1e-12));
  // on the resolved modes l <= lmax the ratio is l / sqrt(1 + l(l+1))
  double previous = 0.0;
  for (int lmax : {1, 2}) {
    const int modes = (lmax + 1) * (lmax + 1);
    const double r = basis.operator_norm_half(d, modes);
    CHECK(r < 1.0);
    CHECK(r > previous);
    CHECK(r == doctest::Approx(lmax / std::sqrt(1.0 + lmax * (lmax + 1.0))).epsilon(0.05));
    CHECK(r <= n);
    previous = r;
  }
  CHECK_THROWS_AS(basis.operator_norm_half(d, basis.size() + 1), Error);
  CHECK_THROWS_AS(basis.operator_norm_half(DenseMatrix::Zero(3, 3)), Error);
}

TEST_CASE("norm equivalence eigenvalue") {
  const Mesh coarse = build_cube_mesh(4);
  const Mesh fine = build_cube_mesh(8);
  const double a = norm_equivalence_eigenvalue(coarse, TraceBasis(coarse)).lambda;
  const double b = norm_equivalence_eigenvalue(fine, TraceBasis(fine)).lambda;
  CHECK(a > 0.0);
  CHECK(b > 0.8 * a);
}

TEST_CASE("spectrum csv") {
  const Mesh mesh = build_cube_mesh(2);
  std::ostringstream os;
  TraceBasis(mesh).write_spectrum_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("index,mu", 0) == 0);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == mesh.num_boundary());
}
