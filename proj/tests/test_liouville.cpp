#include <doctest.h>

#include <cmath>
#include <random>

#include "dtnlab/error.hpp"
#include "dtnlab/liouville.hpp"

using namespace dtnlab;

TEST_CASE("schrodinger potential") {
  CHECK(q_from_sigma(constant_conductivity(3.0)).q(Vec3(0.2, 0.3, 0.4)) == 0.0);
  const double beta = 0.3;
  const SchrodingerPotential p = q_from_sigma(product_conductivity(beta));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const double s = 1.0 + beta * x.x() * x.x();
    CHECK(p.q(x) == doctest::Approx(2 * beta / s).epsilon(1e-12));
    // fourth-order finite-difference fallback
    Conductivity no_lap = product_conductivity(beta);
    no_lap.sqrt_sigma_laplacian = {};
    CHECK(sqrt_sigma_laplacian(no_lap, x) == doctest::Approx(2 * beta).epsilon(1e-5));
  }
  const SchrodingerPotential again = q_from_sigma(product_conductivity(beta));
  CHECK(again.q(Vec3(0.1, 0.2, 0.3)) == p.q(Vec3(0.1, 0.2, 0.3)));
  CHECK(*p.clipped == 0);
}

TEST_CASE("liouville transform") {
  const Conductivity c = product_conductivity(0.3);
  std::vector<double> res;
  for (int m : {4, 8}) {
    const Mesh mesh = build_cube_mesh(m);
    const Vector g = boundary_trace(mesh, [](const Vec3& x) { return std::cos(x.x()) + x.y() * x.z(); });
    CHECK(liouville_residual(mesh, constant_conductivity(1.0), g) <= 1e-10);
    res.push_back(liouville_residual(mesh, c, g));
    const Vector one = Vector::Ones(mesh.num_boundary());
    CHECK(liouville_residual(mesh, c, one) < 0.1);
  }
  CHECK(res[0] / res[1] >= 1.6);
}

TEST_CASE("transformed dtn identity") {
  const Mesh mesh = build_cube_mesh(4);
  const TraceBasis basis(mesh);
  CHECK(transformed_dtn_residual(mesh, basis, constant_conductivity(1.0)) <= 1e-9);
  CHECK(transformed_dtn_residual(mesh, basis, constant_conductivity(4.0)) <= 1e-9);
  const Mesh fine = build_cube_mesh(8);
  const double coarse_r = transformed_dtn_residual(mesh, basis, product_conductivity(0.3));
  const double fine_r = transformed_dtn_residual(fine, TraceBasis(fine), product_conductivity(0.3));
  CHECK(fine_r < coarse_r);
}

TEST_CASE("weak identity for ln(sigma1/sigma2)") {
  const Mesh mesh = build_cube_mesh(4);
  const Conductivity c = product_conductivity(0.3);
  CHECK(log_ratio_residual(mesh, c, c) <= 1e-12);
  CHECK(log_ratio_residual(mesh, constant_conductivity(2.0), constant_conductivity(3.0)) <= 1e-10);
  const double fine = log_ratio_residual(build_cube_mesh(8), c, constant_conductivity(1.0));
  CHECK(fine < log_ratio_residual(mesh, c, constant_conductivity(1.0)));
}

TEST_CASE("first eigenpair") {
  const Mesh mesh = build_cube_mesh(12);
  const EigenPair e = smallest_eigenpair(mesh, constant_conductivity(1.0));
  CHECK(e.lambda1 > 3 * M_PI * M_PI);
  CHECK(e.lambda1 == doctest::Approx(3 * M_PI * M_PI).epsilon(0.05));
  CHECK(e.residual <= 1e-8);
  const FemForms forms = assemble_forms(mesh, constant_conductivity(1.0));
  CHECK(std::sqrt(e.phi1.dot(forms.mass * e.phi1)) == doctest::Approx(1.0).epsilon(1e-10));
  for (int v : mesh.interior_vertices) CHECK(e.phi1(v) > 0.0);
  for (int v : mesh.boundary_vertices) CHECK(e.phi1(v) == 0.0);
  const EigenPair e3 = smallest_eigenpair(mesh, constant_conductivity(3.0));
  CHECK(std::abs(e3.lambda1 - 3.0 * e.lambda1) <= 1e-10 * e3.lambda1);
  CHECK(second_eigenvalue(mesh, constant_conductivity(1.0), e) > e.lambda1 + 1e-6);
  const DistanceRatio r = distance_ratio(mesh, e.phi1);
  CHECK(r.min > 0.0);
  CHECK(r.max / r.min <= 25.0);
  // converging from above
  const EigenPair finer = smallest_eigenpair(build_cube_mesh(16), constant_conductivity(1.0));
  CHECK(finer.lambda1 < e.lambda1);
}

TEST_CASE("energy estimate constant") {
  const Conductivity a = product_conductivity(0.3);
  const double c8 = elliptic_estimate_constant(build_cube_mesh(8), a, 50, 42);
  const double c16 = elliptic_estimate_constant(build_cube_mesh(16), a, 50, 42);
  CHECK(c8 > 0.0);
  CHECK(c16 == doctest::Approx(c8).epsilon(0.5));
  CHECK(elliptic_estimate_constant(build_cube_mesh(8), a, 50, 42) == c8);
}

TEST_CASE("logarithmic stability") {
  CHECK(log_modulus(std::exp(-32.0)) == doctest::Approx(0.25 + std::exp(-32.0)));
  const Mesh mesh = build_cube_mesh(6);
  const TraceBasis basis(mesh);
  const Conductivity one = constant_conductivity(1.0);
  const DtnOperator l1 = assemble_dtn(mesh, one);
  std::vector<std::pair<double, double>> pts;
  for (double t : {0.4, 0.2, 0.1}) {
    const Conductivity c = gaussian_bump(Vec3(0.5, 0.5, 0.5), 0.3, t);
    pts.emplace_back(h1_gap(mesh, c, one), dtn_diff_norm(basis, assemble_dtn(mesh, c), l1));
  }
  const LogStabilityCheck check = log_stability_check(pts);
  CHECK(check.monotone);
  CHECK(std::isfinite(check.constant));
  CHECK(check.constant > 0.0);
}
