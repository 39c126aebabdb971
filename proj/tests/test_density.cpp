#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dtnlab/density.hpp"
#include "dtnlab/dtn.hpp"
#include "dtnlab/error.hpp"
#include "dtnlab/fit.hpp"

using namespace dtnlab;

namespace {

std::vector<Vec3> grid(double a, double b, int n) {
  std::vector<Vec3> xs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double t = 1.0 / (n - 1);
        xs.emplace_back(a + (b - a) * i * t, a + (b - a) * j * t, a + (b - a) * k * t);
      }
  return xs;
}

}  // namespace

TEST_CASE("bernstein basics") {
  const ScalarField affine = [](const Vec3& x) { return 0.3 + 2.0 * x.x() - 0.5 * x.y() + 1.25 * x.z(); };
  for (int k : {1, 3, 8, 40}) {
    const SampledField f = sample_field(affine, -0.5, 1.5, k);
    for (const Vec3& x : grid(-0.5, 1.5, 7)) CHECK(std::abs(bernstein_nd(f, x) - affine(x)) < 1e-12);
  }
  double sum = 0.0;
  for (int j = 0; j <= 30; ++j) sum += bernstein_basis(30, j, 0.37);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));

  const ScalarField wavy = [](const Vec3& x) { return 2.0 + std::sin(7 * x.x()) * std::cos(5 * x.y() * x.z()); };
  const SampledField w = sample_field(wavy, 0.0, 1.0, 12);
  const double lo = *std::min_element(w.values.begin(), w.values.end());
  for (const Vec3& x : grid(0.0, 1.0, 9)) CHECK(bernstein_nd(w, x) >= lo);
  CHECK_THROWS_AS(bernstein_nd(w, Vec3(1.1, 0.5, 0.5)), Error);

  // x1 x2 is multilinear, so every degree reproduces it
  const ScalarField prod = [](const Vec3& x) { return x.x() * x.y(); };
  const ScalarField square = [](const Vec3& x) { return x.x() * x.x() + x.y(); };
  const auto test = grid(0.0, 1.0, 20);
  double previous = INFINITY;
  for (int k : {4, 8, 16, 32}) {
    const SampledField f = sample_field(prod, 0.0, 1.0, k);
    const SampledField q = sample_field(square, 0.0, 1.0, k);
    const auto vals = bernstein_nd(f, test);
    const auto sq = bernstein_nd(q, test);
    double err = 0.0;
    for (size_t i = 0; i < test.size(); ++i) {
      CHECK(std::abs(vals[i] - prod(test[i])) < 1e-12);
      CHECK(vals[i] == doctest::Approx(bernstein_nd(f, test[i])).epsilon(1e-13));
      err = std::max(err, std::abs(sq[i] - square(test[i])));
    }
    CHECK(err == doctest::Approx(0.25 / k).epsilon(0.05));
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("extension") {
  const Conductivity c = product_conductivity(0.3);
  for (DomainKind kind : {DomainKind::cube, DomainKind::ball}) {
    const auto [a, b] = enclosing_cube(kind);
    const ScalarField e = extension(c, kind, a, b);
    for (const Vec3& x : domain_sample(kind, 500)) CHECK(e(x) == c.sigma(x));
    const SampledField f = extend_conductivity(c, kind, a, b, 10);
    double dmax = 0.0;
    for (const Vec3& x : domain_sample(kind)) dmax = std::max(dmax, c.sigma(x));
    // the sup over the closed domain is 1.3^2, at x1 = 1
    const double lmax = *std::max_element(f.values.begin(), f.values.end());
    CHECK(lmax <= 1.69 + 1e-9);
    CHECK(lmax >= dmax - 1e-12);
    CHECK(dmax >= 1.69 - 0.12);
  }
  const SampledField k = extend_conductivity(constant_conductivity(1.7), DomainKind::ball, -1.1, 1.1, 4);
  for (double v : k.values) CHECK(v == 1.7);
  CHECK_THROWS_AS(extension(c, DomainKind::ball, -0.5, 1.0), Error);
  CHECK_THROWS_AS(extension(c, DomainKind::cube, 0.0, 1.0), Error);
}

TEST_CASE("dense approximants") {
  const DenseApproximant c = dense_approximant(constant_conductivity(1.3), DomainKind::ball, 1e-6,
                                               DensityMethod::bernstein);
  CHECK(c.k == 1);
  CHECK(c.sup_error < 1e-12);
  const DenseApproximant a = dense_approximant(affine_conductivity(Vec3(1, 0, 0), 1.0), DomainKind::cube, 1e-3,
                                               DensityMethod::bernstein);
  CHECK(a.k <= 2);
  CHECK(a.min_value > 0.0);
  const Conductivity p = product_conductivity(0.3);
  int previous = 0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    for (DensityMethod m : {DensityMethod::bernstein, DensityMethod::mollifier}) {
      const DenseApproximant chi = dense_approximant(p, DomainKind::cube, eps, m);
      CHECK(chi.sup_error <= eps);
      CHECK(chi.min_value > 0.0);
      if (m == DensityMethod::bernstein) {
        CHECK(chi.k >= previous);
        previous = chi.k;
      }
    }
  }
  // the bump is too rough for degree 512 at 1e-3; the mollifier still gets there
  const Conductivity bump = gaussian_bump(Vec3(0.5, 0.5, 0.5), 0.4, 0.5);
  try {
    dense_approximant(bump, DomainKind::cube, 1e-3, DensityMethod::bernstein);
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_convergence);
  }
  CHECK(dense_approximant(bump, DomainKind::cube, 1e-3, DensityMethod::mollifier).sup_error <= 1e-3);
  CHECK(parse_density_method(to_string(DensityMethod::mollifier)) == DensityMethod::mollifier);
  CHECK_THROWS_AS(parse_density_method("spline"), Error);

  std::ostringstream os;
  write_approximant_json(os, a, "affine");
  CHECK(os.str().find("\"k\": " + std::to_string(a.k)) != std::string::npos);
}

TEST_CASE("mollifier") {
  const Mollifier psi;
  CHECK(std::abs(psi.mass() - 1.0) < 1e-10);
  CHECK(Mollifier::reference_mass() > 0.0);
  const ScalarField affine = [](const Vec3& x) { return 1.0 + x.x() - 2.0 * x.z(); };
  CHECK(psi.convolve(affine, Vec3(0.3, 0.4, 0.5), 8.0) == doctest::Approx(affine(Vec3(0.3, 0.4, 0.5))).epsilon(1e-10));
  const Conductivity c = gaussian_bump(Vec3(0.5, 0.5, 0.5), 0.4, 0.5);
  const ScalarField e = extension(c, DomainKind::cube, -1e-6, 1.0 + 1e-6);
  const auto pts = domain_sample(DomainKind::cube, 1000);
  double previous = INFINITY;
  for (double k : {4.0, 8.0, 16.0, 32.0}) {
    double err = 0.0;
    for (const Vec3& x : pts) err = std::max(err, std::abs(psi.convolve(e, x, k) - c.sigma(x)));
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("dtn gap follows the approximation error") {
  const Mesh mesh = build_cube_mesh(6);
  const TraceBasis basis(mesh);
  const Conductivity p = product_conductivity(0.3);
  const DtnOperator lp = assemble_dtn(mesh, p);
  std::vector<double> err, gap;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const DenseApproximant chi = dense_approximant(p, DomainKind::cube, eps, DensityMethod::bernstein);
    Conductivity c;
    c.id = "chi" + std::to_string(chi.k);
    c.sigma = [&chi](const Vec3& x) { return chi.evaluate({x})[0]; };
    c.grad_sigma = [](const Vec3&) { return Vec3::Zero().eval(); };
    c.kappa = std::max(p.kappa, 1.0 / chi.min_value);
    err.push_back(chi.sup_error);
    gap.push_back(dtn_diff_norm(basis, lp, assemble_dtn(mesh, c)));
    CHECK(gap.back() > 0.0);
  }
  CHECK(fit_exponent(err, gap).slope >= 0.8);
}
