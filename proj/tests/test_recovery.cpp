#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dtnlab/error.hpp"
#include "dtnlab/recovery.hpp"

using namespace dtnlab;

namespace {

const Vec3 kTop(0.5, 0.5, 1.0);

double slope(const std::vector<double>& x, const std::vector<double>& y) { return fit_exponent(x, y).slope; }

}  // namespace

TEST_CASE("psi_k construction") {
  const Mesh mesh = build_cube_mesh(24);
  const LanczosTraceNorm norms(mesh);
  const Probe probe = make_probe(DomainKind::cube, kTop);
  CHECK(max_resolvable_k(mesh) == 4);
  CHECK_THROWS_AS(build_psi_k(mesh, norms, probe, 8), Error);
  std::vector<double> ks, l2, hm;
  for (int k = 1; k <= 4; k *= 2) {
    const OscillatingDatum d = build_psi_k(mesh, norms, probe, k);
    CHECK(d.support_radius == doctest::Approx(kPsiSupport / k));
    CHECK(std::abs(norms.hs_norm(d.trace, 0.5) - 1.0) < 1e-10);
    for (int s = 0; s < mesh.num_boundary(); ++s) {
      if ((mesh.vertices[mesh.boundary_vertices[s]] - kTop).norm() >= d.support_radius) CHECK(d.trace(s) == 0.0);
    }
    ks.push_back(k);
    l2.push_back(norms.hs_norm(d.trace, 0.0));
    hm.push_back(norms.hs_norm(d.trace, -0.5));
  }
  for (size_t i = 1; i < ks.size(); ++i) {
    CHECK(l2[i] / l2[i - 1] == doctest::Approx(std::pow(2.0, -0.5)).epsilon(0.15));
    CHECK(hm[i] / hm[i - 1] == doctest::Approx(0.5).epsilon(0.15));
  }
  CHECK(std::abs(slope(ks, l2) + 0.5) <= 0.15);
  CHECK(std::abs(slope(ks, hm) + 1.0) <= 0.15);
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(0.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("kv estimator") {
  const Mesh mesh = build_cube_mesh(24);
  for (double c : {1.0, 2.5}) {
    const Probe probe = make_probe(DomainKind::cube, kTop);
    for (int k : {1, 2, 4}) CHECK(std::abs(kv_estimate_sigma(mesh, constant_conductivity(c), probe, k) - c) < 1e-10);
  }
  const Conductivity lin = affine_conductivity(Vec3(1, 0, 0), 1.0);
  const DtnQuadraticForm qs(mesh, lin), q1(mesh, constant_conductivity(1.0));
  const Probe right = make_probe(DomainKind::cube, Vec3(1.0, 0.5, 0.5));
  double previous = INFINITY;
  for (int k = 1; k <= max_resolvable_k(mesh); k *= 2) {
    const double err = std::abs(kv_estimate_sigma(qs, q1, psi_profile(mesh, right, k)) - 2.0) / 2.0;
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 0.1);
  // ordering follows sigma(x0): 1 at x1 = 0, 1.5 on the top face, 2 at x1 = 1
  const double a = kv_estimate_sigma(qs, q1, psi_profile(mesh, make_probe(DomainKind::cube, Vec3(0, 0.5, 0.5)), 4));
  const double b = kv_estimate_sigma(qs, q1, psi_profile(mesh, make_probe(DomainKind::cube, kTop), 4));
  const double c = kv_estimate_sigma(qs, q1, psi_profile(mesh, right, 4));
  CHECK(a < b);
  CHECK(b < c);
  CHECK_THROWS_AS(kv_estimate_sigma(qs, q1, Vector::Zero(mesh.num_boundary())), Error);
}

TEST_CASE("singular estimator on constants") {
  const Mesh mesh = build_cube_mesh(24);
  const Probe probe = make_probe(DomainKind::cube, kTop);
  CHECK(std::abs(singular_estimate_sigma(mesh, constant_conductivity(1.0), probe, 0.1).sigma_hat - 1.0) < 1e-9);
  const auto s = singular_estimate_sigma(mesh, constant_conductivity(2.0), probe, 0.1);
  CHECK(s.sigma_hat == doctest::Approx(2.0).epsilon(0.1));
  CHECK(s.energy_sigma == doctest::Approx(2.0 * s.energy_one).epsilon(1e-12));
}

TEST_CASE("singular estimator trend and agreement with kv") {
  const Mesh mesh = build_cube_mesh(48);
  const Conductivity lin = affine_conductivity(Vec3(1, 0, 0), 1.0);
  const DtnQuadraticForm qs(mesh, lin), q1(mesh, constant_conductivity(1.0));
  const Probe probe = make_probe(DomainKind::cube, Vec3(1.0, 0.5, 0.5));
  const double e1 = std::abs(singular_estimate_sigma(mesh, qs, q1, make_pole(DomainKind::cube, probe, 0.1)).sigma_hat - 2.0);
  const double s2 = singular_estimate_sigma(mesh, qs, q1, make_pole(DomainKind::cube, probe, 0.05)).sigma_hat;
  CHECK(std::abs(s2 - 2.0) < e1);
  const double kv = kv_estimate_sigma(qs, q1, psi_profile(mesh, probe, max_resolvable_k(mesh)));
  CHECK(std::abs(kv - s2) / kv < 0.15);
}

TEST_CASE("exterior decay diagnostics") {
  const Mesh mesh = build_cube_mesh(48);
  const LanczosTraceNorm norms(mesh);
  const Probe probe = make_probe(DomainKind::cube, kTop);
  CHECK_THROWS_AS(exterior_decay_profile(mesh, constant_conductivity(1.0), norms, probe, {2}, {0.25}), Error);
  const auto wide = exterior_decay_profile(mesh, constant_conductivity(1.0), norms, probe, {2, 4, 8}, {0.5});
  // lower bound of the local gradient mass, and the distance-weighted rate
  std::vector<double> ks, dw;
  double floor_fine = INFINITY;
  for (const auto& w : wide) {
    floor_fine = std::min(floor_fine, w.grad_inside + 1.0 / (w.rho * w.k) + 1.0 / w.k);
    ks.push_back(w.k);
    dw.push_back(w.dist_weighted_inside);
  }
  CHECK(std::abs(slope(ks, dw) + 1.0) <= 0.3);
  const Mesh coarse = build_cube_mesh(24);
  const LanczosTraceNorm cn(coarse);
  double floor_coarse = INFINITY;
  for (const auto& w : exterior_decay_profile(coarse, constant_conductivity(1.0), cn, probe, {2, 4}, {0.5})) {
    floor_coarse = std::min(floor_coarse, w.grad_inside + 1.0 / (w.rho * w.k) + 1.0 / w.k);
  }
  CHECK(floor_fine > 0.5);
  CHECK(floor_fine == doctest::Approx(floor_coarse).epsilon(0.2));
  // constant conductivities share their harmonic extensions
  const auto doubled = exterior_decay_profile(coarse, constant_conductivity(2.0), cn, probe, {2, 4}, {0.5});
  const auto single = exterior_decay_profile(coarse, constant_conductivity(1.0), cn, probe, {2, 4}, {0.5});
  for (size_t i = 0; i < doubled.size(); ++i) {
    CHECK(doubled[i].h1_outside <= 4.0 * single[i].h1_outside);
    CHECK(single[i].h1_outside <= 4.0 * doubled[i].h1_outside);
  }
}

TEST_CASE("stability sweep") {
  const Mesh mesh = build_cube_mesh(8);
  const TraceBasis basis(mesh);
  const Conductivity one = constant_conductivity(1.0);
  CHECK_THROWS_AS(stability_sweep(mesh, basis, {}), Error);
  std::vector<ConductivityPair> pairs = {{"same", one, one, 1.0}};
  for (double t : {0.4, 0.2, 0.1, 0.05}) {
    pairs.push_back({"t" + std::to_string(t), gaussian_bump(Vec3(0.5, 0.5, 0.8), 0.3, t), one, 1.0});
  }
  const StabilitySweep sweep = stability_sweep(mesh, basis, pairs);
  REQUIRE(sweep.records.size() == 5);
  CHECK(sweep.records[0].sup_gap == 0.0);
  CHECK(sweep.records[0].normal_gap == 0.0);
  CHECK(sweep.records[0].dtn_gap == 0.0);
  for (const auto& r : sweep.records) {
    CHECK(std::isfinite(r.dtn_gap));
    CHECK(r.sup_gap >= 0.0);
  }
  REQUIRE(sweep.sup_fit);
  CHECK(sweep.sup_fit->slope >= 0.9);
  REQUIRE(sweep.normal_fit);
  CHECK(sweep.normal_fit->slope >= 0.35);
  const auto [sup, normal] = boundary_gaps(DomainKind::cube, constant_conductivity(1.5), one);
  CHECK(sup == doctest::Approx(0.5));
  CHECK(normal == 0.0);
}

TEST_CASE("halving rho raises the exterior norm by at most 2.5") {
  const Mesh mesh = build_cube_mesh(48);
  const LanczosTraceNorm norms(mesh);
  const Probe probe = make_probe(DomainKind::cube, kTop);
  const auto wide = exterior_decay_profile(mesh, constant_conductivity(1.0), norms, probe, {4, 8}, {0.5});
  const auto narrow = exterior_decay_profile(mesh, constant_conductivity(1.0), norms, probe, {4, 8}, {0.25});
  for (const auto& n : narrow) {
    for (const auto& w : wide) {
      if (w.k == n.k) CHECK(n.h1_outside <= 2.5 * w.h1_outside);
    }
  }
}
