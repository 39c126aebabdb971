#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "dtnlab/error.hpp"
#include "dtnlab/geometry.hpp"

using namespace dtnlab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::usage;
}

}  // namespace

TEST_CASE("cube mesh counts and volume") {
  const Mesh m2 = build_cube_mesh(2);
  CHECK(m2.num_vertices() == 27);
  CHECK(m2.num_tets() == 48);
  CHECK(m2.h == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
  for (int v : m2.boundary_vertices) {
    const Vec3& x = m2.vertices[v];
    CHECK((x.maxCoeff() == 1.0 || x.minCoeff() == 0.0));
  }
  const Mesh m4 = build_cube_mesh(4);
  CHECK(std::abs(m4.volume() - 1.0) < 1e-12);
  CHECK(m4.h == doctest::Approx(m2.h / 2).epsilon(1e-15));
  CHECK(kind_of([] { build_cube_mesh(1); }) == ErrorKind::invalid_resolution);
}

TEST_CASE("mesh invariants") {
  for (const Mesh& mesh : {build_cube_mesh(3), build_ball_mesh(1), build_ball_mesh(2)}) {
    for (int t = 0; t < mesh.num_tets(); ++t) CHECK(mesh.tet_volume(t) > 0.0);
    std::set<int> owners;
    for (const auto& f : mesh.boundary_faces) {
      CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
      const auto& tet = mesh.tets[f.tet];
      for (int v : f.v) CHECK(std::find(tet.begin(), tet.end(), v) != tet.end());
      // outward: the fourth vertex sits behind the face
      int other = -1;
      for (int v : tet)
        if (v != f.v[0] && v != f.v[1] && v != f.v[2]) other = v;
      CHECK((mesh.vertices[other] - mesh.vertices[f.v[0]]).dot(f.normal) < 0.0);
    }
  }
}

TEST_CASE("ball mesh boundary and volume") {
  double previous = 0.0;
  for (int level = 1; level <= 3; ++level) {
    const Mesh mesh = build_ball_mesh(level);
    for (int v : mesh.boundary_vertices) CHECK(std::abs(mesh.vertices[v].norm() - 1.0) < 1e-12);
    const double vol = mesh.volume();
    CHECK(vol < 4.0 * M_PI / 3.0);
    CHECK(vol > previous);
    previous = vol;
  }
  CHECK(kind_of([] { build_ball_mesh(0); }) == ErrorKind::invalid_resolution);
}

TEST_CASE("boundary projection") {
  const Projection p = project_to_boundary(DomainKind::cube, Vec3(0.5, 0.5, 0.3));
  CHECK((p.point - Vec3(0.5, 0.5, 0.0)).norm() < 1e-15);
  CHECK(p.distance == doctest::Approx(0.3));
  const Projection q = project_to_boundary(DomainKind::ball, Vec3(0, 0, 0.4));
  CHECK((q.point - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(q.distance == doctest::Approx(0.6));
  CHECK(kind_of([] { project_to_boundary(DomainKind::cube, Vec3(0.2, 0.2, 0.5)); }) ==
        ErrorKind::ambiguous_projection);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const DomainKind kind = i % 2 ? DomainKind::cube : DomainKind::ball;
    Vec3 x(u(rng), u(rng), u(rng));
    if (kind == DomainKind::ball) x = (x - Vec3::Constant(0.5)) * 1.1;
    if (kind == DomainKind::cube && !in_collar(kind, x)) continue;
    if (kind == DomainKind::ball && x.norm() < 1e-3) continue;
    const Projection pr = project_to_boundary(kind, x);
    CHECK((x - (pr.point - pr.distance * pr.normal)).norm() < 1e-12);
    for (double t : {0.25, 0.5, 1.0}) {
      const Projection pt = project_to_boundary(kind, pr.point - t * pr.distance * pr.normal);
      CHECK((pt.point - pr.point).norm() < 1e-12);
      CHECK(std::abs(pt.distance - t * pr.distance) < 1e-12);
    }
  }
}

TEST_CASE("probes and cone points") {
  const Probe face = make_probe(DomainKind::cube, Vec3(0.5, 0.5, 1.0));
  CHECK((face.xi_plus + face.nu).norm() < 1e-15);
  CHECK((face.xi_minus - face.nu).norm() < 1e-15);
  CHECK(face.R == doctest::Approx(0.25));
  const ConePoints c = cone_points(face, 0.1);
  CHECK(c.x_delta.z() == doctest::Approx(0.95));
  CHECK(exterior_distance(DomainKind::cube, c.y_delta) > 0.0);
  CHECK((c.x_delta - c.y_delta).norm() == doctest::Approx(0.1));
  CHECK(kind_of([&] { cone_points(face, 0.2); }) == ErrorKind::cone_violation);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<std::pair<DomainKind, Probe>> probes = {
      {DomainKind::cube, face}, {DomainKind::ball, make_probe(DomainKind::ball, Vec3(0, 0.6, 0.8))}};
  for (const auto& [kind, probe] : probes) {
    int inside = 0, outside = 0;
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x = probe.x0 + probe.R * Vec3(u(rng), u(rng), u(rng));
      if (in_interior_cone(probe, x) && (x - probe.x0).norm() > 1e-9) {
        CHECK(domain_contains(kind, x));
        ++inside;
      }
      if (in_exterior_cone(probe, x) && (x - probe.x0).norm() > 1e-9) {
        CHECK(exterior_distance(kind, x) > 0.0);
        ++outside;
      }
    }
    CHECK(inside > 0);
    CHECK(outside > 0);
  }
}

TEST_CASE("mesh text round trip") {
  const Mesh mesh = build_ball_mesh(1);
  std::stringstream s;
  write_mesh(s, mesh);
  const Mesh back = read_mesh(s);
  CHECK(back.num_vertices() == mesh.num_vertices());
  CHECK(back.num_tets() == mesh.num_tets());
  CHECK(back.boundary_vertices == mesh.boundary_vertices);
  for (int v = 0; v < mesh.num_vertices(); ++v) CHECK(back.vertices[v] == mesh.vertices[v]);
  std::stringstream bad("dtnlab-mesh 1\ndomain cube\nid x\nvertices 1\n0 0\n");
  CHECK(kind_of([&] { read_mesh(bad); }) == ErrorKind::io);
}
