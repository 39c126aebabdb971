#include "dtnlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dtnlab/error.hpp"

namespace dtnlab {

namespace {

constexpr double kCubeProbeRadius = 0.25;
constexpr double kBallProbeRadius = 0.25;
constexpr double kConeHalfAngle = std::numbers::pi / 4.0;
constexpr double kBallCollar = 0.9;
constexpr double kOnBoundaryTol = 1e-12;

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

struct FaceRecord {
  std::array<int, 3> key;
  int tet;
  int local;  // index of the opposite vertex within the tet
};

// The six Kuhn tets of a cell: paths 000 -> 111 along the permutations of
// the three axes. Corners are indexed by bit pattern (x | y<<1 | z<<2).
constexpr std::array<std::array<int, 4>, 6> kKuhnTets = {{
    {0, 1, 3, 7},
    {0, 1, 5, 7},
    {0, 2, 3, 7},
    {0, 2, 6, 7},
    {0, 4, 5, 7},
    {0, 4, 6, 7},
}};

Mesh structured_box(int m, double lo, double hi) {
  Mesh mesh;
  const int n = m + 1;
  mesh.vertices.reserve(static_cast<size_t>(n) * n * n);
  const double step = (hi - lo) / m;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        mesh.vertices.emplace_back(i == m ? hi : lo + i * step, j == m ? hi : lo + j * step,
                                   k == m ? hi : lo + k * step);
  auto vid = [n](int i, int j, int k) { return i + n * (j + n * k); };
  mesh.tets.reserve(static_cast<size_t>(6) * m * m * m);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        std::array<int, 8> corner{};
        for (int b = 0; b < 8; ++b) corner[b] = vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        for (const auto& t : kKuhnTets) {
          std::array<int, 4> tet{corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]};
          mesh.tets.push_back(tet);
        }
      }
  return mesh;
}

}  // namespace

std::string to_string(DomainKind kind) { return kind == DomainKind::cube ? "cube" : "ball"; }

DomainKind parse_domain_kind(const std::string& name) {
  if (name == "cube") return DomainKind::cube;
  if (name == "ball") return DomainKind::ball;
  throw Error(ErrorKind::usage, "unknown domain '" + name + "' (expected cube or ball)");
}

double Mesh::tet_volume(int t) const {
  const auto& v = tets[t];
  return signed_volume(vertices[v[0]], vertices[v[1]], vertices[v[2]], vertices[v[3]]);
}

Vec3 Mesh::centroid(int t) const {
  const auto& v = tets[t];
  return 0.25 * (vertices[v[0]] + vertices[v[1]] + vertices[v[2]] + vertices[v[3]]);
}

double Mesh::volume() const {
  double total = 0.0;
  for (int t = 0; t < num_tets(); ++t) total += tet_volume(t);
  return total;
}

double Mesh::boundary_cell_size() const {
  double area = 0.0;
  for (const auto& f : boundary_faces) {
    area += 0.5 * (vertices[f.v[1]] - vertices[f.v[0]]).cross(vertices[f.v[2]] - vertices[f.v[0]]).norm();
  }
  return std::sqrt(2.0 * area / static_cast<double>(boundary_faces.size()));
}

void finalize_mesh(Mesh& mesh) {
  // orientation and edge lengths
  double h = 0.0;
  for (auto& t : mesh.tets) {
    const double vol = signed_volume(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                                     mesh.vertices[t[3]]);
    if (vol < 0.0) std::swap(t[2], t[3]);
    if (!(std::abs(vol) > 0.0)) throw Error(ErrorKind::degenerate_mesh, "tet with zero volume");
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) h = std::max(h, (mesh.vertices[t[a]] - mesh.vertices[t[b]]).norm());
  }
  mesh.h = h;

  std::vector<FaceRecord> faces;
  faces.reserve(mesh.tets.size() * 4);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets[t];
    for (int local = 0; local < 4; ++local) {
      std::array<int, 3> key{};
      int c = 0;
      for (int a = 0; a < 4; ++a)
        if (a != local) key[c++] = v[a];
      std::sort(key.begin(), key.end());
      faces.push_back({key, t, local});
    }
  }
  std::sort(faces.begin(), faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
    return a.key != b.key ? a.key < b.key : a.tet < b.tet;
  });

  mesh.boundary_faces.clear();
  for (size_t i = 0; i < faces.size();) {
    size_t j = i + 1;
    while (j < faces.size() && faces[j].key == faces[i].key) ++j;
    if (j - i > 2) throw Error(ErrorKind::degenerate_mesh, "face shared by more than two tets");
    if (j - i == 1) {
      const auto& rec = faces[i];
      BoundaryFace face;
      face.v = rec.key;
      face.tet = rec.tet;
      const Vec3& a = mesh.vertices[face.v[0]];
      Vec3 n = (mesh.vertices[face.v[1]] - a).cross(mesh.vertices[face.v[2]] - a);
      const Vec3& opposite = mesh.vertices[mesh.tets[rec.tet][rec.local]];
      if (n.dot(opposite - a) > 0.0) {
        std::swap(face.v[1], face.v[2]);
        n = -n;
      }
      face.normal = n.normalized();
      mesh.boundary_faces.push_back(face);
    }
    i = j;
  }

  std::vector<char> on_boundary(mesh.vertices.size(), 0);
  for (const auto& f : mesh.boundary_faces)
    for (int v : f.v) on_boundary[v] = 1;
  mesh.boundary_vertices.clear();
  mesh.interior_vertices.clear();
  mesh.boundary_slot.assign(mesh.vertices.size(), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (on_boundary[v]) {
      mesh.boundary_slot[v] = static_cast<int>(mesh.boundary_vertices.size());
      mesh.boundary_vertices.push_back(v);
    } else {
      mesh.interior_vertices.push_back(v);
    }
  }
}

Mesh build_cube_mesh(int m) {
  if (m < 2) throw Error(ErrorKind::invalid_resolution, "cube mesh needs m >= 2, got " + std::to_string(m));
  Mesh mesh = structured_box(m, 0.0, 1.0);
  mesh.domain = DomainKind::cube;
  mesh.id = "cube-m" + std::to_string(m);
  finalize_mesh(mesh);
  return mesh;
}

int ball_parent_cells(int level) { return 4 * level; }

Mesh build_ball_mesh(int level) {
  if (level < 1) throw Error(ErrorKind::invalid_resolution, "ball mesh needs level >= 1, got " + std::to_string(level));
  const int m = ball_parent_cells(level);
  Mesh mesh = structured_box(m, -1.0, 1.0);
  const int half = m / 2;
  const int n = m + 1;
  // Shell index s = max(|i-half|, |j-half|, |k-half|) is exact in integers, so
  // outer-shell vertices land on the unit sphere to rounding.
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int s = std::max({std::abs(i - half), std::abs(j - half), std::abs(k - half)});
        Vec3& p = mesh.vertices[i + n * (j + n * k)];
        if (s == 0) {
          p.setZero();
          continue;
        }
        const double radius = static_cast<double>(s) / half;
        const Vec3 u(static_cast<double>(i - half) / s, static_cast<double>(j - half) / s,
                     static_cast<double>(k - half) / s);
        // equiangular (gnomonic) spread on each cube face
        Vec3 q(std::tan(std::numbers::pi / 4.0 * u.x()), std::tan(std::numbers::pi / 4.0 * u.y()),
               std::tan(std::numbers::pi / 4.0 * u.z()));
        p = radius * q.normalized();
      }
  mesh.domain = DomainKind::ball;
  mesh.id = "ball-l" + std::to_string(level);
  finalize_mesh(mesh);
  return mesh;
}

double domain_volume(DomainKind kind) {
  return kind == DomainKind::cube ? 1.0 : 4.0 * std::numbers::pi / 3.0;
}

bool domain_contains(DomainKind kind, const Vec3& x, double tol) {
  if (kind == DomainKind::cube) return (x.array() >= -tol).all() && (x.array() <= 1.0 + tol).all();
  return x.norm() <= 1.0 + tol;
}

double distance_to_boundary(DomainKind kind, const Vec3& x) {
  if (kind == DomainKind::cube) {
    double d = 1.0;
    for (int i = 0; i < 3; ++i) d = std::min({d, x[i], 1.0 - x[i]});
    return std::max(d, 0.0);
  }
  return std::max(1.0 - x.norm(), 0.0);
}

double exterior_distance(DomainKind kind, const Vec3& x) { return (x - closest_point(kind, x)).norm(); }

Vec3 closest_point(DomainKind kind, const Vec3& x) {
  if (kind == DomainKind::cube) return x.cwiseMax(0.0).cwiseMin(1.0);
  const double r = x.norm();
  return r > 1.0 ? Vec3(x / r) : x;
}

Vec3 outward_normal(DomainKind kind, const Vec3& p) {
  if (kind == DomainKind::ball) return p.normalized();
  Vec3 n = Vec3::Zero();
  int hits = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(p[i]) <= kOnBoundaryTol) {
      n[i] = -1.0;
      ++hits;
    } else if (std::abs(p[i] - 1.0) <= kOnBoundaryTol) {
      n[i] = 1.0;
      ++hits;
    }
  }
  if (hits != 1) throw Error(ErrorKind::ambiguous_projection, "cube normal undefined off the open faces");
  return n;
}

Projection project_to_boundary(DomainKind kind, const Vec3& x) {
  if (!domain_contains(kind, x)) throw Error(ErrorKind::domain, "projection needs a point of the domain");
  if (kind == DomainKind::ball) {
    const double r = x.norm();
    if (r == 0.0) throw Error(ErrorKind::ambiguous_projection, "the ball centre has no unique projection");
    const Vec3 nu = x / r;
    return {nu, 1.0 - r, nu};
  }
  std::array<double, 6> dist{x[0], 1.0 - x[0], x[1], 1.0 - x[1], x[2], 1.0 - x[2]};
  int best = 0;
  for (int f = 1; f < 6; ++f)
    if (dist[f] < dist[best]) best = f;
  for (int f = 0; f < 6; ++f) {
    if (f != best && dist[f] <= dist[best]) {
      throw Error(ErrorKind::ambiguous_projection, "point equidistant to two cube faces");
    }
  }
  const int axis = best / 2;
  const bool upper = best % 2 == 1;
  Vec3 p = x;
  p[axis] = upper ? 1.0 : 0.0;
  Vec3 nu = Vec3::Zero();
  nu[axis] = upper ? 1.0 : -1.0;
  return {p, dist[best], nu};
}

bool in_collar(DomainKind kind, const Vec3& x) {
  if (!domain_contains(kind, x)) return false;
  if (kind == DomainKind::ball) return x.norm() > 1.0 - kBallCollar;
  Projection proj;
  try {
    proj = project_to_boundary(kind, x);
  } catch (const Error&) {
    return false;
  }
  double edge = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (proj.normal[i] != 0.0) continue;
    edge = std::min({edge, proj.point[i], 1.0 - proj.point[i]});
  }
  return proj.distance < 0.5 * edge;
}

Probe make_probe(DomainKind kind, const Vec3& x0) {
  Probe probe;
  probe.x0 = x0;
  probe.theta = kConeHalfAngle;
  if (kind == DomainKind::ball) {
    if (std::abs(x0.norm() - 1.0) > kOnBoundaryTol) throw Error(ErrorKind::geometry, "ball probe must lie on the unit sphere");
    probe.nu = x0.normalized();
    probe.R = kBallProbeRadius;
  } else {
    probe.nu = outward_normal(kind, x0);
    double edge = 1.0;
    for (int i = 0; i < 3; ++i) {
      if (probe.nu[i] != 0.0) continue;
      edge = std::min({edge, x0[i], 1.0 - x0[i]});
    }
    if (!(edge > 0.0)) throw Error(ErrorKind::geometry, "cube probe must lie in an open face");
    probe.R = std::min(edge, kCubeProbeRadius);
  }
  probe.xi_plus = -probe.nu;
  probe.xi_minus = probe.nu;
  return probe;
}

namespace {
bool in_cone(const Probe& probe, const Vec3& axis, const Vec3& x) {
  const Vec3 d = x - probe.x0;
  const double r = d.norm();
  return r > 0.0 && r < probe.R && d.dot(axis) > r * std::cos(probe.theta);
}
}  // namespace

bool in_interior_cone(const Probe& probe, const Vec3& x) { return in_cone(probe, probe.xi_plus, x); }
bool in_exterior_cone(const Probe& probe, const Vec3& x) { return in_cone(probe, probe.xi_minus, x); }

ConePoints cone_points(const Probe& probe, double delta) {
  if (!(delta > 0.0 && delta < probe.R / 2.0)) {
    throw Error(ErrorKind::cone_violation, "delta must lie in (0, R/2), got " + std::to_string(delta));
  }
  return {probe.x0 + 0.5 * delta * probe.xi_plus, probe.x0 + 0.5 * delta * probe.xi_minus};
}

std::vector<BoundarySample> sample_boundary(DomainKind kind, int n) {
  std::vector<BoundarySample> out;
  if (kind == DomainKind::ball) {
    out.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      Vec3 p(r * std::cos(phi), r * std::sin(phi), z);
      out.push_back({p, p});
    }
    return out;
  }
  const int side = std::max(2, static_cast<int>(std::ceil(std::sqrt(n / 6.0))));
  out.reserve(static_cast<size_t>(6) * side * side);
  for (int axis = 0; axis < 3; ++axis)
    for (int upper = 0; upper < 2; ++upper) {
      const int t1 = (axis + 1) % 3;
      const int t2 = (axis + 2) % 3;
      Vec3 nu = Vec3::Zero();
      nu[axis] = upper ? 1.0 : -1.0;
      for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) {
          Vec3 p;
          p[axis] = upper ? 1.0 : 0.0;
          p[t1] = static_cast<double>(a) / (side - 1);
          p[t2] = static_cast<double>(b) / (side - 1);
          out.push_back({p, nu});
        }
    }
  return out;
}

}  // namespace dtnlab
