#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "dtnlab/linalg.hpp"

namespace dtnlab {

/// The two model domains: the unit cube [0,1]^3 and the unit ball.
enum class DomainKind { cube, ball };

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(const std::string& name);

struct BoundaryFace {
  std::array<int, 3> v;  // oriented so that (v1-v0)x(v2-v0) points outward
  Vec3 normal;           // unit outward normal of the flat triangle
  int tet = -1;          // owning tetrahedron
};

/// Tetrahedral mesh of a model domain. Immutable after construction.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;  // positively oriented
  std::vector<BoundaryFace> boundary_faces;
  std::vector<int> boundary_vertices;  // sorted vertex ids
  std::vector<int> interior_vertices;  // sorted vertex ids
  std::vector<int> boundary_slot;      // vertex id -> index into boundary_vertices, or -1
  DomainKind domain = DomainKind::cube;
  double h = 0.0;  // longest edge
  std::string id;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }
  int num_boundary() const { return static_cast<int>(boundary_vertices.size()); }

  double tet_volume(int t) const;
  Vec3 centroid(int t) const;
  /// Sum of tet volumes.
  double volume() const;
  /// sqrt(2 * mean boundary triangle area); equals 1/m on the structured cube.
  double boundary_cell_size() const;
};

/// Structured mesh of [0,1]^3 with m cells per axis, six tets per cell.
Mesh build_cube_mesh(int m);

/// Ball mesh: cube shells of [-1,1]^3 mapped radially onto spheres. `level`
/// controls resolution (4*level cells per axis of the parent cube).
Mesh build_ball_mesh(int level);

/// Cells per axis of the parent cube used by build_ball_mesh(level).
int ball_parent_cells(int level);

/// Recomputes boundary structure and h from vertices/tets (used by builders
/// and by the text reader). Throws degenerate_mesh on non-positive tets.
void finalize_mesh(Mesh& mesh);

double domain_volume(DomainKind kind);
bool domain_contains(DomainKind kind, const Vec3& x, double tol = 0.0);
/// dist(x, Gamma) for x in the closed domain.
double distance_to_boundary(DomainKind kind, const Vec3& x);
/// dist(x, closure of the domain); zero inside.
double exterior_distance(DomainKind kind, const Vec3& x);
/// Nearest point of the closed domain.
Vec3 closest_point(DomainKind kind, const Vec3& x);
/// Outward unit normal at a boundary point. Throws ambiguous_projection on
/// cube edges and corners.
Vec3 outward_normal(DomainKind kind, const Vec3& p);

struct Projection {
  Vec3 point;     // p(x), the unique nearest boundary point
  double distance;
  Vec3 normal;    // outward normal at p(x)
};

/// Nearest-point projection onto the boundary. On the cube the nearest face
/// must be strictly closer than every other face; in the ball x != 0.
Projection project_to_boundary(DomainKind kind, const Vec3& x);

/// Collar where the projection is used: cube points whose depth is below half
/// the distance of p(x) to the nearest edge; ball points with depth < 0.9.
bool in_collar(DomainKind kind, const Vec3& x);

/// Boundary point with interior and exterior cones of radius R, half-angle theta.
struct Probe {
  Vec3 x0;
  Vec3 nu;
  Vec3 xi_plus;   // interior cone axis
  Vec3 xi_minus;  // exterior cone axis
  double R = 0.0;
  double theta = 0.0;
};

/// Probe at x0 with theta = pi/4. Cube: x0 must lie in an open face, and
/// R = min(distance to the face edges, 0.25). Ball: R = 0.25.
Probe make_probe(DomainKind kind, const Vec3& x0);

bool in_interior_cone(const Probe& probe, const Vec3& x);
bool in_exterior_cone(const Probe& probe, const Vec3& x);

struct ConePoints {
  Vec3 x_delta;  // x0 + (delta/2) xi_plus, inside
  Vec3 y_delta;  // x0 + (delta/2) xi_minus, outside
};

/// Throws cone_violation unless 0 < delta < R/2.
ConePoints cone_points(const Probe& probe, double delta);

struct BoundarySample {
  Vec3 point;
  Vec3 normal;
};

/// Deterministic dense sampling of Gamma with roughly n points. Cube samples
/// carry the normal of the face they were drawn from (edge points repeat once
/// per adjacent face).
std::vector<BoundarySample> sample_boundary(DomainKind kind, int n);

/// Plain-text mesh format, see docs/formats.md.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace dtnlab
