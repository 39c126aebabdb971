#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "dtnlab/error.hpp"
#include "dtnlab/geometry.hpp"

namespace dtnlab {

namespace {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw Error(ErrorKind::io, "mesh file: expected '" + expected + "', got '" + token + "'");
  }
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw Error(ErrorKind::io, std::string("mesh file: cannot read ") + what);
  return value;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "dtnlab-mesh 1\n";
  out << "domain " << to_string(mesh.domain) << "\n";
  out << "id " << mesh.id << "\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  for (const auto& v : mesh.vertices) {
    out << format_real(v.x()) << ' ' << format_real(v.y()) << ' ' << format_real(v.z()) << '\n';
  }
  out << "tets " << mesh.tets.size() << "\n";
  for (const auto& t : mesh.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "boundary_faces " << mesh.boundary_faces.size() << "\n";
  for (const auto& f : mesh.boundary_faces) {
    out << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2] << ' ' << format_real(f.normal.x()) << ' '
        << format_real(f.normal.y()) << ' ' << format_real(f.normal.z()) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "mesh write failed");
}

Mesh read_mesh(std::istream& in) {
  expect_token(in, "dtnlab-mesh");
  if (read_value<int>(in, "version") != 1) throw Error(ErrorKind::io, "unsupported mesh version");
  Mesh mesh;
  expect_token(in, "domain");
  mesh.domain = parse_domain_kind(read_value<std::string>(in, "domain"));
  expect_token(in, "id");
  mesh.id = read_value<std::string>(in, "id");
  expect_token(in, "vertices");
  const auto nv = read_value<size_t>(in, "vertex count");
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) {
    for (int i = 0; i < 3; ++i) v[i] = read_value<double>(in, "vertex coordinate");
  }
  expect_token(in, "tets");
  const auto nt = read_value<size_t>(in, "tet count");
  mesh.tets.resize(nt);
  for (auto& t : mesh.tets) {
    for (int i = 0; i < 4; ++i) {
      t[i] = read_value<int>(in, "tet index");
      if (t[i] < 0 || static_cast<size_t>(t[i]) >= nv) throw Error(ErrorKind::io, "tet index out of range");
    }
  }
  expect_token(in, "boundary_faces");
  const auto nf = read_value<size_t>(in, "face count");
  std::vector<BoundaryFace> stored(nf);
  for (auto& f : stored) {
    for (int i = 0; i < 3; ++i) f.v[i] = read_value<int>(in, "face index");
    for (int i = 0; i < 3; ++i) f.normal[i] = read_value<double>(in, "face normal");
  }
  finalize_mesh(mesh);
  if (mesh.boundary_faces.size() != nf) {
    throw Error(ErrorKind::io, "boundary face count does not match the tet connectivity");
  }
  return mesh;
}

}  // namespace dtnlab
