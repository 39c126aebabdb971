#include "dtnlab/kernels.hpp"

#include <cmath>
#include <random>

#include "dtnlab/error.hpp"

namespace dtnlab {

double sphere_area(int n) { return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n); }

KernelValue fundamental_h(const Vector& x, const Vector& y, int n) {
  if (n < 3) throw Error(ErrorKind::range, "dimension must be at least 3");
  if (x.size() != n || y.size() != n) throw Error(ErrorKind::shape, "points must have n coordinates");
  const Vector d = x - y;
  const double r = d.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::singularity, "fundamental solution evaluated at its pole");
  const double omega = sphere_area(n);
  KernelValue k;
  k.value = std::pow(r, 2.0 - n) / ((n - 2) * omega);
  k.gradient = -d / (omega * std::pow(r, n));
  return k;
}

double fundamental_h(const Vec3& x, const Vec3& y) {
  const double r = (x - y).norm();
  if (!(r > 0.0)) throw Error(ErrorKind::singularity, "fundamental solution evaluated at its pole");
  return 1.0 / (4.0 * M_PI * r);
}

Vec3 fundamental_h_gradient(const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::singularity, "fundamental solution evaluated at its pole");
  return -d / (4.0 * M_PI * r * r * r);
}

namespace {

struct PoleMatrix {
  Mat3 inverse;
  double sqrt_det;
};

PoleMatrix pole_matrix(const Conductivity& cond, const Vec3& y) {
  const Mat3 a = cond.matrix_A ? cond.matrix_A(y) : Mat3::Identity();
  Eigen::LLT<Mat3> llt(a);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::ellipticity, "A(y) is not positive definite");
  return {llt.solve(Mat3::Identity()), std::sqrt(a.determinant())};
}

}  // namespace

double anisotropic_parametrix(const Vec3& x, const Vec3& y, const Conductivity& cond) {
  const Vec3 d = x - y;
  if (!(d.norm() > 0.0)) throw Error(ErrorKind::singularity, "parametrix evaluated at its pole");
  const PoleMatrix p = pole_matrix(cond, y);
  const double q = d.dot(p.inverse * d);
  return 1.0 / (std::sqrt(q) * 4.0 * M_PI * cond.sigma(y) * p.sqrt_det);
}

Vec3 anisotropic_parametrix_gradient(const Vec3& x, const Vec3& y, const Conductivity& cond) {
  const Vec3 d = x - y;
  if (!(d.norm() > 0.0)) throw Error(ErrorKind::singularity, "parametrix evaluated at its pole");
  const PoleMatrix p = pole_matrix(cond, y);
  const Vec3 ad = p.inverse * d;
  const double q = d.dot(ad);
  return -ad / (4.0 * M_PI * cond.sigma(y) * p.sqrt_det * q * std::sqrt(q));
}

ParametrixBound parametrix_gradient_bound(DomainKind kind, const Conductivity& cond1, const Conductivity& cond2,
                                          const Vec3& y, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::usage, "need at least one sample");
  std::mt19937_64 rng(seed);
  const double lo = kind == DomainKind::cube ? 0.0 : -1.0;
  std::uniform_real_distribution<double> coord(lo, 1.0);
  ParametrixBound b{INFINITY, 0.0, 0.0, 0};
  while (b.samples < samples) {
    const Vec3 x(coord(rng), coord(rng), coord(rng));
    if (!domain_contains(kind, x)) continue;
    const double r = (x - y).norm();
    const Mat3 a = cond1.matrix_A ? cond1.matrix_A(x) : Mat3::Identity();
    const double v = anisotropic_parametrix_gradient(x, y, cond1).dot(a * anisotropic_parametrix_gradient(x, y, cond2));
    const double scaled = v * std::pow(r, 4.0);
    b.lower = std::min(b.lower, scaled);
    b.upper = std::max(b.upper, scaled);
    ++b.samples;
  }
  b.constant = b.lower > 0.0 ? std::max(b.upper, 1.0 / b.lower) : INFINITY;
  return b;
}

PoleConfig make_pole(DomainKind kind, const Probe& probe, double delta) {
  const ConePoints cp = cone_points(probe, delta);
  const double gap = exterior_distance(kind, cp.y_delta);
  if (!(gap >= 0.5 * delta * std::sin(probe.theta) * (1.0 - 1e-12))) {
    throw Error(ErrorKind::pole_placement, "pole is closer to the domain than the exterior cone allows");
  }
  return {cp.y_delta, probe, delta};
}

double pole_energy(const Mesh& mesh, const Vec3& y) {
  if (!(exterior_distance(mesh.domain, y) > 0.0)) {
    throw Error(ErrorKind::pole_placement, "pole lies in the closed domain");
  }
  double e = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) e += mesh.tet_volume(t) * fundamental_h_gradient(mesh.centroid(t), y).squaredNorm();
  return e;
}

double pole_energy(const Mesh& mesh, const PoleConfig& pole) { return pole_energy(mesh, pole.y); }

double singular_pairing_near_probe(const Mesh& mesh, const Conductivity& cond, const PoleConfig& pole, double r) {
  if (!(exterior_distance(mesh.domain, pole.y) > 0.0)) {
    throw Error(ErrorKind::pole_placement, "pole lies in the closed domain");
  }
  const Vector g = boundary_trace(mesh, [&](const Vec3& x) { return fundamental_h(x, pole.y); });
  const Field u = solve_dirichlet(mesh, cond, g);
  const auto geom = tet_geometry(mesh);
  double sum = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const Vec3 c = mesh.centroid(t);
    if ((c - pole.probe.x0).norm() >= r) continue;
    Vec3 grad = Vec3::Zero();
    for (int a = 0; a < 4; ++a) grad += u(mesh.tets[t][a]) * geom[t].grad[a];
    sum += geom[t].volume * grad.dot(fundamental_h_gradient(c, pole.y));
  }
  return sum;
}

double boundary_taylor_slack(DomainKind kind, const ScalarField& f, const VectorField& grad_f, double holder_bound,
                             double alpha, const Vec3& x0, const Vec3& x) {
  const double dnu = grad_f(x0).dot(outward_normal(kind, x0));
  if (!(dnu < 0.0)) throw Error(ErrorKind::usage, "the inequality needs -d_nu f(x0) > 0");
  if (!in_collar(kind, x)) throw Error(ErrorKind::ambiguous_projection, "point outside the projection collar");
  const Projection p = project_to_boundary(kind, x);
  const double rhs = f(x) - f(p.point) + 3.0 * holder_bound * std::pow((x - x0).norm(), 1.0 + alpha);
  return rhs - std::abs(dnu) * p.distance;
}

}  // namespace dtnlab
