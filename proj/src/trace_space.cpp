#include "dtnlab/trace_space.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dtnlab/error.hpp"
#include <Eigen/SparseCholesky>

#include "dtnlab/fem.hpp"

namespace dtnlab {

namespace {

double face_area(const Mesh& mesh, const BoundaryFace& f) {
  const Vec3& a = mesh.vertices[f.v[0]];
  const double area = 0.5 * (mesh.vertices[f.v[1]] - a).cross(mesh.vertices[f.v[2]] - a).norm();
  if (!(area > 0.0)) throw Error(ErrorKind::degenerate_mesh, "zero-area boundary face");
  return area;
}

}  // namespace

SparseMatrix assemble_surface_mass_sparse(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.boundary_faces.size() * 9);
  for (const auto& f : mesh.boundary_faces) {
    const double area = face_area(mesh, f);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.boundary_slot[f.v[i]], mesh.boundary_slot[f.v[j]], area / 12.0 * (i == j ? 2.0 : 1.0));
  }
  SparseMatrix m(mesh.num_boundary(), mesh.num_boundary());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix assemble_surface_stiffness_sparse(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.boundary_faces.size() * 9);
  for (const auto& f : mesh.boundary_faces) {
    const Vec3& a = mesh.vertices[f.v[0]];
    const Vec3& b = mesh.vertices[f.v[1]];
    const Vec3& c = mesh.vertices[f.v[2]];
    const double area = face_area(mesh, f);
    // edge opposite each vertex, oriented cyclically
    const std::array<Vec3, 3> e = {c - b, a - c, b - a};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.boundary_slot[f.v[i]], mesh.boundary_slot[f.v[j]], e[i].dot(e[j]) / (4.0 * area));
  }
  SparseMatrix s(mesh.num_boundary(), mesh.num_boundary());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

DenseMatrix assemble_surface_stiffness(const Mesh& mesh) { return DenseMatrix(assemble_surface_stiffness_sparse(mesh)); }

TraceBasis::TraceBasis(const Mesh& mesh) {
  if (mesh.num_boundary() < 4) throw Error(ErrorKind::shape, "trace basis needs at least 4 boundary vertices");
  mass_ = DenseMatrix(assemble_surface_mass_sparse(mesh));
  stiffness_ = assemble_surface_stiffness(mesh);
  GeneralizedEigen eig = generalized_symmetric_eigen(stiffness_, mass_);
  mu_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
  // the kernel is the constants; clamp roundoff
  mu_ = mu_.cwiseMax(0.0);
  if (vectors_.col(0).sum() < 0.0) vectors_.col(0) *= -1.0;
}

Vector TraceBasis::spectral_coefficients(const Vector& g) const {
  if (g.size() != size()) throw Error(ErrorKind::shape, "trace has the wrong size");
  return vectors_.transpose() * (mass_ * g);
}

namespace {

double weighted_norm(const Vector& mu, const Vector& coeff, double s) {
  if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorKind::range, "Sobolev index must lie in [-1,1]");
  double sum = 0.0;
  for (int i = 0; i < coeff.size(); ++i) sum += std::pow(1.0 + mu(i), s) * coeff(i) * coeff(i);
  return std::sqrt(sum);
}

}  // namespace

double TraceBasis::hs_norm(const Vector& g, double s) const {
  return weighted_norm(mu_, spectral_coefficients(g), s);
}

double TraceBasis::functional_norm(const Vector& f, double s) const {
  if (f.size() != size()) throw Error(ErrorKind::shape, "functional has the wrong size");
  return weighted_norm(mu_, vectors_.transpose() * f, s);
}

double TraceBasis::operator_norm_half(const DenseMatrix& t, int modes) const {
  if (t.rows() != size() || t.cols() != size()) {
    throw Error(ErrorKind::shape, "operator is " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                                      ", basis has " + std::to_string(size()) + " slots");
  }
  if (modes < 0 || modes > size()) throw Error(ErrorKind::range, "mode count must lie in [0, basis size]");
  const int n = modes == 0 ? size() : modes;
  const Vector w = (1.0 + mu_.head(n).array()).pow(-0.25).matrix();
  const auto e = vectors_.leftCols(n);
  DenseMatrix spectral = e.transpose() * t * e;
  spectral = w.asDiagonal() * spectral * w.asDiagonal();
  return largest_singular_value(spectral);
}

void TraceBasis::write_spectrum_csv(std::ostream& out) const {
  out << "index,mu\n";
  char buf[64];
  for (int i = 0; i < size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, mu_(i));
    out << buf;
  }
  if (!out) throw Error(ErrorKind::io, "spectrum write failed");
}

NormEquivalence norm_equivalence_eigenvalue(const Mesh& mesh, const TraceBasis& basis) {
  if (basis.size() != mesh.num_boundary()) throw Error(ErrorKind::shape, "basis does not match the mesh");
  const SparseMatrix k = assemble_stiffness(mesh, std::vector<double>(mesh.tets.size(), 1.0));
  const SparseMatrix m = assemble_mass(mesh);
  const Vector d = (1.0 + basis.eigenvalues().array()).pow(-0.5).matrix();
  const DenseMatrix me = basis.mass() * basis.eigenvectors();
  const DenseMatrix b = me * d.asDiagonal() * me.transpose();
  const int n = mesh.num_vertices();
  const int nb = mesh.num_boundary();
  auto apply = [&](const Vector& x) {
    Vector y = k * x;
    Vector xb(nb);
    for (int s = 0; s < nb; ++s) xb(s) = x(mesh.boundary_vertices[s]);
    const Vector yb = b * xb;
    for (int s = 0; s < nb; ++s) y(mesh.boundary_vertices[s]) += yb(s);
    return y;
  };
  Vector diag = k.diagonal();
  for (int s = 0; s < nb; ++s) diag(mesh.boundary_vertices[s]) += b(s, s);
  // preconditioned conjugate gradients for the SPD operator
  auto solve = [&](const Vector& rhs) {
    Vector x = Vector::Zero(n);
    Vector r = rhs;
    Vector z = r.cwiseQuotient(diag);
    Vector p = z;
    double rz = r.dot(z);
    const double stop = 1e-24 * rhs.squaredNorm();
    for (int it = 0; it < 20 * n && r.squaredNorm() > stop; ++it) {
      const Vector ap = apply(p);
      const double step = rz / p.dot(ap);
      x += step * p;
      r -= step * ap;
      z = r.cwiseQuotient(diag);
      const double next = r.dot(z);
      p = z + (next / rz) * p;
      rz = next;
    }
    if (r.squaredNorm() > stop * 1e4) throw Error(ErrorKind::non_convergence, "CG did not converge");
    return x;
  };
  Vector x = Vector::Ones(n);
  x /= std::sqrt(x.dot(m * x));
  double lambda = x.dot(apply(x));
  for (int it = 1; it <= 500; ++it) {
    Vector y = solve(m * x);
    y /= std::sqrt(y.dot(m * y));
    const double next = y.dot(apply(y));
    x = std::move(y);
    const bool settled = std::abs(next - lambda) <= 1e-12 * next;
    lambda = next;
    if (settled) return {lambda, it};
  }
  throw Error(ErrorKind::spectral_failure, "inverse iteration for the norm equivalence stagnated");
}

struct LanczosTraceNorm::Impl {
  Eigen::SimplicialLLT<SparseMatrix> mass_factor;
};

LanczosTraceNorm::LanczosTraceNorm(const Mesh& mesh, double tol)
    : mass_(assemble_surface_mass_sparse(mesh)), impl_(std::make_unique<Impl>()), tol_(tol) {
  if (mesh.num_boundary() < 4) throw Error(ErrorKind::shape, "trace norms need at least 4 boundary vertices");
  shifted_ = mass_ + assemble_surface_stiffness_sparse(mesh);
  impl_->mass_factor.compute(mass_);
  if (impl_->mass_factor.info() != Eigen::Success) throw Error(ErrorKind::spectral_failure, "boundary mass is not SPD");
}

LanczosTraceNorm::~LanczosTraceNorm() = default;

double LanczosTraceNorm::hs_norm(const Vector& g, double s) const {
  if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorKind::range, "Sobolev index must lie in [-1,1]");
  if (g.size() != size()) throw Error(ErrorKind::shape, "trace has the wrong size");
  const double beta0 = std::sqrt(g.dot(mass_ * g));
  if (beta0 == 0.0) return 0.0;
  if (s == 0.0) return beta0;
  const int n = size();
  const int max_steps = std::min(n, 2000);
  std::vector<Vector> q{g / beta0};
  std::vector<Vector> mq{mass_ * q[0]};
  std::vector<double> alpha, beta;
  double previous = -1.0;
  int settled = 0;
  for (int j = 0; j < max_steps; ++j) {
    Vector w = impl_->mass_factor.solve(shifted_ * q[j]);
    alpha.push_back(q[j].dot(shifted_ * q[j]));
    // full reorthogonalisation in the M inner product
    for (int pass = 0; pass < 2; ++pass)
      for (size_t i = 0; i < q.size(); ++i) w -= mq[i].dot(w) * q[i];
    const double b = std::sqrt(std::max(0.0, w.dot(mass_ * w)));
    const int dim = j + 1;
    const bool exhausted = b <= 1e-14 * std::sqrt(std::abs(alpha.back())) || dim == n;
    if (exhausted || dim % 8 == 0) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
      const Vector first = eig.eigenvectors().row(0).transpose();
      const double value = (first.array().square() * eig.eigenvalues().array().max(1.0).pow(s)).sum();
      if (exhausted) return beta0 * std::sqrt(value);
      if (previous > 0.0 && std::abs(value - previous) <= tol_ * value) {
        if (++settled == 2) return beta0 * std::sqrt(value);
      } else {
        settled = 0;
      }
      previous = value;
    }
    beta.push_back(b);
    q.push_back(w / b);
    mq.push_back(mass_ * q.back());
  }
  throw Error(ErrorKind::non_convergence, "Lanczos trace norm did not settle");
}

}  // namespace dtnlab
