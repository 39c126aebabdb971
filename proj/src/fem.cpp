#include "dtnlab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dtnlab/error.hpp"
#include "factor.hpp"

namespace dtnlab {

Field interpolate(const Mesh& mesh, const ScalarField& f) {
  Field u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) u(v) = f(mesh.vertices[v]);
  return u;
}

Vector boundary_trace(const Mesh& mesh, const ScalarField& f) {
  Vector g(mesh.num_boundary());
  for (int s = 0; s < mesh.num_boundary(); ++s) g(s) = f(mesh.vertices[mesh.boundary_vertices[s]]);
  return g;
}

Vector restrict_to_boundary(const Mesh& mesh, const Field& u) {
  Vector g(mesh.num_boundary());
  for (int s = 0; s < mesh.num_boundary(); ++s) g(s) = u(mesh.boundary_vertices[s]);
  return g;
}

std::vector<TetGeometry> tet_geometry(const Mesh& mesh) {
  std::vector<TetGeometry> out(mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets[t];
    const Vec3& p0 = mesh.vertices[v[0]];
    Mat3 jac;
    jac.col(0) = mesh.vertices[v[1]] - p0;
    jac.col(1) = mesh.vertices[v[2]] - p0;
    jac.col(2) = mesh.vertices[v[3]] - p0;
    const double det = jac.determinant();
    if (!(det > 0.0)) throw Error(ErrorKind::degenerate_mesh, "non-positive tet volume in tet " + std::to_string(t));
    const Mat3 inv = jac.inverse();
    TetGeometry& g = out[t];
    g.volume = det / 6.0;
    g.grad[1] = inv.row(0).transpose();
    g.grad[2] = inv.row(1).transpose();
    g.grad[3] = inv.row(2).transpose();
    g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  }
  return out;
}

std::vector<double> tet_sigma(const Mesh& mesh, const Conductivity& cond) {
  std::vector<double> c(mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) c[t] = cond.sigma(mesh.centroid(t));
  return c;
}

std::vector<Mat3> tet_sigma_matrix(const Mesh& mesh, const Conductivity& cond) {
  std::vector<Mat3> c(mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const Vec3 x = mesh.centroid(t);
    c[t] = cond.sigma(x) * (cond.matrix_A ? cond.matrix_A(x) : Mat3::Identity());
  }
  return c;
}

namespace {

template <class CoefficientAt>
SparseMatrix assemble_stiffness_impl(const Mesh& mesh, CoefficientAt&& bilinear) {
  const auto geom = tet_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.tets.size() * 16);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets[t];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trip.emplace_back(v[a], v[b], geom[t].volume * bilinear(t, geom[t].grad[a], geom[t].grad[b]));
  }
  SparseMatrix k(mesh.num_vertices(), mesh.num_vertices());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<double>& c) {
  if (c.size() != mesh.tets.size()) throw Error(ErrorKind::shape, "one coefficient per tet expected");
  return assemble_stiffness_impl(mesh, [&](int t, const Vec3& ga, const Vec3& gb) { return c[t] * ga.dot(gb); });
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<Mat3>& c) {
  if (c.size() != mesh.tets.size()) throw Error(ErrorKind::shape, "one coefficient per tet expected");
  return assemble_stiffness_impl(mesh, [&](int t, const Vec3& ga, const Vec3& gb) { return ga.dot(c[t] * gb); });
}

SparseMatrix assemble_mass(const Mesh& mesh, const ScalarField& weight) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.tets.size() * 16);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const double vol = mesh.tet_volume(t);
    if (!(vol > 0.0)) throw Error(ErrorKind::degenerate_mesh, "non-positive tet volume in tet " + std::to_string(t));
    const double w = weight ? weight(mesh.centroid(t)) : 1.0;
    const auto& v = mesh.tets[t];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trip.emplace_back(v[a], v[b], w * vol * (a == b ? 0.1 : 0.05));
  }
  SparseMatrix m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

FemForms assemble_forms(const Mesh& mesh, const Conductivity& cond) {
  const double floor = 1.0 / cond.kappa;
  for (const auto& v : mesh.vertices) {
    if (!(cond.sigma(v) >= floor * (1.0 - 1e-12))) {
      throw Error(ErrorKind::ellipticity, cond.id + " drops below 1/kappa on mesh " + mesh.id);
    }
  }
  FemForms forms;
  forms.stiffness = cond.anisotropic() ? assemble_stiffness(mesh, tet_sigma_matrix(mesh, cond))
                                       : assemble_stiffness(mesh, tet_sigma(mesh, cond));
  forms.mass = assemble_mass(mesh);
  return forms;
}

DenseMatrix assemble_boundary_mass(const Mesh& mesh,
                                   const std::function<double(const Vec3&, const Vec3&)>& weight) {
  const int nb = mesh.num_boundary();
  DenseMatrix m = DenseMatrix::Zero(nb, nb);
  for (const auto& f : mesh.boundary_faces) {
    const Vec3& a = mesh.vertices[f.v[0]];
    const Vec3& b = mesh.vertices[f.v[1]];
    const Vec3& c = mesh.vertices[f.v[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double w = weight ? weight((a + b + c) / 3.0, f.normal) : 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        m(mesh.boundary_slot[f.v[i]], mesh.boundary_slot[f.v[j]]) += w * area / 12.0 * (i == j ? 2.0 : 1.0);
      }
  }
  return m;
}

struct DirichletSolver::Impl {
  std::unique_ptr<detail::SymmetricFactor> factor;
};

DirichletSolver::DirichletSolver(const Mesh& mesh, SparseMatrix form)
    : mesh_(&mesh), form_(std::move(form)), impl_(std::make_unique<Impl>()) {
  const int n = mesh.num_vertices();
  if (form_.rows() != n || form_.cols() != n) throw Error(ErrorKind::shape, "form size does not match the mesh");
  std::vector<int> interior_slot(n, -1);
  for (size_t i = 0; i < mesh.interior_vertices.size(); ++i) interior_slot[mesh.interior_vertices[i]] = static_cast<int>(i);
  const int ni = static_cast<int>(mesh.interior_vertices.size());
  const int nb = mesh.num_boundary();
  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int col = 0; col < form_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(form_, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int ri = interior_slot[r];
      if (ri < 0) continue;
      const int ci = interior_slot[col];
      if (ci >= 0) {
        ii.emplace_back(ri, ci, it.value());
      } else {
        ib.emplace_back(ri, mesh.boundary_slot[col], it.value());
      }
    }
  }
  interior_.resize(ni, ni);
  interior_.setFromTriplets(ii.begin(), ii.end());
  coupling_.resize(ni, nb);
  coupling_.setFromTriplets(ib.begin(), ib.end());
  if (ni == 0) {
    pivot_ratio_ = 1.0;
    return;
  }
  impl_->factor = std::make_unique<detail::SymmetricFactor>(interior_);
  pivot_ratio_ = impl_->factor->pivot_ratio();
  negative_pivots_ = impl_->factor->negative_pivots();
  if (!(pivot_ratio_ > 1e-14)) {
    throw Error(ErrorKind::solver_failure, "interior block is numerically singular");
  }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

Vector DirichletSolver::solve_interior(const Vector& rhs) const {
  if (rhs.size() != interior_.rows()) throw Error(ErrorKind::shape, "interior right-hand side has the wrong size");
  if (rhs.size() == 0) return rhs;
  return impl_->factor->solve(rhs);
}

Field DirichletSolver::solve(const Vector& g) const {
  const Mesh& mesh = *mesh_;
  if (g.size() != mesh.num_boundary()) throw Error(ErrorKind::shape, "boundary data has the wrong size");
  if (!g.allFinite()) throw Error(ErrorKind::domain, "boundary data must be finite");
  Field u(mesh.num_vertices());
  for (int s = 0; s < mesh.num_boundary(); ++s) u(mesh.boundary_vertices[s]) = g(s);
  if (interior_.rows() > 0) {
    const Vector x = solve_interior(-(coupling_ * g));
    for (size_t i = 0; i < mesh.interior_vertices.size(); ++i) u(mesh.interior_vertices[i]) = x(static_cast<int>(i));
  }
  return u;
}

DenseMatrix DirichletSolver::schur_complement() const {
  const Mesh& mesh = *mesh_;
  const int nb = mesh.num_boundary();
  DenseMatrix lambda = DenseMatrix::Zero(nb, nb);
  for (int col = 0; col < form_.outerSize(); ++col) {
    const int cs = mesh.boundary_slot[col];
    if (cs < 0) continue;
    for (SparseMatrix::InnerIterator it(form_, col); it; ++it) {
      const int rs = mesh.boundary_slot[it.row()];
      if (rs >= 0) lambda(rs, cs) += it.value();
    }
  }
  if (interior_.rows() == 0) return lambda;
  constexpr int block = 128;
  const SparseMatrix coupling_t = coupling_.transpose();
  for (int start = 0; start < nb; start += block) {
    const int width = std::min(block, nb - start);
    const DenseMatrix rhs = DenseMatrix(coupling_.middleCols(start, width));
    const DenseMatrix x = impl_->factor->solve(rhs);
    lambda.middleCols(start, width) -= coupling_t * x;
  }
  return lambda;
}

Field solve_dirichlet(const Mesh& mesh, const Conductivity& cond, const Vector& g) {
  DirichletSolver solver(mesh, assemble_forms(mesh, cond).stiffness);
  return solver.solve(g);
}

double energy(const Mesh& mesh, const Conductivity& cond, const Field& u) {
  if (u.size() != mesh.num_vertices()) throw Error(ErrorKind::shape, "field size does not match the mesh");
  const SparseMatrix k = assemble_forms(mesh, cond).stiffness;
  return u.dot(k * u);
}

SparseMatrix schrodinger_form(const Mesh& mesh, const ScalarField& q) {
  const SparseMatrix k = assemble_stiffness(mesh, std::vector<double>(mesh.tets.size(), 1.0));
  return k + assemble_mass(mesh, q);
}

Field solve_schrodinger(const Mesh& mesh, const ScalarField& q, const Vector& g) {
  try {
    DirichletSolver solver(mesh, schrodinger_form(mesh, q));
    if (solver.pivot_ratio() < 1e-12) {
      throw Error(ErrorKind::resonance, "-Laplace + q is near-singular (condition estimate " +
                                            std::to_string(1.0 / solver.pivot_ratio()) + ")");
    }
    return solver.solve(g);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::solver_failure) throw Error(ErrorKind::resonance, e.what());
    throw;
  }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a, bool symmetric) {
  std::vector<std::tuple<int, int, double>> entries;
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      if (symmetric && it.row() < col) continue;
      entries.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return std::get<1>(x) != std::get<1>(y) ? std::get<1>(x) < std::get<1>(y) : std::get<0>(x) < std::get<0>(y);
  });
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
  out << a.rows() << ' ' << a.cols() << ' ' << entries.size() << '\n';
  char buf[64];
  for (const auto& [r, c, v] : entries) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, c + 1, v);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::io, "matrix market write failed");
}

}  // namespace dtnlab
