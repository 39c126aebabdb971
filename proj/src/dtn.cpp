#include "dtnlab/dtn.hpp"

#include <cstdio>
#include <ostream>

#include <random>

#include "dtnlab/error.hpp"
#include "factor.hpp"

namespace dtnlab {

DtnOperator dtn_from_form(const Mesh& mesh, SparseMatrix form, const std::string& form_id) {
  DirichletSolver solver(mesh, std::move(form));
  DtnOperator op;
  op.matrix = solver.schur_complement();
  // symmetrise away the back-solve roundoff
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  op.cond_id = form_id;
  op.mesh_id = mesh.id;
  return op;
}

DtnOperator assemble_dtn(const Mesh& mesh, const Conductivity& cond) {
  return dtn_from_form(mesh, assemble_forms(mesh, cond).stiffness, cond.id);
}

AlessandriniResult alessandrini_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2,
                                         const DtnOperator& l1, const DtnOperator& l2, const Vector& g,
                                         const Vector& h) {
  if (l1.matrix.rows() != mesh.num_boundary() || l2.matrix.rows() != mesh.num_boundary()) {
    throw Error(ErrorKind::shape, "DtN operators do not match the mesh");
  }
  const SparseMatrix k1 = assemble_forms(mesh, cond1).stiffness;
  const SparseMatrix k2 = assemble_forms(mesh, cond2).stiffness;
  const Field u1 = DirichletSolver(mesh, k1).solve(g);
  const Field u2 = DirichletSolver(mesh, k2).solve(h);
  AlessandriniResult r;
  r.lhs = u2.dot((k1 - k2) * u1);
  r.rhs = h.dot((l1.matrix - l2.matrix) * g);
  return r;
}

AlessandriniResult alessandrini_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2,
                                         const Vector& g, const Vector& h) {
  return alessandrini_residual(mesh, cond1, cond2, assemble_dtn(mesh, cond1), assemble_dtn(mesh, cond2), g, h);
}

double dtn_diff_norm(const TraceBasis& basis, const DtnOperator& l1, const DtnOperator& l2, int modes) {
  if (l1.mesh_id != l2.mesh_id || l1.matrix.rows() != l2.matrix.rows()) {
    throw Error(ErrorKind::shape, "DtN operators live on different meshes (" + l1.mesh_id + ", " + l2.mesh_id + ")");
  }
  return basis.operator_norm_half(l1.matrix - l2.matrix, modes);
}

Vector steklov_spectrum(const Mesh& mesh, const Conductivity& cond, int count, double tol) {
  const int nb = mesh.num_boundary();
  const int n = mesh.num_vertices();
  if (count < 1 || count > nb) throw Error(ErrorKind::range, "eigenvalue count must lie in [1, boundary size]");
  const SparseMatrix mb = assemble_surface_mass_sparse(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < mb.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(mb, c); it; ++it)
      trip.emplace_back(mesh.boundary_vertices[it.row()], mesh.boundary_vertices[c], it.value());
  SparseMatrix shifted(n, n);
  shifted.setFromTriplets(trip.begin(), trip.end());
  shifted += assemble_forms(mesh, cond).stiffness;
  const detail::SymmetricFactor factor(shifted);

  // T g = P A^{-1} P^T M g, self-adjoint in the M inner product, eigenvalues 1/(lambda + 1)
  auto apply = [&](const Vector& g) {
    const Vector load_b = mb * g;
    Vector load = Vector::Zero(n);
    for (int s = 0; s < nb; ++s) load(mesh.boundary_vertices[s]) = load_b(s);
    const Vector x = factor.solve(load);
    Vector out(nb);
    for (int s = 0; s < nb; ++s) out(s) = x(mesh.boundary_vertices[s]);
    return out;
  };

  constexpr int block = 6;
  const int max_dim = std::min(nb, std::max(10 * count + 100, 300));
  DenseMatrix q(nb, max_dim), w(nb, max_dim);
  int dim = 0;
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  DenseMatrix next(nb, block);
  for (int i = 0; i < next.size(); ++i) next.data()[i] = normal(rng);

  while (true) {
    int added = 0;
    for (int j = 0; j < next.cols() && dim < max_dim; ++j) {
      Vector v = next.col(j);
      const double before = std::sqrt(v.dot(mb * v));
      for (int pass = 0; pass < 2; ++pass) {
        const Vector mv = mb * v;
        v -= q.leftCols(dim) * (q.leftCols(dim).transpose() * mv);
      }
      const double norm = std::sqrt(std::max(0.0, v.dot(mb * v)));
      if (!(norm > 1e-10 * before)) continue;  // numerically dependent
      q.col(dim) = v / norm;
      w.col(dim) = apply(q.col(dim));
      ++dim;
      ++added;
    }
    if (added == 0) throw Error(ErrorKind::spectral_failure, "Krylov space stopped growing");
    if (dim >= count + block) {
      const DenseMatrix mq = mb * q.leftCols(dim);
      DenseMatrix h = mq.transpose() * w.leftCols(dim);
      h = 0.5 * (h + h.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h);
      // largest theta first
      bool done = true;
      Vector lambda(count);
      for (int i = 0; i < count; ++i) {
        const int idx = dim - 1 - i;
        const double theta = eig.eigenvalues()(idx);
        const Vector y = eig.eigenvectors().col(idx);
        const Vector r = w.leftCols(dim) * y - theta * (q.leftCols(dim) * y);
        const double res = std::sqrt(std::max(0.0, r.dot(mb * r)));
        if (!(res <= tol * theta)) done = false;
        lambda(i) = 1.0 / theta - 1.0;
      }
      if (done) return lambda;
    }
    if (dim >= max_dim) throw Error(ErrorKind::non_convergence, "Steklov Krylov space exhausted before convergence");
    next = w.middleCols(dim - added, added);
  }
}

void write_dtn_matrix_market(std::ostream& out, const DtnOperator& op) {
  const auto n = op.matrix.rows();
  out << "%%MatrixMarket matrix array real symmetric\n";
  out << n << ' ' << n << '\n';
  char buf[32];
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", op.matrix(i, j));
      out << buf;
    }
  if (!out) throw Error(ErrorKind::io, "DtN matrix write failed");
}

void write_dtn_sidecar(std::ostream& out, const DtnOperator& op, const std::map<std::string, std::string>& extra) {
  out << "format=matrix-market-array-symmetric\n";
  out << "rows=" << op.matrix.rows() << "\n";
  out << "mesh_id=" << op.mesh_id << "\n";
  out << "conductivity=" << op.cond_id << "\n";
  for (const auto& [k, v] : extra) out << k << "=" << v << "\n";
  if (!out) throw Error(ErrorKind::io, "DtN sidecar write failed");
}

}  // namespace dtnlab
