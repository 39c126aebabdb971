#include "dtnlab/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "dtnlab/error.hpp"

namespace dtnlab {

namespace {

Vector interior_part(const Mesh& mesh, const Vector& full) {
  Vector r(static_cast<int>(mesh.interior_vertices.size()));
  for (size_t i = 0; i < mesh.interior_vertices.size(); ++i) r(static_cast<int>(i)) = full(mesh.interior_vertices[i]);
  return r;
}

Field from_interior(const Mesh& mesh, const Vector& x) {
  Field u = Field::Zero(mesh.num_vertices());
  for (size_t i = 0; i < mesh.interior_vertices.size(); ++i) u(mesh.interior_vertices[i]) = x(static_cast<int>(i));
  return u;
}

SparseMatrix unit_stiffness(const Mesh& mesh) {
  return assemble_stiffness(mesh, std::vector<double>(mesh.tets.size(), 1.0));
}

// sqrt(r^T A_II^{-1} r) for the interior rows r of a load vector.
double dual_norm(const DirichletSolver& riesz, const Mesh& mesh, const Vector& load) {
  const Vector r = interior_part(mesh, load);
  if (r.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, r.dot(riesz.solve_interior(r))));
}

}  // namespace

SchrodingerPotential q_from_sigma(const Conductivity& cond) {
  SchrodingerPotential p;
  p.source_cond_id = cond.id;
  p.clipped = std::make_shared<long>(0);
  const double floor = 1.0 / cond.kappa;
  auto clipped = p.clipped;
  p.q = [cond, floor, clipped](const Vec3& x) {
    double s = cond.sigma(x);
    if (s < floor) {
      if ((*clipped)++ == 0) std::cerr << "warning: sigma below 1/kappa near " << x.transpose() << ", clipped\n";
      s = floor;
    }
    return sqrt_sigma_laplacian(cond, x) / std::sqrt(s);
  };
  return p;
}

double h1_norm(const Mesh& mesh, const Field& u) {
  const SparseMatrix a = unit_stiffness(mesh) + assemble_mass(mesh);
  return std::sqrt(std::max(0.0, u.dot(a * u)));
}

double liouville_residual(const Mesh& mesh, const Conductivity& cond, const Vector& g) {
  const SchrodingerPotential q = q_from_sigma(cond);
  const Field v = solve_schrodinger(mesh, q.q, g);
  Vector scaled = g;
  for (int s = 0; s < mesh.num_boundary(); ++s) {
    scaled(s) /= std::sqrt(cond.sigma(mesh.vertices[mesh.boundary_vertices[s]]));
  }
  Field w = solve_dirichlet(mesh, cond, scaled);
  for (int i = 0; i < mesh.num_vertices(); ++i) w(i) *= std::sqrt(cond.sigma(mesh.vertices[i]));
  return h1_norm(mesh, v - w);
}

DtnOperator schrodinger_dtn(const Mesh& mesh, const Conductivity& cond) {
  const SchrodingerPotential q = q_from_sigma(cond);
  try {
    return dtn_from_form(mesh, schrodinger_form(mesh, q.q), "schrodinger[" + cond.id + "]");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::solver_failure) throw Error(ErrorKind::resonance, e.what());
    throw;
  }
}

DenseMatrix transformed_dtn(const Mesh& mesh, const Conductivity& cond, const DtnOperator& lambda_sigma) {
  const int nb = mesh.num_boundary();
  if (lambda_sigma.matrix.rows() != nb) throw Error(ErrorKind::shape, "DtN does not match the mesh");
  Vector scale(nb);
  for (int s = 0; s < nb; ++s) scale(s) = 1.0 / std::sqrt(cond.sigma(mesh.vertices[mesh.boundary_vertices[s]]));
  DenseMatrix rhs = scale.asDiagonal() * lambda_sigma.matrix * scale.asDiagonal();
  rhs += assemble_boundary_mass(mesh, [&](const Vec3& x, const Vec3& n) {
    return cond.grad_sigma(x).dot(n) / (2.0 * cond.sigma(x));
  });
  return rhs;
}

double transformed_dtn_residual(const Mesh& mesh, const TraceBasis& basis, const Conductivity& cond) {
  const DtnOperator dot = schrodinger_dtn(mesh, cond);
  const DenseMatrix rhs = transformed_dtn(mesh, cond, assemble_dtn(mesh, cond));
  return basis.operator_norm_half(dot.matrix - rhs);
}

double log_ratio_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2) {
  const SchrodingerPotential q1 = q_from_sigma(cond1);
  const SchrodingerPotential q2 = q_from_sigma(cond2);
  auto a = [&](const Vec3& x) { return std::sqrt(cond1.sigma(x) * cond2.sigma(x)); };
  const Field w = interpolate(mesh, [&](const Vec3& x) { return std::log(cond1.sigma(x) / cond2.sigma(x)); });
  const Field f = interpolate(mesh, [&](const Vec3& x) { return 2.0 * a(x) * (q1.q(x) - q2.q(x)); });
  std::vector<double> coeff(mesh.tets.size());
  for (int t = 0; t < mesh.num_tets(); ++t) coeff[t] = a(mesh.centroid(t));
  const SparseMatrix ka = assemble_stiffness(mesh, coeff);
  const SparseMatrix mass = assemble_mass(mesh);
  const Vector load = ka * w + mass * f;
  const DirichletSolver riesz(mesh, unit_stiffness(mesh) + mass);
  return dual_norm(riesz, mesh, load);
}

namespace {

struct InverseIteration {
  const Mesh& mesh;
  DirichletSolver solver;
  SparseMatrix k_ii;
  SparseMatrix m_ii;

  InverseIteration(const Mesh& m, const FemForms& forms)
      : mesh(m), solver(m, forms.stiffness), k_ii(interior_block(forms.stiffness)), m_ii(interior_block(forms.mass)) {}

  SparseMatrix interior_block(const SparseMatrix& a) const {
    std::vector<int> slot(mesh.num_vertices(), -1);
    for (size_t i = 0; i < mesh.interior_vertices.size(); ++i) slot[mesh.interior_vertices[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < a.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(a, c); it; ++it)
        if (slot[it.row()] >= 0 && slot[c] >= 0) trip.emplace_back(slot[it.row()], slot[c], it.value());
    const int n = static_cast<int>(mesh.interior_vertices.size());
    SparseMatrix b(n, n);
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
  }

  // Returns (lambda, x, iterations); x is M-normalised. The Rayleigh quotient
  // settles long before the vector, so a residual bound can be demanded too.
  std::tuple<double, Vector, int> run(Vector x, const Vector* deflate, double tol, double residual_tol = INFINITY) const {
    auto project = [&](Vector& v) {
      if (deflate) v -= deflate->dot(m_ii * v) * *deflate;
    };
    project(x);
    x /= std::sqrt(x.dot(m_ii * x));
    double lambda = x.dot(k_ii * x);
    for (int it = 1; it <= 5000; ++it) {
      Vector y = solver.solve_interior(m_ii * x);
      project(y);
      const double norm = std::sqrt(y.dot(m_ii * y));
      if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorKind::spectral_failure, "inverse iteration broke down");
      y /= norm;
      const double next = y.dot(k_ii * y);
      bool settled = std::abs(next - lambda) <= tol * std::abs(next);
      x = std::move(y);
      lambda = next;
      if (settled && std::isfinite(residual_tol)) settled = (k_ii * x - lambda * (m_ii * x)).norm() <= residual_tol;
      if (settled && it > 2) return {lambda, x, it};
    }
    throw Error(ErrorKind::spectral_failure, "inverse iteration stagnated");
  }
};

}  // namespace

EigenPair smallest_eigenpair(const Mesh& mesh, const Conductivity& cond) {
  if (mesh.interior_vertices.empty()) throw Error(ErrorKind::shape, "mesh has no interior vertices");
  const InverseIteration iter(mesh, assemble_forms(mesh, cond));
  auto [lambda, x, its] = iter.run(Vector::Ones(static_cast<int>(mesh.interior_vertices.size())), nullptr, 1e-14, 1e-10);
  if (x.sum() < 0.0) x = -x;
  EigenPair e;
  e.lambda1 = lambda;
  e.iterations = its;
  e.residual = (iter.k_ii * x - lambda * (iter.m_ii * x)).norm();
  e.phi1 = from_interior(mesh, x);
  return e;
}

double second_eigenvalue(const Mesh& mesh, const Conductivity& cond, const EigenPair& first) {
  const InverseIteration iter(mesh, assemble_forms(mesh, cond));
  const Vector phi = interior_part(mesh, first.phi1);
  Vector start(phi.size());
  // deterministic start with no symmetry
  for (int i = 0; i < start.size(); ++i) start(i) = std::sin(1.0 + 0.7 * i) + 0.3 * std::cos(0.13 * i * i);
  // clustered next eigenvalues converge slowly; the value only needs to
  // separate from lambda1
  return std::get<0>(iter.run(start, &phi, 1e-9));
}

DistanceRatio distance_ratio(const Mesh& mesh, const Field& phi) {
  DistanceRatio r{INFINITY, 0.0, 0};
  for (int v : mesh.interior_vertices) {
    const Vec3& x = mesh.vertices[v];
    if (!in_collar(mesh.domain, x)) continue;
    const double d = distance_to_boundary(mesh.domain, x);
    if (!(d > 0.0)) continue;
    const double q = phi(v) / d;
    r.min = std::min(r.min, q);
    r.max = std::max(r.max, q);
    ++r.vertices;
  }
  if (r.vertices == 0) throw Error(ErrorKind::shape, "no interior vertex lies in the collar");
  return r;
}

double elliptic_estimate_constant(const Mesh& mesh, const Conductivity& a, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::usage, "need at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(-3, 3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const SparseMatrix k1 = unit_stiffness(mesh);
  const SparseMatrix mass = assemble_mass(mesh);
  const SparseMatrix ka = assemble_forms(mesh, a).stiffness;
  const DirichletSolver riesz(mesh, k1);
  const SparseMatrix mb = assemble_surface_mass_sparse(mesh);
  const auto geom = tet_geometry(mesh);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<std::pair<Vec3, double>> modes;
    for (int j = 0; j < 4; ++j) {
      modes.emplace_back(Vec3(freq(rng), freq(rng), freq(rng)), unit(rng) * M_PI);
    }
    std::vector<double> amp(4);
    for (auto& c : amp) c = unit(rng);
    const Field w = interpolate(mesh, [&](const Vec3& x) {
      double v = 0.0;
      for (int j = 0; j < 4; ++j) v += amp[j] * std::cos(M_PI * modes[j].first.dot(x) + modes[j].second);
      return v;
    });
    const double num = std::sqrt(w.dot((k1 + mass) * w));
    const double div_norm = dual_norm(riesz, mesh, ka * w);
    const Vector wb = restrict_to_boundary(mesh, w);
    const double trace = std::sqrt(std::max(0.0, wb.dot(mb * wb)));
    double grad_b = 0.0;
    for (const auto& f : mesh.boundary_faces) {
      Vec3 g = Vec3::Zero();
      for (int q = 0; q < 4; ++q) g += w(mesh.tets[f.tet][q]) * geom[f.tet].grad[q];
      const Vec3& p = mesh.vertices[f.v[0]];
      const double area = 0.5 * (mesh.vertices[f.v[1]] - p).cross(mesh.vertices[f.v[2]] - p).norm();
      grad_b += area * g.squaredNorm();
    }
    const double den = div_norm + trace + std::sqrt(grad_b);
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

double log_modulus(double rho) {
  if (!(rho > 0.0)) throw Error(ErrorKind::domain, "log modulus needs rho > 0");
  return std::pow(std::abs(std::log(rho)), -2.0 / 5.0) + rho;
}

LogStabilityCheck log_stability_check(const std::vector<std::pair<double, double>>& points) {
  if (points.empty()) throw Error(ErrorKind::usage, "no points to check");
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
  LogStabilityCheck c{0.0, true};
  for (size_t i = 0; i < sorted.size(); ++i) {
    c.constant = std::max(c.constant, sorted[i].first / log_modulus(sorted[i].second));
    if (i > 0 && sorted[i].first < sorted[i - 1].first) c.monotone = false;
  }
  return c;
}

double h1_gap(const Mesh& mesh, const Conductivity& a, const Conductivity& b) {
  const Field d = interpolate(mesh, [&](const Vec3& x) { return a.sigma(x) - b.sigma(x); });
  return h1_norm(mesh, d);
}

}  // namespace dtnlab
