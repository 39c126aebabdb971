#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtnlab/geometry.hpp"

namespace dtnlab {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;
using MatrixField = std::function<Mat3(const Vec3&)>;

/// Nodal P1 coefficients, one per mesh vertex.
using Field = Vector;

/// Analytic conductivity sigma, optionally multiplied by a matrix field A.
/// kappa certifies kappa^-1 <= sigma <= kappa on [-1,1]^3, which contains
/// both model domains; mu certifies the ellipticity of A.
struct Conductivity {
  std::string id;
  ScalarField sigma;
  VectorField grad_sigma;
  ScalarField sqrt_sigma_laplacian;  // Laplacian of sigma^{1/2}; empty -> finite differences
  MatrixField matrix_A;              // empty -> identity
  double kappa = 1.0;
  double mu = 1.0;

  bool anisotropic() const { return static_cast<bool>(matrix_A); }
};

Conductivity constant_conductivity(double c);
/// sigma = a.x + b
Conductivity affine_conductivity(const Vec3& a, double b);
/// sigma = base + amplitude * exp(-|x - center|^2 / width^2)
Conductivity gaussian_bump(const Vec3& center, double width, double amplitude, double base = 1.0);
/// sigma = (1 + beta x1^2)^2, so sigma^{1/2} has constant Laplacian 2 beta.
Conductivity product_conductivity(double beta);
/// Attaches a symmetric matrix field A with certified bound mu.
Conductivity with_matrix(Conductivity cond, MatrixField a, double mu);

/// Built-in families by name: constant(c), affine(a1,a2,a3,b),
/// gaussian-bump(cx,cy,cz,width,amplitude[,base]), product(beta).
Conductivity make_conductivity(const std::string& family, const std::vector<double>& params);

/// Laplacian of sigma^{1/2}: analytic when supplied, otherwise fourth-order
/// centred differences with step 1e-3.
double sqrt_sigma_laplacian(const Conductivity& cond, const Vec3& x);

/// Nodal interpolant of f.
Field interpolate(const Mesh& mesh, const ScalarField& f);
/// Values of f at the boundary vertices (in Mesh::boundary_vertices order).
Vector boundary_trace(const Mesh& mesh, const ScalarField& f);
/// Restriction of a nodal field to the boundary vertices.
Vector restrict_to_boundary(const Mesh& mesh, const Field& u);

/// Per-tet P1 geometry: volume and barycentric gradients.
struct TetGeometry {
  double volume;
  std::array<Vec3, 4> grad;
};
std::vector<TetGeometry> tet_geometry(const Mesh& mesh);

struct FemForms {
  SparseMatrix stiffness;  // (sigma [A] grad u, grad v)
  SparseMatrix mass;       // (u, v)
};

/// Stiffness with the coefficient sampled at tet centroids, consistent mass.
FemForms assemble_forms(const Mesh& mesh, const Conductivity& cond);
/// Stiffness from explicit per-tet scalar coefficients.
SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<double>& tet_coefficient);
/// Stiffness with per-tet matrix coefficients.
SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<Mat3>& tet_coefficient);
/// Mass matrix weighted by w at tet centroids (w empty -> unweighted).
SparseMatrix assemble_mass(const Mesh& mesh, const ScalarField& weight = {});
/// Coefficient sigma (times A) at every tet centroid.
std::vector<double> tet_sigma(const Mesh& mesh, const Conductivity& cond);
std::vector<Mat3> tet_sigma_matrix(const Mesh& mesh, const Conductivity& cond);

/// Boundary-face P1 mass, optionally weighted face-wise by w(x, face normal)
/// at the face centroid. Indexed by boundary slot.
DenseMatrix assemble_boundary_mass(const Mesh& mesh,
                                   const std::function<double(const Vec3&, const Vec3&)>& weight = {});

/// Factorises the interior block of a symmetric form once and solves
/// Dirichlet problems and the boundary Schur complement from it.
class DirichletSolver {
 public:
  DirichletSolver(const Mesh& mesh, SparseMatrix form);
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  /// Full nodal solution with boundary values g (boundary-slot order).
  Field solve(const Vector& g) const;
  /// Solves form_II x = rhs_I for interior unknowns (homogeneous Dirichlet).
  Vector solve_interior(const Vector& rhs_interior) const;
  /// form_GG - form_GI form_II^{-1} form_IG, dense on boundary slots.
  DenseMatrix schur_complement() const;

  const SparseMatrix& form() const { return form_; }
  /// min|D|/max|D| of the LDL^T pivots, a cheap conditioning indicator.
  double pivot_ratio() const { return pivot_ratio_; }
  /// Number of negative pivots.
  int negative_pivots() const { return negative_pivots_; }

 private:
  struct Impl;
  const Mesh* mesh_;
  SparseMatrix form_;
  SparseMatrix interior_;
  SparseMatrix coupling_;  // interior x boundary
  std::unique_ptr<Impl> impl_;
  double pivot_ratio_ = 0.0;
  int negative_pivots_ = 0;
};

/// Discrete solution of div(sigma grad u) = 0 with u = g on Gamma.
Field solve_dirichlet(const Mesh& mesh, const Conductivity& cond, const Vector& g);
/// Q_sigma(u) = u^T K u.
double energy(const Mesh& mesh, const Conductivity& cond, const Field& u);
/// Discrete solution of -Laplace v + q v = 0 with v = g on Gamma. Throws
/// resonance when the interior system is numerically singular.
Field solve_schrodinger(const Mesh& mesh, const ScalarField& q, const Vector& g);
/// Form K_1 + M_q used by solve_schrodinger.
SparseMatrix schrodinger_form(const Mesh& mesh, const ScalarField& q);

/// Matrix Market coordinate export (symmetric matrices store the lower triangle).
void write_matrix_market(std::ostream& out, const SparseMatrix& a, bool symmetric = true);

}  // namespace dtnlab
