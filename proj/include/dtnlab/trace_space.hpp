#pragma once

#include <iosfwd>
#include <memory>

#include "dtnlab/geometry.hpp"

namespace dtnlab {

/// H^s(Gamma) norms of nodal traces, s in [-1,1].
class TraceNorm {
 public:
  virtual ~TraceNorm() = default;
  virtual int size() const = 0;
  virtual double hs_norm(const Vector& g, double s) const = 0;
};

/// Boundary P1 mass/stiffness and the full Laplace-Beltrami eigenbasis of the
/// pencil (S, M). All H^s(Gamma) norms, s in [-1,1], are spectral:
/// |g|_s^2 = sum_i (1 + mu_i)^s ghat_i^2 with ghat = E^T M g.
class TraceBasis : public TraceNorm {
 public:
  explicit TraceBasis(const Mesh& mesh);

  int size() const override { return static_cast<int>(mu_.size()); }
  const DenseMatrix& mass() const { return mass_; }
  const DenseMatrix& stiffness() const { return stiffness_; }
  const Vector& eigenvalues() const { return mu_; }
  /// Columns e_i with E^T M E = I.
  const DenseMatrix& eigenvectors() const { return vectors_; }

  /// ghat = E^T M g for a nodal trace g.
  Vector spectral_coefficients(const Vector& g) const;
  /// H^s norm of a nodal trace g.
  double hs_norm(const Vector& g, double s) const override;
  /// H^s norm of a functional given by its load vector f_i = <f, phi_i>;
  /// its spectral coefficients are E^T f.
  double functional_norm(const Vector& f, double s) const;
  /// sup |Tg|_{-1/2} / |g|_{1/2} for T mapping nodal traces to load vectors.
  /// With modes > 0 the sup runs over the span of the first `modes`
  /// eigenvectors only (the resolved part of the spectrum).
  double operator_norm_half(const DenseMatrix& t, int modes = 0) const;

  /// "index,mu" CSV.
  void write_spectrum_csv(std::ostream& out) const;

 private:
  DenseMatrix mass_;
  DenseMatrix stiffness_;
  Vector mu_;
  DenseMatrix vectors_;
};

/// The same spectral norms without the eigendecomposition: Gauss quadrature
/// from M-orthogonal Lanczos on M^{-1}(M + S), for boundaries too large for
/// the dense pencil. Agrees with TraceBasis to the requested tolerance.
class LanczosTraceNorm : public TraceNorm {
 public:
  explicit LanczosTraceNorm(const Mesh& mesh, double tol = 1e-10);
  ~LanczosTraceNorm() override;

  int size() const override { return static_cast<int>(mass_.rows()); }
  double hs_norm(const Vector& g, double s) const override;

 private:
  struct Impl;
  SparseMatrix mass_;
  SparseMatrix shifted_;  // M + S
  std::unique_ptr<Impl> impl_;
  double tol_;
};

/// Smallest eigenvalue of the pencil (K_1 + P^T B P, M) where K_1, M are the
/// volume Laplace stiffness and mass, P restricts to boundary slots and
/// B = M_G E D^{-1/2} E^T M_G is the squared H^{-1/2}(Gamma) norm. Positive
/// iff |grad w|_{L2} + |w|_{H^{-1/2}} controls |w|_{L2}.
struct NormEquivalence {
  double lambda;
  int iterations;
};
NormEquivalence norm_equivalence_eigenvalue(const Mesh& mesh, const TraceBasis& basis);

/// Sparse boundary P1 mass and surface stiffness on boundary slots.
SparseMatrix assemble_surface_mass_sparse(const Mesh& mesh);
SparseMatrix assemble_surface_stiffness_sparse(const Mesh& mesh);

/// Surface P1 stiffness (tangential gradients) on boundary slots.
DenseMatrix assemble_surface_stiffness(const Mesh& mesh);

}  // namespace dtnlab
