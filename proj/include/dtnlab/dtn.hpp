#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "dtnlab/fem.hpp"
#include "dtnlab/trace_space.hpp"

namespace dtnlab {

/// Discrete DtN map on boundary slots: maps a nodal trace to the load vector
/// of its weak Neumann data, <Lambda g, h> = h^T matrix g.
struct DtnOperator {
  DenseMatrix matrix;
  std::string cond_id;
  std::string mesh_id;

  double pairing(const Vector& g, const Vector& h) const { return h.dot(matrix * g); }
};

/// Schur complement K_GG - K_GI K_II^{-1} K_IG of the conductivity form.
DtnOperator assemble_dtn(const Mesh& mesh, const Conductivity& cond);
/// Same for an arbitrary symmetric form (used for the Schrodinger DtN).
DtnOperator dtn_from_form(const Mesh& mesh, SparseMatrix form, const std::string& form_id);

struct AlessandriniResult {
  double lhs;  // integral of (sigma1 [A1] - sigma2 [A2]) grad u1 . grad u2
  double rhs;  // <(Lambda1 - Lambda2) g, h>
};

/// u1 solves with cond1 and trace g, u2 with cond2 and trace h.
AlessandriniResult alessandrini_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2,
                                         const Vector& g, const Vector& h);
/// Same, reusing assembled operators for the right-hand side.
AlessandriniResult alessandrini_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2,
                                         const DtnOperator& l1, const DtnOperator& l2, const Vector& g,
                                         const Vector& h);

/// |L1 - L2| in B(H^{1/2}, H^{-1/2}); modes > 0 restricts to the leading modes.
double dtn_diff_norm(const TraceBasis& basis, const DtnOperator& l1, const DtnOperator& l2, int modes = 0);

/// Smallest `count` eigenvalues of the pencil (Lambda_sigma, M_Gamma) without
/// forming Lambda: shift-invert block Krylov on the Steklov problem
/// K u = lambda P^T M_Gamma P u, using (Lambda + M_Gamma)^{-1} = P (K + P^T M_Gamma P)^{-1} P^T.
/// Ritz pairs are accepted once their M_Gamma residual is below tol * theta.
Vector steklov_spectrum(const Mesh& mesh, const Conductivity& cond, int count, double tol = 1e-8);

/// Matrix Market array export (symmetric, lower triangle column-major) and a
/// key=value sidecar with the provenance of the operator.
void write_dtn_matrix_market(std::ostream& out, const DtnOperator& op);
void write_dtn_sidecar(std::ostream& out, const DtnOperator& op, const std::map<std::string, std::string>& extra = {});

}  // namespace dtnlab
