#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtnlab/dtn.hpp"
#include "dtnlab/trace_space.hpp"

namespace dtnlab {

/// q = sigma^{-1/2} Laplace(sigma^{1/2}).
struct SchrodingerPotential {
  ScalarField q;
  std::string source_cond_id;
  std::shared_ptr<long> clipped;  // evaluations where sigma fell below 1/kappa
};

/// Values of sigma below 1/kappa are clipped to 1/kappa with a one-time
/// warning on stderr.
SchrodingerPotential q_from_sigma(const Conductivity& cond);

/// sqrt(u^T (K_1 + M) u).
double h1_norm(const Mesh& mesh, const Field& u);

/// |v - sigma^{1/2} u_sigma(sigma^{-1/2} g)|_{H1} with v the Schrodinger solve.
double liouville_residual(const Mesh& mesh, const Conductivity& cond, const Vector& g);

/// DtN of -Laplace + q_sigma.
DtnOperator schrodinger_dtn(const Mesh& mesh, const Conductivity& cond);

/// Right side of the transformed DtN identity:
/// S^{-1/2} Lambda_sigma S^{-1/2} + M_Gamma[d_nu sigma / (2 sigma)], S = diag sigma.
DenseMatrix transformed_dtn(const Mesh& mesh, const Conductivity& cond, const DtnOperator& lambda_sigma);

/// Operator norm of the Schrodinger DtN minus transformed_dtn.
double transformed_dtn_residual(const Mesh& mesh, const TraceBasis& basis, const Conductivity& cond);

/// Discrete H^{-1} dual norm (against H^1_0 with the full H^1 norm) of
/// phi -> a(w, phi) + (f, phi) with w = ln(sigma1/sigma2),
/// a = sqrt(sigma1 sigma2), f = 2a(q1 - q2), all interpolated.
double log_ratio_residual(const Mesh& mesh, const Conductivity& cond1, const Conductivity& cond2);

struct EigenPair {
  double lambda1;
  Field phi1;  // zero on the boundary, unit L2 norm, positive inside
  int iterations;
  double residual;  // |K phi - lambda M phi|_2
};

/// Smallest eigenpair of -div(sigma grad .) with Dirichlet conditions by
/// inverse iteration on the factorised interior block from a positive start.
EigenPair smallest_eigenpair(const Mesh& mesh, const Conductivity& cond);
/// Next eigenvalue by the same iteration deflated against phi1.
double second_eigenvalue(const Mesh& mesh, const Conductivity& cond, const EigenPair& first);

struct DistanceRatio {
  double min;
  double max;
  int vertices;
};
/// phi / dist(., Gamma) over interior vertices in the projection collar.
DistanceRatio distance_ratio(const Mesh& mesh, const Field& phi);

/// Largest ratio |w|_{H1} / (|div(a grad w)|_{H^-1} + |w|_{L2(Gamma)} + |grad w|_{L2(Gamma)})
/// over `samples` random smooth fields w; the H^-1 norm is the dual of
/// the gradient seminorm on H^1_0 (sigma = 1 Riesz map).
double elliptic_estimate_constant(const Mesh& mesh, const Conductivity& a, int samples, std::uint64_t seed);

/// |ln rho|^{-2/(n+2)} + rho with n = 3.
double log_modulus(double rho);

struct LogStabilityCheck {
  double constant;  // max gap / log_modulus(dtn_gap)
  bool monotone;    // gaps ordered like dtn gaps
};
/// Pairs (h1 gap, dtn gap).
LogStabilityCheck log_stability_check(const std::vector<std::pair<double, double>>& points);

/// |f|_{H1} of the nodal interpolant.
double h1_gap(const Mesh& mesh, const Conductivity& a, const Conductivity& b);

}  // namespace dtnlab
