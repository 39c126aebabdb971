#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtnlab/dtn.hpp"
#include "dtnlab/fit.hpp"
#include "dtnlab/kernels.hpp"
#include "dtnlab/trace_space.hpp"

namespace dtnlab {

/// Support constant c of psi_k: supp psi_k lies in B(x0, c/k).
inline constexpr double kPsiSupport = 0.5;
/// Minimum number of boundary cells across the support radius.
inline constexpr double kResolutionCells = 3.0;

/// exp(-1/(1-t^2)) for |t| < 1, zero otherwise.
double bump_profile(double t);

/// Largest k with c/k >= 3 boundary cells.
int max_resolvable_k(const Mesh& mesh);
/// Throws unresolvable_scale when c/k is below three boundary cells.
void require_resolvable(const Mesh& mesh, int k);

/// Unnormalised profile phi(k |P_T(x - x0)| / c) on the boundary vertices,
/// where P_T projects onto the tangent plane at x0.
Vector psi_profile(const Mesh& mesh, const Probe& probe, int k);

struct OscillatingDatum {
  int k = 0;
  Probe probe;
  Vector trace;  // unit H^{1/2} norm
  double support_radius = 0.0;
};

OscillatingDatum build_psi_k(const Mesh& mesh, const TraceNorm& norms, const Probe& probe, int k);

/// Quadratic form g -> Q(u(g)) = <Lambda g, g> through one factorisation.
class DtnQuadraticForm {
 public:
  DtnQuadraticForm(const Mesh& mesh, const Conductivity& cond);
  Field extend(const Vector& g) const { return solver_.solve(g); }
  double operator()(const Vector& g) const;

 private:
  DirichletSolver solver_;
};

/// <Lambda_sigma psi_k, psi_k> / <Lambda_1 psi_k, psi_k>.
double kv_estimate_sigma(const Mesh& mesh, const Conductivity& cond, const Probe& probe, int k);
double kv_estimate_sigma(const DtnQuadraticForm& q_sigma, const DtnQuadraticForm& q_one, const Vector& psi);

struct SingularEstimate {
  double sigma_hat;
  double energy_sigma;  // <Lambda_sigma g, g>
  double energy_one;    // <Lambda_1 g, g>
  double pole_energy;   // integral of |grad H|^2
};

/// 1 + <(Lambda_sigma - Lambda_1) g, g> / E_delta with g the trace of H(., y_delta).
SingularEstimate singular_estimate_sigma(const Mesh& mesh, const Conductivity& cond, const Probe& probe, double delta);
SingularEstimate singular_estimate_sigma(const Mesh& mesh, const DtnQuadraticForm& q_sigma,
                                         const DtnQuadraticForm& q_one, const PoleConfig& pole);

/// Energies of a field split by the ball B(x0, rho), tet-centroid membership.
struct LocalEnergies {
  double grad_inside;           // |grad u|_{L2(B_rho)}
  double h1_outside;            // |u|_{H1(Omega \ B_rho)}
  double dist_weighted_inside;  // integral over B_rho of dist(x, Gamma) |grad u|^2
};
LocalEnergies local_energies(const Mesh& mesh, const Field& u, const Vec3& x0, double rho);

struct DecayPoint {
  int k;
  double rho;
  double h1_outside;
  double grad_inside;
  double dist_weighted_inside;
};

/// u = u_sigma(psi_k) for each k, measured outside B(x0, rho) for each rho.
/// Requires k >= 2c/rho for every pair.
std::vector<DecayPoint> exterior_decay_profile(const Mesh& mesh, const Conductivity& cond, const TraceNorm& norms,
                                               const Probe& probe, const std::vector<int>& ks,
                                               const std::vector<double>& rhos);

struct ConductivityPair {
  std::string id;
  Conductivity first;
  Conductivity second;
  double alpha = 1.0;  // Holder class of the family
};

struct StabilityRecord {
  std::string pair_id;
  double sup_gap;
  double normal_gap;
  double dtn_gap;
  double h;
  double alpha;
};

struct StabilitySweep {
  std::vector<StabilityRecord> records;
  std::optional<ExponentFit> sup_fit;     // sup_gap against dtn_gap
  std::optional<ExponentFit> normal_fit;  // normal_gap against dtn_gap
};

/// Boundary sup norms of sigma1 - sigma2 and d_nu(sigma1 - sigma2) from
/// about n analytic samples.
std::pair<double, double> boundary_gaps(DomainKind kind, const Conductivity& a, const Conductivity& b, int n = 10000);

/// One record per pair, merged in pair order; fits use the records whose gaps
/// are all positive (needs three of them).
StabilitySweep stability_sweep(const Mesh& mesh, const TraceBasis& basis, const std::vector<ConductivityPair>& pairs);

}  // namespace dtnlab
