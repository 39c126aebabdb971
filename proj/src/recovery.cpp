#include "dtnlab/recovery.hpp"

#include <cmath>
#include <map>

#include "dtnlab/error.hpp"

namespace dtnlab {

double bump_profile(double t) {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - a * a));
}

int max_resolvable_k(const Mesh& mesh) {
  return static_cast<int>(std::floor(kPsiSupport / (kResolutionCells * mesh.boundary_cell_size()) * (1.0 + 1e-9)));
}

void require_resolvable(const Mesh& mesh, int k) {
  if (k < 1) throw Error(ErrorKind::range, "scale index k must be >= 1");
  if (k > max_resolvable_k(mesh)) {
    throw Error(ErrorKind::unresolvable_scale, "k=" + std::to_string(k) + " needs a finer mesh than " + mesh.id +
                                                   " (largest resolvable k is " +
                                                   std::to_string(max_resolvable_k(mesh)) + ")");
  }
}

Vector psi_profile(const Mesh& mesh, const Probe& probe, int k) {
  require_resolvable(mesh, k);
  const double radius = kPsiSupport / k;
  Vector g = Vector::Zero(mesh.num_boundary());
  for (int s = 0; s < mesh.num_boundary(); ++s) {
    const Vec3 d = mesh.vertices[mesh.boundary_vertices[s]] - probe.x0;
    if (d.norm() >= radius) continue;
    const Vec3 tangential = d - d.dot(probe.nu) * probe.nu;
    g(s) = bump_profile(tangential.norm() / radius);
  }
  return g;
}

OscillatingDatum build_psi_k(const Mesh& mesh, const TraceNorm& norms, const Probe& probe, int k) {
  OscillatingDatum d;
  d.k = k;
  d.probe = probe;
  d.support_radius = kPsiSupport / k;
  d.trace = psi_profile(mesh, probe, k);
  const double n = norms.hs_norm(d.trace, 0.5);
  if (!(n > 0.0)) throw Error(ErrorKind::degenerate_datum, "psi_k vanishes on every boundary vertex");
  d.trace /= n;
  return d;
}

DtnQuadraticForm::DtnQuadraticForm(const Mesh& mesh, const Conductivity& cond)
    : solver_(mesh, assemble_forms(mesh, cond).stiffness) {}

double DtnQuadraticForm::operator()(const Vector& g) const {
  const Field u = solver_.solve(g);
  return u.dot(solver_.form() * u);
}

double kv_estimate_sigma(const DtnQuadraticForm& q_sigma, const DtnQuadraticForm& q_one, const Vector& psi) {
  const double den = q_one(psi);
  if (!(std::abs(den) >= 1e-14)) throw Error(ErrorKind::degenerate_datum, "reference energy of psi_k below 1e-14");
  return q_sigma(psi) / den;
}

double kv_estimate_sigma(const Mesh& mesh, const Conductivity& cond, const Probe& probe, int k) {
  const Vector psi = psi_profile(mesh, probe, k);
  return kv_estimate_sigma(DtnQuadraticForm(mesh, cond), DtnQuadraticForm(mesh, constant_conductivity(1.0)), psi);
}

SingularEstimate singular_estimate_sigma(const Mesh& mesh, const DtnQuadraticForm& q_sigma,
                                         const DtnQuadraticForm& q_one, const PoleConfig& pole) {
  SingularEstimate e;
  e.pole_energy = pole_energy(mesh, pole);
  const Vector g = boundary_trace(mesh, [&](const Vec3& x) { return fundamental_h(x, pole.y); });
  e.energy_sigma = q_sigma(g);
  e.energy_one = q_one(g);
  e.sigma_hat = 1.0 + (e.energy_sigma - e.energy_one) / e.pole_energy;
  return e;
}

SingularEstimate singular_estimate_sigma(const Mesh& mesh, const Conductivity& cond, const Probe& probe, double delta) {
  const PoleConfig pole = make_pole(mesh.domain, probe, delta);
  return singular_estimate_sigma(mesh, DtnQuadraticForm(mesh, cond), DtnQuadraticForm(mesh, constant_conductivity(1.0)),
                                 pole);
}

LocalEnergies local_energies(const Mesh& mesh, const Field& u, const Vec3& x0, double rho) {
  if (u.size() != mesh.num_vertices()) throw Error(ErrorKind::shape, "field size does not match the mesh");
  const auto geom = tet_geometry(mesh);
  double grad_in = 0.0, h1_out = 0.0, weighted = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets[t];
    Vec3 grad = Vec3::Zero();
    double sum = 0.0, sq = 0.0;
    for (int a = 0; a < 4; ++a) {
      grad += u(v[a]) * geom[t].grad[a];
      sum += u(v[a]);
      sq += u(v[a]) * u(v[a]);
    }
    const Vec3 c = mesh.centroid(t);
    const double g2 = geom[t].volume * grad.squaredNorm();
    if ((c - x0).norm() < rho) {
      grad_in += g2;
      weighted += distance_to_boundary(mesh.domain, c) * g2;
    } else {
      // exact P1 mass: vol/20 (sum u_a^2 + (sum u_a)^2)
      h1_out += g2 + geom[t].volume / 20.0 * (sq + sum * sum);
    }
  }
  return {std::sqrt(grad_in), std::sqrt(h1_out), weighted};
}

std::vector<DecayPoint> exterior_decay_profile(const Mesh& mesh, const Conductivity& cond, const TraceNorm& norms,
                                               const Probe& probe, const std::vector<int>& ks,
                                               const std::vector<double>& rhos) {
  if (ks.empty() || rhos.empty()) throw Error(ErrorKind::usage, "decay profile needs k and rho values");
  for (int k : ks)
    for (double rho : rhos) {
      if (!(rho > 0.0) || k * rho < 2.0 * kPsiSupport * (1.0 - 1e-12)) {
        throw Error(ErrorKind::unresolvable_scale, "decay profile needs k >= 2c/rho (k=" + std::to_string(k) +
                                                       ", rho=" + std::to_string(rho) + ")");
      }
    }
  const DtnQuadraticForm form(mesh, cond);
  std::vector<DecayPoint> out;
  for (int k : ks) {
    const OscillatingDatum psi = build_psi_k(mesh, norms, probe, k);
    const Field u = form.extend(psi.trace);
    for (double rho : rhos) {
      const LocalEnergies e = local_energies(mesh, u, probe.x0, rho);
      out.push_back({k, rho, e.h1_outside, e.grad_inside, e.dist_weighted_inside});
    }
  }
  return out;
}

std::pair<double, double> boundary_gaps(DomainKind kind, const Conductivity& a, const Conductivity& b, int n) {
  double sup = 0.0, normal = 0.0;
  for (const auto& s : sample_boundary(kind, n)) {
    sup = std::max(sup, std::abs(a.sigma(s.point) - b.sigma(s.point)));
    normal = std::max(normal, std::abs((a.grad_sigma(s.point) - b.grad_sigma(s.point)).dot(s.normal)));
  }
  return {sup, normal};
}

StabilitySweep stability_sweep(const Mesh& mesh, const TraceBasis& basis, const std::vector<ConductivityPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::usage, "stability sweep needs at least one pair");
  std::map<std::string, DtnOperator> cache;
  auto dtn = [&](const Conductivity& c) -> const DtnOperator& {
    auto it = cache.find(c.id);
    if (it == cache.end()) it = cache.emplace(c.id, assemble_dtn(mesh, c)).first;
    return it->second;
  };
  StabilitySweep sweep;
  for (const auto& p : pairs) {
    StabilityRecord r;
    r.pair_id = p.id;
    std::tie(r.sup_gap, r.normal_gap) = boundary_gaps(mesh.domain, p.first, p.second);
    r.dtn_gap = p.first.id == p.second.id ? 0.0 : dtn_diff_norm(basis, dtn(p.first), dtn(p.second));
    r.h = mesh.h;
    r.alpha = p.alpha;
    sweep.records.push_back(r);
  }
  std::vector<double> x, ys, yn;
  for (const auto& r : sweep.records) {
    if (r.dtn_gap > 0.0 && r.sup_gap > 0.0 && r.normal_gap > 0.0) {
      x.push_back(r.dtn_gap);
      ys.push_back(r.sup_gap);
      yn.push_back(r.normal_gap);
    }
  }
  if (x.size() >= 3) {
    sweep.sup_fit = fit_exponent(x, ys);
    sweep.normal_fit = fit_exponent(x, yn);
  }
  return sweep;
}

}  // namespace dtnlab
