#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dtnlab/fem.hpp"

namespace dtnlab {

/// Values of a continuous function at the (k+1)^3 lattice points
/// a + (b - a) j / k of the cube [a,b]^3; index j1 + (k+1)(j2 + (k+1) j3).
struct SampledField {
  double a = 0.0;
  double b = 1.0;
  int k = 1;
  std::vector<double> values;

  double at(int j1, int j2, int j3) const {
    return values[static_cast<size_t>(j1) + static_cast<size_t>(k + 1) * (j2 + static_cast<size_t>(k + 1) * j3)];
  }
};

SampledField sample_field(const ScalarField& f, double a, double b, int k);

/// Bernstein basis C(k,j) t^j (1-t)^{k-j}, evaluated in log space.
double bernstein_basis(int k, int j, double t);

/// Tensor-product Bernstein polynomial of degree f.k at x in [a,b]^3.
double bernstein_nd(const SampledField& f, const Vec3& x);
/// The same at many points; points sharing an x1 coordinate share the first
/// contraction, so tensor-grid batches are cheap.
std::vector<double> bernstein_nd(const SampledField& f, const std::vector<Vec3>& xs);

/// sigma_e(x) = sigma(closest point of the closed domain to x) on [a,b]^3.
/// Throws geometry unless the domain lies strictly inside the open cube.
ScalarField extension(const Conductivity& cond, DomainKind kind, double a, double b);
SampledField extend_conductivity(const Conductivity& cond, DomainKind kind, double a, double b, int k);

/// Smallest cube [a,b]^3 used around each model domain: margin 1e-6.
std::pair<double, double> enclosing_cube(DomainKind kind);

/// Deterministic sample of the closed domain with at least n points (tensor
/// grid restricted to the domain, boundary included for the cube).
std::vector<Vec3> domain_sample(DomainKind kind, int n = 10000);

enum class DensityMethod { bernstein, mollifier };
std::string to_string(DensityMethod m);
DensityMethod parse_density_method(const std::string& name);

/// Mollifier psi(x) = c exp(-1/(1-|x|^2)) on the unit ball, unit mass.
class Mollifier {
 public:
  /// Spherical product rule: 50-point Gauss-Legendre in r, 12 in cos(theta),
  /// 24 uniform angles in phi.
  Mollifier();
  /// psi_k * f at x, with psi_k(x) = k^3 psi(kx).
  double convolve(const ScalarField& f, const Vec3& x, double k) const;
  /// Quadrature mass of psi (1 up to rounding of the normalisation).
  double mass() const;
  /// Normalisation integral of the unnormalised profile from an independent
  /// high-order radial rule.
  static double reference_mass();

 private:
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
};

struct DenseApproximant {
  DensityMethod method = DensityMethod::bernstein;
  int k = 1;
  double a = 0.0;
  double b = 1.0;
  double sup_error = 0.0;  // over domain_sample
  double min_value = 0.0;  // over domain_sample
  std::shared_ptr<const SampledField> lattice;  // bernstein only
  ScalarField extended;                         // sigma_e, used by the mollifier

  std::vector<double> evaluate(const std::vector<Vec3>& xs) const;
};

/// Doubles k from 1 until the sampled sup error is <= epsilon. Throws
/// non_convergence once k would exceed 512.
DenseApproximant dense_approximant(const Conductivity& cond, DomainKind kind, double epsilon, DensityMethod method);

/// Coefficient tensor with (a, b, k) metadata as JSON.
void write_approximant_json(std::ostream& out, const DenseApproximant& chi, const std::string& cond_id);

}  // namespace dtnlab
