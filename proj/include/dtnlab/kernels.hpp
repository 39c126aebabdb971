#pragma once

#include <cstdint>

#include "dtnlab/fem.hpp"

namespace dtnlab {

/// Surface measure of the unit sphere in R^n.
double sphere_area(int n);

struct KernelValue {
  double value;
  Vector gradient;  // with respect to x
};

/// Fundamental solution H(x,y) = |x-y|^{2-n} / ((n-2)|S^{n-1}|), n >= 3.
KernelValue fundamental_h(const Vector& x, const Vector& y, int n);
double fundamental_h(const Vec3& x, const Vec3& y);
Vec3 fundamental_h_gradient(const Vec3& x, const Vec3& y);

/// Canonical parametrix of -div(sigma A grad .) with pole y (n = 3):
/// [A^{-1}(y)(x-y).(x-y)]^{-1/2} / (|S^2| sigma(y) det(A(y))^{1/2}).
double anisotropic_parametrix(const Vec3& x, const Vec3& y, const Conductivity& cond);
Vec3 anisotropic_parametrix_gradient(const Vec3& x, const Vec3& y, const Conductivity& cond);

/// Sampled two-sided bound c^{-1}|x-y|^{2-2n} <= A(x) grad H1 . grad H2 <= c|x-y|^{2-2n}
/// where A is the matrix field of cond1 and H1, H2 the parametrices of
/// cond1 and cond2 with pole y. The constant is max(upper, 1/lower).
struct ParametrixBound {
  double lower;
  double upper;
  double constant;
  int samples;
};
ParametrixBound parametrix_gradient_bound(DomainKind kind, const Conductivity& cond1, const Conductivity& cond2,
                                          const Vec3& y, int samples, std::uint64_t seed);

/// Exterior pole y_delta of a probe.
struct PoleConfig {
  Vec3 y;
  Probe probe;
  double delta;
};
/// Throws pole_placement unless dist(y, closure) >= (delta/2) sin(theta).
PoleConfig make_pole(DomainKind kind, const Probe& probe, double delta);

/// E = integral over the mesh of |grad H(., y)|^2, tet-centroid rule.
double pole_energy(const Mesh& mesh, const PoleConfig& pole);
double pole_energy(const Mesh& mesh, const Vec3& y);

/// Integral over tets with centroid in B(x0, r) of grad u . grad H(., y),
/// where u is the discrete sigma-harmonic function with the trace of H(., y).
double singular_pairing_near_probe(const Mesh& mesh, const Conductivity& cond, const PoleConfig& pole, double r);

/// Slack of the boundary Taylor inequality
///   |d_nu f(x0)| dist(x) <= f(x) - f(p(x)) + 3 K |x - x0|^{1+alpha}
/// i.e. right side minus left side (nonnegative when it holds). Requires
/// -d_nu f(x0) > 0 and x in the projection collar.
double boundary_taylor_slack(DomainKind kind, const ScalarField& f, const VectorField& grad_f, double holder_bound,
                             double alpha, const Vec3& x0, const Vec3& x);

}  // namespace dtnlab
