#include "dtnlab/density.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "dtnlab/error.hpp"

namespace dtnlab {

namespace {

constexpr int kMaxDegree = 512;
constexpr double kEnclosingMargin = 1e-6;

struct Weights {
  int lo = 0;
  int hi = -1;  // inclusive
  std::vector<double> w;
};

// Bernstein weights of degree k at t, trimmed to where they matter.
Weights bernstein_weights(int k, double t) {
  Weights out;
  out.w.resize(k + 1);
  double peak = 0.0;
  for (int j = 0; j <= k; ++j) {
    out.w[j] = bernstein_basis(k, j, t);
    peak = std::max(peak, out.w[j]);
  }
  out.lo = 0;
  out.hi = k;
  while (out.lo < k && out.w[out.lo] < 1e-18 * peak) ++out.lo;
  while (out.hi > out.lo && out.w[out.hi] < 1e-18 * peak) --out.hi;
  return out;
}

double unit_coordinate(const SampledField& f, double x) {
  const double t = (x - f.a) / (f.b - f.a);
  if (!(t >= -1e-12 && t <= 1.0 + 1e-12)) {
    throw Error(ErrorKind::domain, "point outside the Bernstein cube [" + std::to_string(f.a) + "," +
                                       std::to_string(f.b) + "]^3");
  }
  return std::clamp(t, 0.0, 1.0);
}

double profile(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

}  // namespace

SampledField sample_field(const ScalarField& f, double a, double b, int k) {
  if (k < 1) throw Error(ErrorKind::range, "Bernstein degree must be >= 1");
  if (!(b > a)) throw Error(ErrorKind::geometry, "cube bounds must satisfy a < b");
  SampledField s;
  s.a = a;
  s.b = b;
  s.k = k;
  const size_t n = static_cast<size_t>(k) + 1;
  s.values.resize(n * n * n);
  size_t idx = 0;
  for (int j3 = 0; j3 <= k; ++j3)
    for (int j2 = 0; j2 <= k; ++j2)
      for (int j1 = 0; j1 <= k; ++j1) {
        const Vec3 x(a + (b - a) * j1 / k, a + (b - a) * j2 / k, a + (b - a) * j3 / k);
        const double v = f(x);
        if (!std::isfinite(v)) throw Error(ErrorKind::domain, "sampled field is not finite");
        s.values[idx++] = v;
      }
  return s;
}

double bernstein_basis(int k, int j, double t) {
  if (j < 0 || j > k) return 0.0;
  if (t <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (t >= 1.0) return j == k ? 1.0 : 0.0;
  const double log_c = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
  return std::exp(log_c + j * std::log(t) + (k - j) * std::log1p(-t));
}

double bernstein_nd(const SampledField& f, const Vec3& x) { return bernstein_nd(f, std::vector<Vec3>{x})[0]; }

std::vector<double> bernstein_nd(const SampledField& f, const std::vector<Vec3>& xs) {
  const int k = f.k;
  const size_t n = static_cast<size_t>(k) + 1;
  if (f.values.size() != n * n * n) throw Error(ErrorKind::shape, "lattice size does not match the degree");
  std::map<double, std::vector<size_t>> groups;
  for (size_t i = 0; i < xs.size(); ++i) {
    for (int d = 0; d < 3; ++d) unit_coordinate(f, xs[i][d]);
    groups[xs[i].x()].push_back(i);
  }
  std::vector<double> out(xs.size());
  std::vector<double> slab(n * n);
  for (const auto& [x1, members] : groups) {
    const Weights w1 = bernstein_weights(k, unit_coordinate(f, x1));
    for (size_t jj = 0; jj < n * n; ++jj) {
      const double* row = f.values.data() + jj * n;
      double s = 0.0;
      for (int j1 = w1.lo; j1 <= w1.hi; ++j1) s += w1.w[j1] * row[j1];
      slab[jj] = s;
    }
    for (size_t i : members) {
      const Weights w2 = bernstein_weights(k, unit_coordinate(f, xs[i].y()));
      const Weights w3 = bernstein_weights(k, unit_coordinate(f, xs[i].z()));
      double total = 0.0;
      for (int j3 = w3.lo; j3 <= w3.hi; ++j3) {
        const double* row = slab.data() + static_cast<size_t>(j3) * n;
        double s = 0.0;
        for (int j2 = w2.lo; j2 <= w2.hi; ++j2) s += w2.w[j2] * row[j2];
        total += w3.w[j3] * s;
      }
      out[i] = total;
    }
  }
  return out;
}

std::pair<double, double> enclosing_cube(DomainKind kind) {
  return kind == DomainKind::cube ? std::pair{-kEnclosingMargin, 1.0 + kEnclosingMargin}
                                  : std::pair{-1.0 - kEnclosingMargin, 1.0 + kEnclosingMargin};
}

ScalarField extension(const Conductivity& cond, DomainKind kind, double a, double b) {
  const double lo = kind == DomainKind::cube ? 0.0 : -1.0;
  if (!(a < lo && b > 1.0)) throw Error(ErrorKind::geometry, "cube does not enclose the domain");
  return [sigma = cond.sigma, kind](const Vec3& x) { return sigma(closest_point(kind, x)); };
}

SampledField extend_conductivity(const Conductivity& cond, DomainKind kind, double a, double b, int k) {
  return sample_field(extension(cond, kind, a, b), a, b, k);
}

std::vector<Vec3> domain_sample(DomainKind kind, int n) {
  std::vector<Vec3> pts;
  if (kind == DomainKind::cube) {
    const int side = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
    for (int k = 0; k < side; ++k)
      for (int j = 0; j < side; ++j)
        for (int i = 0; i < side; ++i)
          pts.emplace_back(double(i) / (side - 1), double(j) / (side - 1), double(k) / (side - 1));
    return pts;
  }
  // the ball fills pi/6 of its bounding cube
  int side = static_cast<int>(std::ceil(std::cbrt(n * 6.0 / M_PI)));
  for (;; ++side) {
    pts.clear();
    for (int k = 0; k < side; ++k)
      for (int j = 0; j < side; ++j)
        for (int i = 0; i < side; ++i) {
          const Vec3 x(-1.0 + 2.0 * i / (side - 1), -1.0 + 2.0 * j / (side - 1), -1.0 + 2.0 * k / (side - 1));
          if (x.squaredNorm() <= 1.0) pts.push_back(x);
        }
    if (static_cast<int>(pts.size()) >= n) return pts;
  }
}

std::string to_string(DensityMethod m) { return m == DensityMethod::bernstein ? "bernstein" : "mollifier"; }

DensityMethod parse_density_method(const std::string& name) {
  if (name == "bernstein") return DensityMethod::bernstein;
  if (name == "mollifier") return DensityMethod::mollifier;
  throw Error(ErrorKind::usage, "unknown density method '" + name + "'");
}

double Mollifier::reference_mass() {
  boost::math::quadrature::tanh_sinh<double> rule;
  return 4.0 * M_PI * rule.integrate([](double r) { return r * r * profile(r); }, 0.0, 1.0);
}

Mollifier::Mollifier() {
  using radial_rule = boost::math::quadrature::gauss<double, 50>;
  using polar_rule = boost::math::quadrature::gauss<double, 12>;
  constexpr int azimuthal = 24;
  const double norm = reference_mass();
  auto expand = [](const auto& abscissa, const auto& weights) {
    // full [-1,1] rule from the stored nonnegative half
    std::vector<std::pair<double, double>> rule;
    for (size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        rule.emplace_back(0.0, weights[i]);
      } else {
        rule.emplace_back(abscissa[i], weights[i]);
        rule.emplace_back(-abscissa[i], weights[i]);
      }
    }
    return rule;
  };
  const auto radial = expand(radial_rule::abscissa(), radial_rule::weights());
  const auto polar = expand(polar_rule::abscissa(), polar_rule::weights());
  for (const auto& [xr, wr] : radial) {
    const double r = 0.5 * (xr + 1.0);
    const double radial_weight = 0.5 * wr * r * r * profile(r) / norm;
    for (const auto& [ct, wt] : polar) {
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int p = 0; p < azimuthal; ++p) {
        const double phi = 2.0 * M_PI * (p + 0.5) / azimuthal;
        nodes_.emplace_back(r * st * std::cos(phi), r * st * std::sin(phi), r * ct);
        weights_.push_back(radial_weight * wt * 2.0 * M_PI / azimuthal);
      }
    }
  }
}

double Mollifier::mass() const {
  double m = 0.0;
  for (double w : weights_) m += w;
  return m;
}

double Mollifier::convolve(const ScalarField& f, const Vec3& x, double k) const {
  if (!(k > 0.0)) throw Error(ErrorKind::range, "mollifier scale must be positive");
  double s = 0.0;
  for (size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(x - nodes_[i] / k);
  return s;
}

std::vector<double> DenseApproximant::evaluate(const std::vector<Vec3>& xs) const {
  if (method == DensityMethod::bernstein) return bernstein_nd(*lattice, xs);
  static const Mollifier mollifier;
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = mollifier.convolve(extended, xs[i], k);
  return out;
}

DenseApproximant dense_approximant(const Conductivity& cond, DomainKind kind, double epsilon, DensityMethod method) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::range, "epsilon must be positive");
  const auto [a, b] = enclosing_cube(kind);
  const std::vector<Vec3> sample = domain_sample(kind);
  std::vector<double> exact(sample.size());
  for (size_t i = 0; i < sample.size(); ++i) exact[i] = cond.sigma(sample[i]);
  DenseApproximant chi;
  chi.method = method;
  chi.a = a;
  chi.b = b;
  chi.extended = extension(cond, kind, a, b);
  for (int k = 1; k <= kMaxDegree; k *= 2) {
    chi.k = k;
    if (method == DensityMethod::bernstein) {
      chi.lattice = std::make_shared<const SampledField>(sample_field(chi.extended, a, b, k));
    }
    const std::vector<double> values = chi.evaluate(sample);
    chi.sup_error = 0.0;
    chi.min_value = INFINITY;
    for (size_t i = 0; i < values.size(); ++i) {
      chi.sup_error = std::max(chi.sup_error, std::abs(values[i] - exact[i]));
      chi.min_value = std::min(chi.min_value, values[i]);
    }
    if (chi.sup_error <= epsilon) {
      if (!(chi.min_value > 0.0)) throw Error(ErrorKind::ellipticity, "approximant is not positive");
      return chi;
    }
  }
  throw Error(ErrorKind::non_convergence, "no k <= 512 reaches sup error " + std::to_string(epsilon) + " for " +
                                              cond.id + " (" + to_string(method) + ")");
}

void write_approximant_json(std::ostream& out, const DenseApproximant& chi, const std::string& cond_id) {
  char buf[40];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "{\n  \"conductivity\": \"" << cond_id << "\",\n  \"method\": \"" << to_string(chi.method)
      << "\",\n  \"a\": " << real(chi.a) << ",\n  \"b\": " << real(chi.b) << ",\n  \"k\": " << chi.k
      << ",\n  \"sup_error\": " << real(chi.sup_error) << ",\n  \"layout\": \"j1 + (k+1)*(j2 + (k+1)*j3)\"";
  if (chi.lattice) {
    out << ",\n  \"coefficients\": [";
    for (size_t i = 0; i < chi.lattice->values.size(); ++i) out << (i ? "," : "") << real(chi.lattice->values[i]);
    out << "]";
  }
  out << "\n}\n";
  if (!out) throw Error(ErrorKind::io, "approximant write failed");
}

}  // namespace dtnlab
