#include <charconv>
#include <cmath>

#include "dtnlab/error.hpp"
#include "dtnlab/fem.hpp"

namespace dtnlab {

namespace {

std::string format_id(const std::string& family, const std::vector<double>& params) {
  std::string out = family + "(";
  char buf[32];
  for (size_t i = 0; i < params.size(); ++i) {
    const auto res = std::to_chars(buf, buf + sizeof buf, params[i]);
    out += (i ? "," : "") + std::string(buf, res.ptr);
  }
  return out + ")";
}

double certify(double lo, double hi, const std::string& id) {
  if (!(lo > 0.0)) throw Error(ErrorKind::ellipticity, id + " is not bounded below by a positive constant");
  return std::max(hi, 1.0 / lo);
}

}  // namespace

Conductivity constant_conductivity(double c) {
  Conductivity cond;
  cond.id = format_id("constant", {c});
  cond.kappa = certify(c, c, cond.id);
  cond.sigma = [c](const Vec3&) { return c; };
  cond.grad_sigma = [](const Vec3&) { return Vec3::Zero().eval(); };
  cond.sqrt_sigma_laplacian = [](const Vec3&) { return 0.0; };
  return cond;
}

Conductivity affine_conductivity(const Vec3& a, double b) {
  Conductivity cond;
  cond.id = format_id("affine", {a.x(), a.y(), a.z(), b});
  const double spread = a.cwiseAbs().sum();
  if (b - spread > 0.0) {
    cond.kappa = certify(b - spread, b + spread, cond.id);
  } else {
    // not elliptic on [-1,1]^3; certify on the unit cube only, vertices are checked at assembly
    const double lo = b + a.cwiseMin(0.0).sum();
    const double hi = b + a.cwiseMax(0.0).sum();
    cond.kappa = certify(lo, hi, cond.id);
  }
  cond.sigma = [a, b](const Vec3& x) { return a.dot(x) + b; };
  cond.grad_sigma = [a](const Vec3&) { return a; };
  cond.sqrt_sigma_laplacian = [a, b](const Vec3& x) {
    const double s = std::sqrt(a.dot(x) + b);
    return -a.squaredNorm() / (4.0 * s * s * s);
  };
  return cond;
}

Conductivity gaussian_bump(const Vec3& center, double width, double amplitude, double base) {
  if (!(width > 0.0)) throw Error(ErrorKind::usage, "gaussian bump width must be positive");
  Conductivity cond;
  cond.id = format_id("gaussian-bump", {center.x(), center.y(), center.z(), width, amplitude, base});
  cond.kappa = certify(base + std::min(0.0, amplitude), base + std::max(0.0, amplitude), cond.id);
  const double w2 = width * width;
  cond.sigma = [=](const Vec3& x) { return base + amplitude * std::exp(-(x - center).squaredNorm() / w2); };
  cond.grad_sigma = [=](const Vec3& x) {
    const Vec3 d = x - center;
    return (amplitude * std::exp(-d.squaredNorm() / w2) * (-2.0 / w2) * d).eval();
  };
  cond.sqrt_sigma_laplacian = [=](const Vec3& x) {
    const Vec3 d = x - center;
    const double r2 = d.squaredNorm();
    const double e = amplitude * std::exp(-r2 / w2);
    const double s = std::sqrt(base + e);
    const double lap = e * (4.0 * r2 / (w2 * w2) - 6.0 / w2);
    const double grad2 = e * e * 4.0 * r2 / (w2 * w2);
    return lap / (2.0 * s) - grad2 / (4.0 * s * s * s);
  };
  return cond;
}

Conductivity product_conductivity(double beta) {
  Conductivity cond;
  cond.id = format_id("product", {beta});
  const double edge = (1.0 + beta) * (1.0 + beta);
  // 1 + beta x1^2 vanishes inside [-1,1] when beta <= -1
  cond.kappa = certify(beta > -1.0 ? std::min(1.0, edge) : 0.0, std::max(1.0, edge), cond.id);
  cond.sigma = [beta](const Vec3& x) {
    const double s = 1.0 + beta * x.x() * x.x();
    return s * s;
  };
  cond.grad_sigma = [beta](const Vec3& x) {
    const double s = 1.0 + beta * x.x() * x.x();
    return Vec3(4.0 * beta * x.x() * s, 0.0, 0.0);
  };
  cond.sqrt_sigma_laplacian = [beta](const Vec3&) { return 2.0 * beta; };
  return cond;
}

Conductivity with_matrix(Conductivity cond, MatrixField a, double mu) {
  if (!(mu >= 1.0)) throw Error(ErrorKind::ellipticity, "matrix bound mu must be >= 1");
  cond.matrix_A = std::move(a);
  cond.mu = mu;
  cond.id += "*A";
  return cond;
}

Conductivity make_conductivity(const std::string& family, const std::vector<double>& p) {
  auto need = [&](size_t lo, size_t hi) {
    if (p.size() < lo || p.size() > hi) {
      throw Error(ErrorKind::usage, "conductivity family '" + family + "' takes " + std::to_string(lo) +
                                        (lo == hi ? "" : "-" + std::to_string(hi)) + " parameters");
    }
  };
  if (family == "constant") {
    need(1, 1);
    return constant_conductivity(p[0]);
  }
  if (family == "affine") {
    need(4, 4);
    return affine_conductivity(Vec3(p[0], p[1], p[2]), p[3]);
  }
  if (family == "gaussian-bump") {
    need(5, 6);
    return gaussian_bump(Vec3(p[0], p[1], p[2]), p[3], p[4], p.size() == 6 ? p[5] : 1.0);
  }
  if (family == "product") {
    need(1, 1);
    return product_conductivity(p[0]);
  }
  throw Error(ErrorKind::usage, "unknown conductivity family '" + family + "'");
}

double sqrt_sigma_laplacian(const Conductivity& cond, const Vec3& x) {
  if (cond.sqrt_sigma_laplacian) return cond.sqrt_sigma_laplacian(x);
  constexpr double step = 1e-3;
  auto root = [&](const Vec3& y) { return std::sqrt(cond.sigma(y)); };
  const double center = root(x);
  double lap = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = step;
    lap += (-root(x + 2 * e) + 16.0 * root(x + e) - 30.0 * center + 16.0 * root(x - e) - root(x - 2 * e)) /
           (12.0 * step * step);
  }
  return lap;
}

}  // namespace dtnlab
