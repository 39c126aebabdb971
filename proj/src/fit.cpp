#include "dtnlab/fit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "dtnlab/error.hpp"

namespace dtnlab {

ExponentFit fit_exponent(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::shape, "fit needs as many ys as xs");
  const auto n = xs.size();
  if (n < 3) throw Error(ErrorKind::usage, "fit needs at least 3 points");
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw Error(ErrorKind::domain, "fit data must be positive and finite");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::domain, "fit needs at least two distinct xs");
  ExponentFit fit;
  fit.points = static_cast<int>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const double se = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  fit.ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

}  // namespace dtnlab
