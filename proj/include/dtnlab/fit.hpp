#pragma once

#include <vector>

namespace dtnlab {

struct ExponentFit {
  double slope;
  double intercept;  // of log y against log x
  double ci95;       // half-width of the 95% interval on the slope
  int points;
};

/// Least-squares fit of log y = intercept + slope log x. Needs >= 3 points,
/// all positive; the interval uses Student's t with n-2 degrees of freedom.
ExponentFit fit_exponent(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace dtnlab
