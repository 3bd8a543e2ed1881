#pragma once

#include <vector>

namespace simart {

// Ordinary least squares y = slope * x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
  int count = 0;
};

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// Median by partial sort; the input is taken by value on purpose.
double median(std::vector<double> values);

}  // namespace simart
