#include "simart/fit.hpp"

#include <algorithm>
#include <cmath>

#include "simart/error.hpp"

namespace simart {

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), "fit_line: size mismatch");
  require(xs.size() >= 2, "fit_line: need at least two points");
  auto n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  require(sxx > 0.0, "fit_line: abscissae are all equal");

  LinearFit f;
  f.count = static_cast<int>(xs.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss_res += r * r;
  }
  f.residual_rms = std::sqrt(ss_res / n);
  if (xs.size() > 2) {
    f.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  }
  return f;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: empty input");
  std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                   values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (values[mid - 1] + hi);
}

}  // namespace simart
