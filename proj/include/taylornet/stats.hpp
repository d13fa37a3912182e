#pragma once

#include <vector>

namespace taylornet {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double lo = 0.0;  // 95% band
  double hi = 0.0;
  int points = 0;
};

// Least squares of log(y) on log(x). Needs >= 3 points with positive values.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& v);

}  // namespace taylornet
