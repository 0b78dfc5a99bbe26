#pragma once

// Small sample-statistics helpers for test assertions.

#include <cmath>
#include <span>
#include <vector>

namespace oracle {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  s2 /= static_cast<double>(x.size() - 1);
  return {m, std::sqrt(s2 / static_cast<double>(x.size()))};
}

// Sample covariance between two columns.
inline double sample_cov(std::span<const double> a, std::span<const double> b) {
  double ma = 0.0, mb = 0.0;
  size_t n = a.size();
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double c = 0.0;
  for (size_t i = 0; i < n; ++i) c += (a[i] - ma) * (b[i] - mb);
  return c / (n - 1);
}

}  // namespace oracle
