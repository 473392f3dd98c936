#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace gridmh {

/// log(sum(exp(x))). Returns -inf for an empty range or when every term is -inf.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

inline double log_sum_exp(const std::vector<double>& x) { return log_sum_exp(std::span<const double>(x)); }

inline double log_mean_exp(std::span<const double> x) {
  return log_sum_exp(x) - std::log(static_cast<double>(x.size()));
}

inline double log_mean_exp(const std::vector<double>& x) { return log_mean_exp(std::span<const double>(x)); }

}  // namespace gridmh
