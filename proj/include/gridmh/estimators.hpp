#pragma once

#include "gridmh/core.hpp"
#include "gridmh/precompute.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gridmh {

enum class EstimatorKind { one_pivot, direct_path, full_path };

std::string to_string(EstimatorKind kind);
/// Accepts "op", "dp", "fp" and the long names.
EstimatorKind parse_estimator_kind(const std::string& name);

struct GridPath {
  std::vector<std::size_t> indices;
};

/// Estimate of Z(theta)/Z(theta'). `log_value` is exact; `value` may overflow to inf.
struct RatioEstimate {
  double log_value = 0.0;
  double value = 1.0;
  EstimatorKind kind = EstimatorKind::full_path;
  int path_len = 1;
};

/// log of (1/n) sum_k exp((theta - theta_m)' s_m^k), an estimate of log Z(theta)/Z(theta_m).
double log_anchored_ratio(const PrecompData& precomp, const Vector& theta, std::size_t m);
/// The same on the natural scale. Throws NumericalError if it is not finite.
double anchored_ratio(const PrecompData& precomp, const Vector& theta, std::size_t m);

/// Staircase between two grid points, moving along the axes in `axis_order`
/// (empty: ascending). Falls back to a breadth-first shortest path when a staircase
/// point is missing; throws DisconnectedGrid when none exists.
GridPath build_path(const Grid& grid, std::size_t from, std::size_t to, const std::vector<int>& axis_order = {});

/// Ratio estimators over one PrecompData. The link table between neighbouring grid
/// points is filled in the constructor and read-only afterwards.
class RatioEstimator {
 public:
  explicit RatioEstimator(std::shared_ptr<const PrecompData> precomp);

  const PrecompData& precomp() const { return *precomp_; }
  std::shared_ptr<const PrecompData> shared() const { return precomp_; }

  RatioEstimate one_pivot(const Vector& theta, const Vector& theta_prime) const;
  RatioEstimate direct_path(const Vector& theta, const Vector& theta_prime) const;
  RatioEstimate full_path(const Vector& theta, const Vector& theta_prime, bool average_axis_orders = false) const;
  RatioEstimate estimate(EstimatorKind kind, const Vector& theta, const Vector& theta_prime,
                         bool average_axis_orders = false) const;

  /// log Z(a)/Z(b) for neighbouring points a, b, estimated from the draws at b.
  double log_link(std::size_t a, std::size_t b) const;
  /// log Z(a)/Z(b) estimated from the draws at b, for any two points.
  double log_direct(std::size_t a, std::size_t b) const;
  /// Sum of links along the path from a to b.
  double log_path(const GridPath& path) const;
  /// The grid-to-grid factor of DP or FP between nearest points a and b.
  double log_middle(EstimatorKind kind, std::size_t a, std::size_t b, bool average_axis_orders = false) const;

 private:
  double log_full_middle(std::size_t a, std::size_t b, bool average_axis_orders, int* path_len) const;

  std::shared_ptr<const PrecompData> precomp_;
  // links_[b][2*axis + (sign < 0)] = log Z(b + sign*e_axis)/Z(b); NaN where no neighbour.
  std::vector<std::vector<double>> links_;
};

}  // namespace gridmh
