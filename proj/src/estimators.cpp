#include "gridmh/estimators.hpp"

#include "gridmh/numeric.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace gridmh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RatioEstimate make_estimate(double log_value, EstimatorKind kind, int path_len) {
  if (!std::isfinite(log_value)) {
    throw NumericalError(to_string(kind) + " estimate is not finite");
  }
  return {log_value, std::exp(log_value), kind, path_len};
}

std::size_t link_slot(int axis, int sign) { return 2 * static_cast<std::size_t>(axis) + (sign < 0 ? 1 : 0); }

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::one_pivot: return "op";
    case EstimatorKind::direct_path: return "dp";
    case EstimatorKind::full_path: return "fp";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  if (name == "op" || name == "one_pivot") return EstimatorKind::one_pivot;
  if (name == "dp" || name == "direct_path") return EstimatorKind::direct_path;
  if (name == "fp" || name == "full_path") return EstimatorKind::full_path;
  throw ValidationError("unknown estimator '" + name + "' (expected op, dp or fp)");
}

double log_anchored_ratio(const PrecompData& precomp, const Vector& theta, std::size_t m) {
  require_dims(theta, precomp.dims(), "anchored ratio theta");
  const Matrix& block = precomp.stats(m);
  if (block.rows() == 0) throw InvalidState("grid point has no stored statistics");
  const Vector exponents = block * (theta - precomp.grid().point(m).theta);
  const double out = log_mean_exp(std::span<const double>(exponents.data(), static_cast<std::size_t>(exponents.size())));
  if (!std::isfinite(out)) throw NumericalError("anchored ratio is not finite at grid point " + std::to_string(m));
  return out;
}

double anchored_ratio(const PrecompData& precomp, const Vector& theta, std::size_t m) {
  const double value = std::exp(log_anchored_ratio(precomp, theta, m));
  if (!std::isfinite(value) || value <= 0) throw NumericalError("anchored ratio overflows double precision");
  return value;
}

GridPath build_path(const Grid& grid, std::size_t from, std::size_t to, const std::vector<int>& axis_order) {
  if (from >= grid.size() || to >= grid.size()) throw InvalidState("path endpoint outside the grid");
  const int d = grid.dims();
  std::vector<int> order = axis_order;
  if (order.empty()) {
    for (int i = 0; i < d; ++i) order.push_back(i);
  }
  if (static_cast<int>(order.size()) != d) throw DimensionMismatch("axis order must list every axis once");

  GridPath path{{from}};
  Coords cur = grid.point(from).coords;
  const Coords& target = grid.point(to).coords;
  bool complete = true;
  for (int axis : order) {
    if (axis < 0 || axis >= d) throw DimensionMismatch("axis order entry out of range");
    while (complete && cur[axis] != target[axis]) {
      cur[axis] += cur[axis] < target[axis] ? 1 : -1;
      const auto idx = grid.find(cur);
      if (!idx) {
        complete = false;
        break;
      }
      path.indices.push_back(*idx);
    }
  }
  if (complete) return path;

  // Breadth-first search; neighbours visited by ascending axis, + before -.
  std::vector<std::size_t> parent(grid.size(), grid.size());
  std::queue<std::size_t> frontier;
  parent[from] = from;
  frontier.push(from);
  while (!frontier.empty() && parent[to] == grid.size()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (int axis = 0; axis < d; ++axis) {
      for (int sign : {1, -1}) {
        Coords c = grid.point(u).coords;
        c[axis] += sign;
        const auto v = grid.find(c);
        if (v && parent[*v] == grid.size()) {
          parent[*v] = u;
          frontier.push(*v);
        }
      }
    }
  }
  if (parent[to] == grid.size()) {
    throw DisconnectedGrid("no path between grid points " + std::to_string(from) + " and " + std::to_string(to));
  }
  std::vector<std::size_t> reversed{to};
  while (reversed.back() != from) reversed.push_back(parent[reversed.back()]);
  return GridPath{{reversed.rbegin(), reversed.rend()}};
}

RatioEstimator::RatioEstimator(std::shared_ptr<const PrecompData> precomp) : precomp_(std::move(precomp)) {
  if (!precomp_) throw InvalidState("estimator needs pre-computed data");
  if (precomp_->n() < 1) throw InvalidState("estimator needs at least one stored draw per grid point");
  const Grid& grid = precomp_->grid();
  const int d = grid.dims();
  links_.assign(grid.size(), std::vector<double>(2 * static_cast<std::size_t>(d), kNaN));
  for (std::size_t b = 0; b < grid.size(); ++b) {
    for (int axis = 0; axis < d; ++axis) {
      for (int sign : {1, -1}) {
        Coords c = grid.point(b).coords;
        c[axis] += sign;
        if (const auto a = grid.find(c)) links_[b][link_slot(axis, sign)] = log_direct(*a, b);
      }
    }
  }
}

double RatioEstimator::log_direct(std::size_t a, std::size_t b) const {
  if (a == b) return 0.0;
  return log_anchored_ratio(*precomp_, precomp_->grid().point(a).theta, b);
}

double RatioEstimator::log_link(std::size_t a, std::size_t b) const {
  const Grid& grid = precomp_->grid();
  const Coords& ca = grid.point(a).coords;
  const Coords& cb = grid.point(b).coords;
  int axis = -1;
  int sign = 0;
  for (int i = 0; i < grid.dims(); ++i) {
    const int diff = ca[i] - cb[i];
    if (diff == 0) continue;
    if (axis >= 0 || std::abs(diff) != 1) throw InvalidState("grid points are not neighbours");
    axis = i;
    sign = diff;
  }
  if (axis < 0) return 0.0;
  return links_[b][link_slot(axis, sign)];
}

double RatioEstimator::log_path(const GridPath& path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.indices.size(); ++i) total += log_link(path.indices[i - 1], path.indices[i]);
  return total;
}

double RatioEstimator::log_full_middle(std::size_t a, std::size_t b, bool average_axis_orders, int* path_len) const {
  const Grid& grid = precomp_->grid();
  const GridPath path = build_path(grid, a, b);
  if (path_len) *path_len = static_cast<int>(path.indices.size());
  const double first = log_path(path);
  if (!average_axis_orders || grid.dims() != 2) return first;
  const GridPath other = build_path(grid, a, b, {1, 0});
  const double second = log_path(other);
  return log_mean_exp(std::vector<double>{first, second});
}

double RatioEstimator::log_middle(EstimatorKind kind, std::size_t a, std::size_t b, bool average_axis_orders) const {
  switch (kind) {
    case EstimatorKind::direct_path: return log_direct(a, b);
    case EstimatorKind::full_path: return log_full_middle(a, b, average_axis_orders, nullptr);
    case EstimatorKind::one_pivot: break;
  }
  throw InvalidState("the one pivot estimator has no grid-to-grid factor");
}

RatioEstimate RatioEstimator::one_pivot(const Vector& theta, const Vector& theta_prime) const {
  const std::size_t pivot = precomp_->nearest(0.5 * (theta + theta_prime));
  const double log_value =
      log_anchored_ratio(*precomp_, theta, pivot) - log_anchored_ratio(*precomp_, theta_prime, pivot);
  return make_estimate(log_value, EstimatorKind::one_pivot, 1);
}

RatioEstimate RatioEstimator::direct_path(const Vector& theta, const Vector& theta_prime) const {
  const std::size_t t1 = precomp_->nearest(theta);
  const std::size_t t2 = precomp_->nearest(theta_prime);
  const double log_value = log_anchored_ratio(*precomp_, theta, t1) + log_direct(t1, t2) -
                           log_anchored_ratio(*precomp_, theta_prime, t2);
  return make_estimate(log_value, EstimatorKind::direct_path, t1 == t2 ? 1 : 2);
}

RatioEstimate RatioEstimator::full_path(const Vector& theta, const Vector& theta_prime, bool average_axis_orders) const {
  const std::size_t t1 = precomp_->nearest(theta);
  const std::size_t t2 = precomp_->nearest(theta_prime);
  int path_len = 1;
  const double middle = log_full_middle(t1, t2, average_axis_orders, &path_len);
  const double log_value =
      log_anchored_ratio(*precomp_, theta, t1) + middle - log_anchored_ratio(*precomp_, theta_prime, t2);
  return make_estimate(log_value, EstimatorKind::full_path, path_len);
}

RatioEstimate RatioEstimator::estimate(EstimatorKind kind, const Vector& theta, const Vector& theta_prime,
                                       bool average_axis_orders) const {
  switch (kind) {
    case EstimatorKind::one_pivot: return one_pivot(theta, theta_prime);
    case EstimatorKind::direct_path: return direct_path(theta, theta_prime);
    case EstimatorKind::full_path: return full_path(theta, theta_prime, average_axis_orders);
  }
  throw InvalidState("unknown estimator kind");
}

}  // namespace gridmh
