#pragma once

#include "gridmh/core.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace gridmh {

using Coords = std::vector<int>;

struct GridPoint {
  Coords coords;
  Vector theta;
};

/// Axis-aligned box in eigen-coordinates. A parameter is inside when every
/// coordinate of u = A (theta - mode) lies within [lower, upper].
struct SupportBox {
  Vector mode;
  Matrix to_coords;
  Vector lower;
  Vector upper;

  bool contains(const Vector& theta) const;
};

/// Points theta = mode + eps * V * Lambda^{1/2} * z for integer vectors z.
class Grid {
 public:
  Grid(Vector mode, Matrix eigvecs, Vector eigvals, double eps);

  int dims() const { return static_cast<int>(mode_.size()); }
  const Vector& mode() const { return mode_; }
  const Matrix& eigvecs() const { return eigvecs_; }
  const Vector& eigvals() const { return eigvals_; }
  double eps() const { return eps_; }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<GridPoint>& points() const { return points_; }
  const GridPoint& point(std::size_t i) const { return points_.at(i); }

  /// Adds the point with these eigen-coordinates unless present; returns its index.
  std::size_t add(const Coords& coords);
  std::optional<std::size_t> find(const Coords& coords) const;

  Vector theta_of(const Coords& coords) const;
  /// u = (1/eps) Lambda^{-1/2} V' (theta - mode).
  Vector eigen_coords(const Vector& theta) const;
  /// Nearest point in eigen-coordinates; exact ties go to the lowest index.
  std::size_t nearest(const Vector& theta) const;
  /// One unit step along `axis` (sign +1 or -1), as a parameter-space displacement.
  Vector step(int axis, int sign) const;

  /// Bounding box of the point coordinates widened by half a cell per side.
  SupportBox support() const;

  /// Throws InvalidState if a stored point violates the coordinate map or V is not orthonormal.
  void validate(double tol = 1e-9) const;

  bool operator==(const Grid& other) const;

 private:
  Vector mode_;
  Matrix eigvecs_;
  Vector eigvals_;
  double eps_;
  Matrix forward_;  // eps * V * Lambda^{1/2}
  Matrix inverse_;  // (1/eps) Lambda^{-1/2} V'
  std::vector<GridPoint> points_;
  std::map<Coords, std::size_t> index_;
};

/// One-dimensional grid {origin + k*eps : first <= k <= last} with V = 1, Lambda = 1
/// and the mode placed at `origin`.
Grid make_regular_grid(double origin, double eps, int first, int last);

Vector eigen_coords(const Grid& grid, const Vector& theta);

}  // namespace gridmh
