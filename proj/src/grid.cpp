#include "gridmh/grid.hpp"

#include <cmath>
#include <limits>

namespace gridmh {

bool SupportBox::contains(const Vector& theta) const {
  require_dims(theta, mode.size(), "support theta");
  if (!theta.allFinite()) return false;
  const Vector u = to_coords * (theta - mode);
  return (u.array() >= lower.array()).all() && (u.array() <= upper.array()).all();
}

Grid::Grid(Vector mode, Matrix eigvecs, Vector eigvals, double eps)
    : mode_(std::move(mode)), eigvecs_(std::move(eigvecs)), eigvals_(std::move(eigvals)), eps_(eps) {
  const auto d = mode_.size();
  if (d < 1) throw ValidationError("grid needs dimension >= 1");
  if (eigvecs_.rows() != d || eigvecs_.cols() != d) throw DimensionMismatch("grid eigenvector matrix shape");
  require_dims(eigvals_, d, "grid eigenvalues");
  if (!(eps_ > 0) || !std::isfinite(eps_)) throw ValidationError("grid step eps must be positive");
  if (!(eigvals_.array() > 0).all() || !eigvals_.allFinite()) {
    throw ValidationError("grid eigenvalues must be positive");
  }
  const Vector root = eigvals_.array().sqrt();
  forward_ = eps_ * eigvecs_ * root.asDiagonal();
  inverse_ = (1.0 / eps_) * root.cwiseInverse().asDiagonal() * eigvecs_.transpose();
}

std::size_t Grid::add(const Coords& coords) {
  if (static_cast<int>(coords.size()) != dims()) throw DimensionMismatch("grid coordinates length");
  if (auto it = index_.find(coords); it != index_.end()) return it->second;
  points_.push_back({coords, theta_of(coords)});
  index_.emplace(coords, points_.size() - 1);
  return points_.size() - 1;
}

std::optional<std::size_t> Grid::find(const Coords& coords) const {
  if (auto it = index_.find(coords); it != index_.end()) return it->second;
  return std::nullopt;
}

Vector Grid::theta_of(const Coords& coords) const {
  Vector z(dims());
  for (int i = 0; i < dims(); ++i) z[i] = coords[i];
  return mode_ + forward_ * z;
}

Vector Grid::eigen_coords(const Vector& theta) const {
  require_dims(theta, dims(), "eigen_coords theta");
  return inverse_ * (theta - mode_);
}

std::size_t Grid::nearest(const Vector& theta) const {
  if (points_.empty()) throw InvalidState("nearest grid point of an empty grid");
  const Vector u = eigen_coords(theta);
  Coords rounded(dims());
  bool tie = false;
  bool representable = true;
  for (int i = 0; i < dims(); ++i) {
    const double frac = u[i] - std::floor(u[i]);
    if (frac == 0.5) tie = true;
    const double r = std::round(u[i]);
    if (!(std::abs(r) < 1e9)) representable = false;
    rounded[i] = representable ? static_cast<int>(r) : 0;
  }
  if (!tie && representable) {
    if (auto hit = find(rounded)) return *hit;
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points_.size(); ++k) {
    double dist = 0.0;
    for (int i = 0; i < dims(); ++i) {
      const double diff = u[i] - points_[k].coords[i];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

Vector Grid::step(int axis, int sign) const {
  if (axis < 0 || axis >= dims()) throw DimensionMismatch("grid axis out of range");
  return static_cast<double>(sign) * forward_.col(axis);
}

SupportBox Grid::support() const {
  if (points_.empty()) throw InvalidState("support box of an empty grid");
  Vector lower = Vector::Constant(dims(), std::numeric_limits<double>::infinity());
  Vector upper = -lower;
  for (const auto& p : points_) {
    for (int i = 0; i < dims(); ++i) {
      lower[i] = std::min(lower[i], static_cast<double>(p.coords[i]));
      upper[i] = std::max(upper[i], static_cast<double>(p.coords[i]));
    }
  }
  return {mode_, inverse_, lower.array() - 0.5, upper.array() + 0.5};
}

void Grid::validate(double tol) const {
  const Matrix gram = eigvecs_.transpose() * eigvecs_;
  if ((gram - Matrix::Identity(dims(), dims())).cwiseAbs().maxCoeff() > tol) {
    throw InvalidState("grid eigenvectors are not orthonormal");
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto& p = points_[k];
    if ((p.theta - theta_of(p.coords)).cwiseAbs().maxCoeff() > tol * std::max(1.0, p.theta.cwiseAbs().maxCoeff())) {
      throw InvalidState("grid point " + std::to_string(k) + " is off its lattice position");
    }
    if (index_.at(p.coords) != k) throw InvalidState("duplicate grid coordinates");
  }
}

bool Grid::operator==(const Grid& other) const {
  if (mode_ != other.mode_ || eigvecs_ != other.eigvecs_ || eigvals_ != other.eigvals_ || eps_ != other.eps_) {
    return false;
  }
  if (points_.size() != other.points_.size()) return false;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (points_[k].coords != other.points_[k].coords || points_[k].theta != other.points_[k].theta) return false;
  }
  return true;
}

Grid make_regular_grid(double origin, double eps, int first, int last) {
  if (first > last) throw ValidationError("regular grid needs first <= last");
  Grid grid(Vector::Constant(1, origin), Matrix::Identity(1, 1), Vector::Ones(1), eps);
  for (int k = first; k <= last; ++k) grid.add({k});
  return grid;
}

Vector eigen_coords(const Grid& grid, const Vector& theta) { return grid.eigen_coords(theta); }

}  // namespace gridmh
