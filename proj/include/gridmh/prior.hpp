#pragma once

#include "gridmh/core.hpp"
#include "gridmh/rng.hpp"

#include <string>
#include <variant>
#include <vector>

namespace gridmh {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Uniform on [lower, upper]. Infinite bounds give an improper flat prior.
struct UniformPrior {
  double lower = 0.0;
  double upper = 1.0;
};

struct GaussianPrior {
  double mean = 0.0;
  double sd = 1.0;
};

using CoordPrior = std::variant<GammaPrior, UniformPrior, GaussianPrior>;

/// Product of independent per-coordinate priors.
class Prior {
 public:
  explicit Prior(std::vector<CoordPrior> coords);

  static Prior gamma(int d, double shape, double rate);
  static Prior uniform(const Vector& lower, const Vector& upper);
  static Prior gaussian(int d, double mean, double sd);
  static Prior flat(int d);

  int dims() const { return static_cast<int>(coords_.size()); }
  const std::vector<CoordPrior>& coords() const { return coords_; }

  bool in_support(const Vector& theta) const;
  /// -inf outside the support. Flat coordinates contribute 0.
  double log_density(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  /// Diagonal matrix of second derivatives of log p.
  Matrix hessian(const Vector& theta) const;
  /// Throws ValidationError for improper coordinates.
  Vector sample(Rng& rng) const;

  std::string describe() const;

 private:
  std::vector<CoordPrior> coords_;
};

}  // namespace gridmh
