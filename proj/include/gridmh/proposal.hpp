#pragma once

#include "gridmh/core.hpp"
#include "gridmh/rng.hpp"

#include <string>

namespace gridmh {

class Proposal {
 public:
  enum class Kind { random_walk, multiplicative };

  /// theta' = theta + scale * zeta, zeta ~ N(0, I).
  static Proposal random_walk(const Vector& scale);
  /// theta'_i = theta_i * exp(sigma * zeta_i); only valid for positive coordinates.
  static Proposal multiplicative(double sigma);

  Kind kind() const { return kind_; }
  const Vector& scale() const { return scale_; }
  double sigma() const { return sigma_; }

  Vector propose(const Vector& theta, Rng& rng) const;
  /// log h(theta | theta') - log h(theta' | theta).
  double log_ratio(const Vector& theta, const Vector& theta_prime) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::random_walk;
  Vector scale_;
  double sigma_ = 0.0;
};

}  // namespace gridmh
