#include "gridmh/proposal.hpp"

#include <cmath>
#include <sstream>

namespace gridmh {

Proposal Proposal::random_walk(const Vector& scale) {
  if (scale.size() == 0 || !(scale.array() > 0).all() || !scale.allFinite()) {
    throw ValidationError("random-walk scales must be positive and finite");
  }
  Proposal p;
  p.kind_ = Kind::random_walk;
  p.scale_ = scale;
  return p;
}

Proposal Proposal::multiplicative(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw ValidationError("multiplicative sigma must be positive");
  Proposal p;
  p.kind_ = Kind::multiplicative;
  p.sigma_ = sigma;
  return p;
}

Vector Proposal::propose(const Vector& theta, Rng& rng) const {
  Vector next(theta.size());
  if (kind_ == Kind::random_walk) {
    require_dims(theta, scale_.size(), "proposal theta");
    for (Eigen::Index i = 0; i < theta.size(); ++i) next[i] = theta[i] + scale_[i] * standard_normal(rng);
  } else {
    for (Eigen::Index i = 0; i < theta.size(); ++i) next[i] = theta[i] * std::exp(sigma_ * standard_normal(rng));
  }
  return next;
}

double Proposal::log_ratio(const Vector& theta, const Vector& theta_prime) const {
  require_dims(theta_prime, theta.size(), "proposal theta'");
  if (kind_ == Kind::random_walk) return 0.0;
  // log-normal kernel: h(b|a) = phi(log(b/a)/sigma) / (sigma b), so the ratio is theta'/theta.
  double total = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) total += std::log(theta_prime[i] / theta[i]);
  return total;
}

std::string Proposal::describe() const {
  std::ostringstream out;
  if (kind_ == Kind::random_walk) {
    out << "random_walk(";
    for (Eigen::Index i = 0; i < scale_.size(); ++i) out << (i ? ", " : "") << scale_[i];
    out << ")";
  } else {
    out << "multiplicative(" << sigma_ << ")";
  }
  return out.str();
}

}  // namespace gridmh
