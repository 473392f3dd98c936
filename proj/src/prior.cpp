#include "gridmh/prior.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gridmh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Validate {
  void operator()(const GammaPrior& g) const {
    if (!(g.shape > 0) || !(g.rate > 0)) throw ValidationError("gamma prior needs shape > 0 and rate > 0");
  }
  void operator()(const UniformPrior& u) const {
    if (!(u.lower < u.upper)) throw ValidationError("uniform prior needs lower < upper");
  }
  void operator()(const GaussianPrior& g) const {
    if (!(g.sd > 0) || !std::isfinite(g.mean)) throw ValidationError("gaussian prior needs sd > 0");
  }
};

bool coord_in_support(const CoordPrior& prior, double x) {
  if (!std::isfinite(x)) return false;
  if (std::holds_alternative<GammaPrior>(prior)) return x > 0;
  if (const auto* u = std::get_if<UniformPrior>(&prior)) return x >= u->lower && x <= u->upper;
  return true;
}

double coord_log_density(const CoordPrior& prior, double x) {
  if (!coord_in_support(prior, x)) return -kInf;
  if (const auto* g = std::get_if<GammaPrior>(&prior)) {
    return g->shape * std::log(g->rate) - std::lgamma(g->shape) + (g->shape - 1.0) * std::log(x) - g->rate * x;
  }
  if (const auto* u = std::get_if<UniformPrior>(&prior)) {
    if (!std::isfinite(u->lower) || !std::isfinite(u->upper)) return 0.0;
    return -std::log(u->upper - u->lower);
  }
  const auto& n = std::get<GaussianPrior>(prior);
  const double z = (x - n.mean) / n.sd;
  return -0.5 * z * z - std::log(n.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double coord_gradient(const CoordPrior& prior, double x) {
  if (const auto* g = std::get_if<GammaPrior>(&prior)) return (g->shape - 1.0) / x - g->rate;
  if (std::holds_alternative<UniformPrior>(prior)) return 0.0;
  const auto& n = std::get<GaussianPrior>(prior);
  return -(x - n.mean) / (n.sd * n.sd);
}

double coord_hessian(const CoordPrior& prior, double x) {
  if (const auto* g = std::get_if<GammaPrior>(&prior)) return -(g->shape - 1.0) / (x * x);
  if (std::holds_alternative<UniformPrior>(prior)) return 0.0;
  const auto& n = std::get<GaussianPrior>(prior);
  return -1.0 / (n.sd * n.sd);
}

}  // namespace

Prior::Prior(std::vector<CoordPrior> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw ValidationError("prior needs at least one coordinate");
  for (const auto& c : coords_) std::visit(Validate{}, c);
}

Prior Prior::gamma(int d, double shape, double rate) {
  return Prior(std::vector<CoordPrior>(static_cast<std::size_t>(d), GammaPrior{shape, rate}));
}

Prior Prior::uniform(const Vector& lower, const Vector& upper) {
  require_dims(upper, lower.size(), "uniform prior bounds");
  std::vector<CoordPrior> coords;
  for (Eigen::Index i = 0; i < lower.size(); ++i) coords.emplace_back(UniformPrior{lower[i], upper[i]});
  return Prior(std::move(coords));
}

Prior Prior::gaussian(int d, double mean, double sd) {
  return Prior(std::vector<CoordPrior>(static_cast<std::size_t>(d), GaussianPrior{mean, sd}));
}

Prior Prior::flat(int d) {
  return Prior(std::vector<CoordPrior>(static_cast<std::size_t>(d), UniformPrior{-kInf, kInf}));
}

bool Prior::in_support(const Vector& theta) const {
  require_dims(theta, dims(), "prior theta");
  for (int i = 0; i < dims(); ++i) {
    if (!coord_in_support(coords_[i], theta[i])) return false;
  }
  return true;
}

double Prior::log_density(const Vector& theta) const {
  require_dims(theta, dims(), "prior theta");
  double total = 0.0;
  for (int i = 0; i < dims(); ++i) total += coord_log_density(coords_[i], theta[i]);
  return total;
}

Vector Prior::gradient(const Vector& theta) const {
  require_dims(theta, dims(), "prior theta");
  Vector g(dims());
  for (int i = 0; i < dims(); ++i) g[i] = coord_gradient(coords_[i], theta[i]);
  return g;
}

Matrix Prior::hessian(const Vector& theta) const {
  require_dims(theta, dims(), "prior theta");
  Matrix h = Matrix::Zero(dims(), dims());
  for (int i = 0; i < dims(); ++i) h(i, i) = coord_hessian(coords_[i], theta[i]);
  return h;
}

Vector Prior::sample(Rng& rng) const {
  Vector theta(dims());
  for (int i = 0; i < dims(); ++i) {
    const auto& c = coords_[i];
    if (const auto* g = std::get_if<GammaPrior>(&c)) {
      std::gamma_distribution<double> dist(g->shape, 1.0 / g->rate);
      theta[i] = dist(rng);
    } else if (const auto* u = std::get_if<UniformPrior>(&c)) {
      if (!std::isfinite(u->lower) || !std::isfinite(u->upper)) {
        throw ValidationError("cannot sample from an improper flat prior");
      }
      theta[i] = u->lower + (u->upper - u->lower) * uniform01(rng);
    } else {
      const auto& n = std::get<GaussianPrior>(c);
      theta[i] = n.mean + n.sd * standard_normal(rng);
    }
  }
  return theta;
}

std::string Prior::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out << "; ";
    const auto& c = coords_[i];
    if (const auto* g = std::get_if<GammaPrior>(&c)) {
      out << "gamma(" << g->shape << ", " << g->rate << ")";
    } else if (const auto* u = std::get_if<UniformPrior>(&c)) {
      out << "uniform(" << u->lower << ", " << u->upper << ")";
    } else {
      const auto& n = std::get<GaussianPrior>(c);
      out << "gaussian(" << n.mean << ", " << n.sd << ")";
    }
  }
  return out.str();
}

}  // namespace gridmh
