#include "gridmh/chains.hpp"

#include "gridmh/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gridmh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Shared Metropolis-Hastings loop. `ratio(theta, theta', rng, anchor, candidate_anchor)`
/// returns log Z(theta)/Z(theta') given the cached anchor of theta and may set the
/// anchor of theta'. `on_accept` runs after each accepted move. With
/// `with_likelihood` false the exp(theta' s(y)) factor is left out (ABC).
template <typename RatioFn, typename AcceptFn>
ChainTrace run_chain(const Target& target, const Proposal& proposal, const Vector& init, long iters, Rng& rng,
                     double init_log_anchor, bool with_likelihood, RatioFn&& ratio, AcceptFn&& on_accept) {
  if (iters < 0) throw ValidationError("iteration count must be >= 0");
  require_dims(init, target.model.dims(), "chain init");
  if (!target.in_support(init)) throw ValidationError("chain init lies outside the target support");

  ChainTrace trace;
  trace.states.reserve(static_cast<std::size_t>(iters) + 1);
  trace.accepted.reserve(static_cast<std::size_t>(iters));
  trace.log_anchors.reserve(static_cast<std::size_t>(iters) + 1);
  trace.states.push_back(init);
  trace.log_anchors.push_back(init_log_anchor);

  auto log_target_of = [&](const Vector& t) {
    return target.log_prior(t) + (with_likelihood ? t.dot(target.y_stats) : 0.0);
  };
  Vector theta = init;
  double log_anchor = init_log_anchor;
  double log_target = log_target_of(theta);
  for (long it = 0; it < iters; ++it) {
    const Vector candidate = proposal.propose(theta, rng);
    double candidate_anchor = kNaN;
    double candidate_target = 0.0;
    double log_alpha = -std::numeric_limits<double>::infinity();
    if (target.in_support(candidate)) {
      candidate_target = log_target_of(candidate);
      double log_z_ratio = 0.0;
      try {
        log_z_ratio = ratio(theta, candidate, rng, log_anchor, candidate_anchor);
      } catch (const NumericalError& e) {
        throw NumericalError("iteration " + std::to_string(it + 1) + ": " + e.what());
      }
      ++trace.estimator_calls;
      log_alpha = candidate_target - log_target + log_z_ratio + proposal.log_ratio(theta, candidate);
      if (std::isnan(log_alpha)) throw NumericalError("iteration " + std::to_string(it + 1) + ": NaN acceptance ratio");
    } else {
      ++trace.out_of_support;
    }
    const bool accept = std::log(uniform01(rng)) < log_alpha;
    if (accept) {
      theta = candidate;
      log_target = candidate_target;
      log_anchor = candidate_anchor;
      on_accept();
    }
    trace.states.push_back(theta);
    trace.accepted.push_back(accept ? 1 : 0);
    trace.log_anchors.push_back(log_anchor);
  }
  return trace;
}

void no_op() {}

}  // namespace

Target::Target(GrfModel m, SuffStats y, Prior p, std::optional<SupportBox> box)
    : model(std::move(m)), y_stats(std::move(y)), prior(std::move(p)), support(std::move(box)) {
  require_dims(y_stats, model.dims(), "observed statistics");
  if (prior.dims() != model.dims()) throw DimensionMismatch("prior dimension differs from model dimension");
  if (support) require_dims(support->mode, model.dims(), "support box");
}

bool Target::in_support(const Vector& theta) const {
  if (!prior.in_support(theta)) return false;
  return !support || support->contains(theta);
}

double Target::log_prior(const Vector& theta) const {
  if (!in_support(theta)) return -std::numeric_limits<double>::infinity();
  return prior.log_density(theta);
}

double ChainTrace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  return static_cast<double>(std::count(accepted.begin(), accepted.end(), 1)) / static_cast<double>(accepted.size());
}

double ChainTrace::cached_anchor() const { return log_anchors.empty() ? kNaN : std::exp(log_anchors.back()); }

std::vector<double> ChainTrace::coordinate(int i, std::size_t burn_in) const {
  std::vector<double> out;
  for (std::size_t k = std::min(burn_in, states.size()); k < states.size(); ++k) out.push_back(states[k][i]);
  return out;
}

Vector initial_state(const Target& target, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector theta = target.prior.sample(rng);
    if (target.in_support(theta)) return theta;
  }
  throw ValidationError("could not draw an initial state inside the support box");
}

ChainTrace mh_with_ratio(const Target& target, const Proposal& proposal, const Vector& init, long iters,
                         const LogRatioFn& log_ratio, Rng& rng) {
  return run_chain(
      target, proposal, init, iters, rng, kNaN, true,
      [&](const Vector& a, const Vector& b, Rng& r, double, double&) { return log_ratio(a, b, r); }, no_op);
}

ChainTrace mh_exact(const Target& target, const Proposal& proposal, const Vector& init, long iters, Rng& rng) {
  if (!exact_log_z(target.model, Vector::Ones(target.model.dims()))) {
    throw IntractableModel(target.model.describe() + " has no exact normalizing constant");
  }
  const ExactPartition log_z(target.model);
  return mh_with_ratio(
      target, proposal, init, iters,
      [&](const Vector& a, const Vector& b, Rng&) { return log_z(a) - log_z(b); }, rng);
}

ChainTrace noisy_mh(const Target& target, const Proposal& proposal, const Vector& init, long iters, int n_aux,
                    int sweeps, Rng& rng) {
  if (n_aux < 1) throw ValidationError("noisy MH needs n_aux >= 1");
  std::vector<double> weights(static_cast<std::size_t>(n_aux));
  return mh_with_ratio(
      target, proposal, init, iters,
      [&](const Vector& a, const Vector& b, Rng& r) {
        for (int k = 0; k < n_aux; ++k) {
          weights[static_cast<std::size_t>(k)] = (a - b).dot(sample_stats(target.model, b, sweeps, r));
        }
        return n_aux == 1 ? weights[0] : log_mean_exp(weights);
      },
      rng);
}

ChainTrace exchange(const Target& target, const Proposal& proposal, const Vector& init, long iters, int sweeps,
                    Rng& rng) {
  return noisy_mh(target, proposal, init, iters, 1, sweeps, rng);
}

ChainTrace precomp_metropolis(const Target& target, const Proposal& proposal, const RatioEstimator& estimator,
                              EstimatorKind kind, const Vector& init, long iters, Rng& rng, bool average_axis_orders) {
  const PrecompData& precomp = estimator.precomp();
  if (!(precomp.model() == target.model)) {
    throw ValidationError("pre-computed data was built for " + precomp.model().describe() + ", target is " +
                          target.model.describe());
  }
  require_dims(init, precomp.dims(), "chain init");
  std::size_t current = precomp.nearest(init);
  std::size_t proposed = current;
  const double init_anchor = log_anchored_ratio(precomp, init, current);
  return run_chain(
      target, proposal, init, iters, rng, init_anchor, true,
      [&](const Vector& theta, const Vector& candidate, Rng&, double anchor, double& candidate_anchor) {
        proposed = precomp.nearest(candidate);
        candidate_anchor = log_anchored_ratio(precomp, candidate, proposed);
        if (kind == EstimatorKind::one_pivot) return estimator.one_pivot(theta, candidate).log_value;
        const double log_value =
            anchor + estimator.log_middle(kind, current, proposed, average_axis_orders) - candidate_anchor;
        if (!std::isfinite(log_value)) throw NumericalError(to_string(kind) + " estimate is not finite");
        return log_value;
      },
      [&] { current = proposed; });
}

AbcInterpolator::AbcInterpolator(const PrecompData& precomp) {
  if (precomp.dims() != 1) throw UnsupportedDimension("ABC interpolation is defined for one-dimensional grids only");
  if (precomp.n() < 2) throw InvalidState("ABC interpolation needs at least two draws per grid point");
  std::vector<std::size_t> order(precomp.size());
  for (std::size_t m = 0; m < order.size(); ++m) order[m] = m;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return precomp.grid().point(a).theta[0] < precomp.grid().point(b).theta[0];
  });
  for (std::size_t m : order) {
    const Vector col = precomp.stats(m).col(0);
    const double mu = col.mean();
    const double var = (col.array() - mu).square().sum() / static_cast<double>(col.size() - 1);
    knots_.push_back(precomp.grid().point(m).theta[0]);
    means_.push_back(mu);
    variances_.push_back(var);
  }
}

double AbcInterpolator::interpolate(const std::vector<double>& values, double theta) const {
  if (theta <= knots_.front()) return values.front();
  if (theta >= knots_.back()) return values.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), theta) - knots_.begin());
  const std::size_t lo = hi - 1;
  const double w = (theta - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return (1.0 - w) * values[lo] + w * values[hi];
}

double AbcInterpolator::mean(double theta) const { return interpolate(means_, theta); }
double AbcInterpolator::variance(double theta) const { return interpolate(variances_, theta); }

ChainTrace abc_mcmc_precomp(const Target& target, const Proposal& proposal, const PrecompData& precomp,
                            double tolerance, const Vector& init, long iters, Rng& rng) {
  if (target.model.dims() != 1 || precomp.dims() != 1) {
    throw UnsupportedDimension("pre-computing ABC supports one-parameter models only");
  }
  if (!(precomp.model() == target.model)) throw ValidationError("pre-computed data was built for another model");
  if (!(tolerance > 0)) throw ValidationError("ABC tolerance must be positive");
  const AbcInterpolator interp(precomp);
  const double observed = target.y_stats[0];
  // The likelihood enters only through the indicator: the ratio slot carries 0 or
  // -inf, and the simulated statistic is drawn before the uniform.
  return run_chain(
      target, proposal, init, iters, rng, kNaN, false,
      [&](const Vector&, const Vector& candidate, Rng& r, double, double&) {
        const double mu = interp.mean(candidate[0]);
        const double sd = std::sqrt(std::max(0.0, interp.variance(candidate[0])));
        const double simulated = mu + sd * standard_normal(r);
        return std::abs(simulated - observed) < tolerance ? 0.0 : -std::numeric_limits<double>::infinity();
      },
      no_op);
}

void write_trace_csv(std::ostream& out, const ChainTrace& trace) {
  const int d = trace.states.empty() ? 0 : static_cast<int>(trace.states.front().size());
  out << "iter";
  for (int i = 1; i <= d; ++i) out << ",theta_" << i;
  out << ",accepted,anchor\n";
  out.precision(17);
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    out << k;
    for (int i = 0; i < d; ++i) out << ',' << trace.states[k][i];
    out << ',' << (k == 0 ? 1 : static_cast<int>(trace.accepted[k - 1])) << ',';
    if (!std::isnan(trace.log_anchors[k])) out << std::exp(trace.log_anchors[k]);
    out << '\n';
  }
}

}  // namespace gridmh
