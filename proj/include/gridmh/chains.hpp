#pragma once

#include "gridmh/core.hpp"
#include "gridmh/estimators.hpp"
#include "gridmh/grid.hpp"
#include "gridmh/models.hpp"
#include "gridmh/precompute.hpp"
#include "gridmh/prior.hpp"
#include "gridmh/proposal.hpp"
#include "gridmh/rng.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gridmh {

/// Posterior pi(theta | y) up to Z(theta): prior, observed statistics, and an
/// optional truncation box outside which the prior is taken as zero.
struct Target {
  GrfModel model;
  SuffStats y_stats;
  Prior prior;
  std::optional<SupportBox> support;

  Target(GrfModel model, SuffStats y_stats, Prior prior, std::optional<SupportBox> support = std::nullopt);

  bool in_support(const Vector& theta) const;
  /// log p(theta), or -inf outside the support.
  double log_prior(const Vector& theta) const;
};

struct ChainTrace {
  std::vector<Vector> states;       // iterations + 1
  std::vector<char> accepted;       // iterations
  std::vector<double> log_anchors;  // iterations + 1; NaN for chains without an anchor
  long out_of_support = 0;
  long estimator_calls = 0;

  std::size_t iterations() const { return accepted.size(); }
  double acceptance_rate() const;
  /// Cached anchored ratio Z_i after the last iteration (natural scale).
  double cached_anchor() const;
  /// Coordinate `i` of every state, optionally skipping a burn-in prefix.
  std::vector<double> coordinate(int i, std::size_t burn_in = 0) const;
};

/// log Z(theta)/Z(theta') supplied by the caller. Used for custom chains and tests.
using LogRatioFn = std::function<double(const Vector& theta, const Vector& theta_prime, Rng& rng)>;

/// Draw from the prior, retried until it lands in the support box.
Vector initial_state(const Target& target, Rng& rng);

/// Per iteration: propose, evaluate the ratio only for in-support proposals, then
/// always draw one uniform for the accept test.
ChainTrace mh_with_ratio(const Target& target, const Proposal& proposal, const Vector& init, long iters,
                         const LogRatioFn& log_ratio, Rng& rng);

/// Exact Z ratio; throws IntractableModel when no exact log Z exists.
ChainTrace mh_exact(const Target& target, const Proposal& proposal, const Vector& init, long iters, Rng& rng);

ChainTrace exchange(const Target& target, const Proposal& proposal, const Vector& init, long iters, int sweeps,
                    Rng& rng);

/// Averages n_aux importance weights q_theta(x_k)/q_theta'(x_k), x_k ~ f(.|theta').
ChainTrace noisy_mh(const Target& target, const Proposal& proposal, const Vector& init, long iters, int n_aux,
                    int sweeps, Rng& rng);

/// Metropolis with the ratio estimated from pre-computed statistics. The anchored
/// ratio of the current state is cached and only replaced on acceptance.
ChainTrace precomp_metropolis(const Target& target, const Proposal& proposal, const RatioEstimator& estimator,
                              EstimatorKind kind, const Vector& init, long iters, Rng& rng,
                              bool average_axis_orders = false);

/// Piecewise-linear interpolation of the per-grid-point mean and variance of s,
/// clamped to the end points. One-dimensional grids only.
class AbcInterpolator {
 public:
  explicit AbcInterpolator(const PrecompData& precomp);

  double mean(double theta) const;
  double variance(double theta) const;
  const std::vector<double>& knots() const { return knots_; }

 private:
  double interpolate(const std::vector<double>& values, double theta) const;

  std::vector<double> knots_;
  std::vector<double> means_;
  std::vector<double> variances_;
};

ChainTrace abc_mcmc_precomp(const Target& target, const Proposal& proposal, const PrecompData& precomp,
                            double tolerance, const Vector& init, long iters, Rng& rng);

/// CSV with columns iter, theta_1..theta_d, accepted, anchor. Row 0 is the initial state.
void write_trace_csv(std::ostream& out, const ChainTrace& trace);

}  // namespace gridmh
