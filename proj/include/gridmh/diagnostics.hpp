#pragma once

#include "gridmh/chains.hpp"
#include "gridmh/core.hpp"
#include "gridmh/estimators.hpp"
#include "gridmh/models.hpp"
#include "gridmh/precompute.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace gridmh {

/// Reference probability mass over equal-width bins on [lo, hi]. Mass outside
/// the range is taken to be zero.
struct TvReference {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mass;

  int bins() const { return static_cast<int>(mass.size()); }
};

/// Bin masses of a density by adaptive quadrature, normalised over [lo, hi].
TvReference reference_from_density(const std::function<double(double)>& pdf, double lo, double hi, int bins = 50);
/// Gamma(shape, rate) over its central 99.9% interval.
TvReference reference_from_gamma(double shape, double rate, int bins = 50);
/// Histogram of samples; values outside [lo, hi] are dropped before normalising.
TvReference reference_from_samples(std::span<const double> samples, double lo, double hi, int bins = 50);

/// Half the L1 distance between the histogram of `values` and the reference; values
/// outside the bins count as an extra bucket with reference mass 0.
double tv_distance(std::span<const double> values, const TvReference& reference);

struct TvCurve {
  TvReference reference;
  std::vector<double> tv;  // one value per iteration, starting at the initial states
};

/// TV at each iteration between the cross-chain occupation histogram of
/// coordinate `coord` and the reference.
TvCurve tv_occupation(const std::vector<ChainTrace>& ensemble, const TvReference& reference, int coord = 0);

void write_tv_csv(std::ostream& out, const TvCurve& curve);

/// N / (1 + 2 sum rho_k) with Geyer's initial positive sequence; at most N. A
/// constant sequence returns 1.
double ess(std::span<const double> values);

struct MomentReport {
  EstimatorKind kind = EstimatorKind::full_path;
  Vector theta;
  Vector theta_prime;
  long replicates = 0;
  double truth = 1.0;  // Z(theta)/Z(theta')
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double bias_se = 0.0;
  double variance_se = 0.0;
};

struct MomentQuery {
  EstimatorKind kind;
  Vector theta;
  Vector theta_prime;
  bool average_axis_orders = false;
};

using PrecompFactory = std::function<PrecompData(std::uint64_t seed)>;

/// Re-runs the pre-computation once per replicate (seed derived from `seed` and the
/// replicate index) and evaluates every query on it. Needs exact log Z.
std::vector<MomentReport> estimator_moments_batch(const PrecompFactory& factory, const std::vector<MomentQuery>& queries,
                                                  long replicates, std::uint64_t seed, int threads = 0);

MomentReport estimator_moments(const PrecompFactory& factory, EstimatorKind kind, const Vector& theta,
                               const Vector& theta_prime, long replicates, std::uint64_t seed, int threads = 0);

/// Sample mean/variance with standard errors, the latter from the fourth central moment.
struct VarianceSummary {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};
VarianceSummary summarize(std::span<const double> values);

struct SlopePoint {
  double h = 0.0;
  double variance = 0.0;  // Monte Carlo
  double variance_se = 0.0;
  double exact = 0.0;  // closed form where available, otherwise NaN
};

struct SlopeReport {
  std::vector<SlopePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Erdos-Renyi with p nodes: variance of the n-draw anchored estimate of
/// Z(theta + h)/Z(theta) from draws at theta. Fits log(n v_n) against h over
/// h >= fit_from. `exact` holds the closed-form v_n(h).
SlopeReport variance_growth_study(int p, double theta, const std::vector<double>& h_values, int n, long replicates,
                                  std::uint64_t seed, double fit_from = 1.0, int threads = 0);

/// Closed-form variance of the Erdos-Renyi anchored estimate with n draws.
double er_anchored_variance(int p, double theta, double h, int n);

/// One-parameter model: variance of the n-draw anchored estimate of
/// Z(theta + h)/Z(theta). Fits log variance against log h over h > 0.
SlopeReport local_variance_study(const GrfModel& model, double theta, const std::vector<double>& h_values, int n,
                                 long replicates, std::uint64_t seed, int sweeps = 1, int threads = 0);

struct FpDpRow {
  double eps = 0.0;
  MomentReport fp;
  MomentReport dp;
};

/// For each eps, `factory_for(eps)` builds pre-computed data; reports FP and DP moments.
std::vector<FpDpRow> fp_vs_dp_study(const std::function<PrecompFactory(double eps)>& factory_for, const Vector& theta,
                                    const Vector& theta_prime, const std::vector<double>& eps_values,
                                    long replicates, std::uint64_t seed, int threads = 0);

/// Least-squares fit y = intercept + slope * x.
std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace gridmh
