#include "gridmh/diagnostics.hpp"

#include "gridmh/numeric.hpp"
#include "gridmh/parallel.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <tuple>

namespace gridmh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

int bin_of(double v, const TvReference& ref) {
  if (!(v >= ref.lo) || !(v <= ref.hi)) return -1;
  const int b = static_cast<int>((v - ref.lo) / (ref.hi - ref.lo) * ref.bins());
  return std::min(b, ref.bins() - 1);
}

void check_reference_args(double lo, double hi, int bins) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("TV range needs lo < hi");
  if (bins < 1) throw ValidationError("TV needs at least one bin");
}

}  // namespace

TvReference reference_from_density(const std::function<double(double)>& pdf, double lo, double hi, int bins) {
  check_reference_args(lo, hi, bins);
  TvReference ref{lo, hi, std::vector<double>(static_cast<std::size_t>(bins))};
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * width;
    ref.mass[static_cast<std::size_t>(b)] =
        boost::math::quadrature::gauss_kronrod<double, 21>::integrate(pdf, a, a + width, 15, 1e-10);
  }
  const double total = std::accumulate(ref.mass.begin(), ref.mass.end(), 0.0);
  if (!(total > 0) || !std::isfinite(total)) throw NumericalError("reference density has no mass on the TV range");
  for (auto& m : ref.mass) m /= total;
  return ref;
}

TvReference reference_from_gamma(double shape, double rate, int bins) {
  const boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
  const double lo = boost::math::quantile(dist, 0.0005);
  const double hi = boost::math::quantile(dist, 0.9995);
  return reference_from_density([&](double x) { return boost::math::pdf(dist, x); }, lo, hi, bins);
}

TvReference reference_from_samples(std::span<const double> samples, double lo, double hi, int bins) {
  check_reference_args(lo, hi, bins);
  TvReference ref{lo, hi, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
  double inside = 0.0;
  for (double v : samples) {
    const int b = bin_of(v, ref);
    if (b < 0) continue;
    ref.mass[static_cast<std::size_t>(b)] += 1.0;
    inside += 1.0;
  }
  if (inside == 0) throw ValidationError("no reference samples fall inside the TV range");
  for (auto& m : ref.mass) m /= inside;
  return ref;
}

double tv_distance(std::span<const double> values, const TvReference& reference) {
  if (values.empty()) throw ValidationError("TV of an empty ensemble");
  std::vector<double> counts(reference.mass.size(), 0.0);
  double outside = 0.0;
  for (double v : values) {
    const int b = bin_of(v, reference);
    if (b < 0) {
      outside += 1.0;
    } else {
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
  }
  const double total = static_cast<double>(values.size());
  double l1 = outside / total;
  for (std::size_t b = 0; b < counts.size(); ++b) l1 += std::abs(counts[b] / total - reference.mass[b]);
  return std::clamp(0.5 * l1, 0.0, 1.0);
}

TvCurve tv_occupation(const std::vector<ChainTrace>& ensemble, const TvReference& reference, int coord) {
  if (ensemble.empty()) throw ValidationError("TV of an empty ensemble");
  const std::size_t len = ensemble.front().states.size();
  for (const auto& t : ensemble) {
    if (t.states.size() != len) throw ValidationError("ensemble traces differ in length");
  }
  TvCurve curve{reference, std::vector<double>(len)};
  std::vector<double> column(ensemble.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t c = 0; c < ensemble.size(); ++c) column[c] = ensemble[c].states[i][coord];
    curve.tv[i] = tv_distance(column, reference);
  }
  return curve;
}

void write_tv_csv(std::ostream& out, const TvCurve& curve) {
  out << "iter,tv\n";
  out.precision(10);
  for (std::size_t i = 0; i < curve.tv.size(); ++i) out << i << ',' << curve.tv[i] << '\n';
}

double ess(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 10) throw ValidationError("ESS needs at least 10 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = values[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += centered[i] * centered[i + lag];
    return acc / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0)) return 1.0;
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double gamma = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (!(gamma > 0)) break;
    tau += 2.0 * gamma;
  }
  const double out = static_cast<double>(n) / std::max(tau, 1e-12);
  return std::min(out, static_cast<double>(n));
}

VarianceSummary summarize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw ValidationError("summary needs at least two values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double c = v - mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  const double var = m2 / static_cast<double>(n - 1);
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  return {mean, var, std::sqrt(var / static_cast<double>(n)),
          std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(n))};
}

std::vector<MomentReport> estimator_moments_batch(const PrecompFactory& factory, const std::vector<MomentQuery>& queries,
                                                  long replicates, std::uint64_t seed, int threads) {
  if (replicates < 2) throw ValidationError("estimator moments need at least two replicates");
  if (queries.empty()) return {};
  const PrecompData probe = factory(derive_seed(seed, 0));
  if (!exact_log_z(probe.model(), Vector::Ones(probe.dims()))) {
    throw IntractableModel("estimator moments need an exact normalizing constant");
  }
  const ExactPartition log_z(probe.model());

  std::vector<std::vector<double>> values(queries.size(), std::vector<double>(static_cast<std::size_t>(replicates)));
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    auto precomp = std::make_shared<const PrecompData>(factory(derive_seed(seed, r)));
    const RatioEstimator estimator(precomp);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto& query = queries[q];
      values[q][r] = estimator.estimate(query.kind, query.theta, query.theta_prime, query.average_axis_orders).value;
    }
  });

  std::vector<MomentReport> reports;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& query = queries[q];
    const auto s = summarize(values[q]);
    MomentReport rep;
    rep.kind = query.kind;
    rep.theta = query.theta;
    rep.theta_prime = query.theta_prime;
    rep.replicates = replicates;
    rep.truth = std::exp(log_z(query.theta) - log_z(query.theta_prime));
    rep.mean = s.mean;
    rep.bias = s.mean - rep.truth;
    rep.variance = s.variance;
    rep.bias_se = s.mean_se;
    rep.variance_se = s.variance_se;
    reports.push_back(rep);
  }
  return reports;
}

MomentReport estimator_moments(const PrecompFactory& factory, EstimatorKind kind, const Vector& theta,
                               const Vector& theta_prime, long replicates, std::uint64_t seed, int threads) {
  if (replicates < 100) throw ValidationError("estimator moments need at least 100 replicates");
  return estimator_moments_batch(factory, {{kind, theta, theta_prime}}, replicates, seed, threads).front();
}

std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("linear fit needs two or more paired values");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw ValidationError("linear fit needs distinct x values");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double er_anchored_variance(int p, double theta, double h, int n) {
  const double pbar = 0.5 * p * (p - 1);
  const double log_second = pbar * (softplus(theta + 2 * h) - softplus(theta));
  const double log_r = 2 * pbar * softplus(theta + h) - pbar * softplus(theta + 2 * h) - pbar * softplus(theta);
  return std::exp(log_second) * -std::expm1(log_r) / n;
}

namespace {

/// Per replicate, n draws at theta; estimator value exp(h s) averaged, for each h.
std::vector<VarianceSummary> anchored_variances(const GrfModel& model, double theta,
                                                const std::vector<double>& h_values, int n, long replicates,
                                                std::uint64_t seed, int sweeps, int threads) {
  if (model.dims() != 1) throw UnsupportedDimension("variance studies need a one-parameter model");
  if (n < 1 || replicates < 2) throw ValidationError("variance study needs n >= 1 and replicates >= 2");
  std::vector<std::vector<double>> values(h_values.size(), std::vector<double>(static_cast<std::size_t>(replicates)));
  const Vector at = Vector::Constant(1, theta);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    std::vector<double> stats(static_cast<std::size_t>(n));
    for (auto& s : stats) s = sample_stats(model, at, sweeps, rng)[0];
    std::vector<double> terms(stats.size());
    for (std::size_t j = 0; j < h_values.size(); ++j) {
      for (std::size_t k = 0; k < stats.size(); ++k) terms[k] = h_values[j] * stats[k];
      values[j][r] = std::exp(log_mean_exp(terms));
    }
  });
  std::vector<VarianceSummary> out;
  for (const auto& v : values) out.push_back(summarize(v));
  return out;
}

}  // namespace

SlopeReport variance_growth_study(int p, double theta, const std::vector<double>& h_values, int n, long replicates,
                                  std::uint64_t seed, double fit_from, int threads) {
  const auto model = GrfModel::erdos_renyi(p);
  const auto summaries = anchored_variances(model, theta, h_values, n, replicates, seed, 1, threads);
  SlopeReport report;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < h_values.size(); ++j) {
    const double h = h_values[j];
    report.points.push_back({h, summaries[j].variance, summaries[j].variance_se, er_anchored_variance(p, theta, h, n)});
    if (h >= fit_from && summaries[j].variance > 0) {
      xs.push_back(h);
      ys.push_back(std::log(n * summaries[j].variance));
    }
  }
  if (xs.size() >= 2) std::tie(report.intercept, report.slope) = linear_fit(xs, ys);
  return report;
}

SlopeReport local_variance_study(const GrfModel& model, double theta, const std::vector<double>& h_values, int n,
                                 long replicates, std::uint64_t seed, int sweeps, int threads) {
  const auto summaries = anchored_variances(model, theta, h_values, n, replicates, seed, sweeps, threads);
  SlopeReport report;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < h_values.size(); ++j) {
    const double h = h_values[j];
    double exact = kNaN;
    if (model.kind() == ModelKind::toy_gaussian && theta + 2 * h > 0) {
      const double second = std::sqrt(theta / (theta + 2 * h));
      const double first = std::sqrt(theta / (theta + h));
      exact = (second - first * first) / n;
    } else if (model.kind() == ModelKind::erdos_renyi) {
      exact = er_anchored_variance(model.nodes(), theta, h, n);
    }
    report.points.push_back({h, summaries[j].variance, summaries[j].variance_se, exact});
    if (h > 0 && summaries[j].variance > 0) {
      xs.push_back(std::log(h));
      ys.push_back(std::log(summaries[j].variance));
    }
  }
  if (xs.size() >= 2) std::tie(report.intercept, report.slope) = linear_fit(xs, ys);
  return report;
}

std::vector<FpDpRow> fp_vs_dp_study(const std::function<PrecompFactory(double eps)>& factory_for, const Vector& theta,
                                    const Vector& theta_prime, const std::vector<double>& eps_values,
                                    long replicates, std::uint64_t seed, int threads) {
  std::vector<FpDpRow> rows;
  for (std::size_t e = 0; e < eps_values.size(); ++e) {
    const auto reports = estimator_moments_batch(
        factory_for(eps_values[e]),
        {{EstimatorKind::full_path, theta, theta_prime}, {EstimatorKind::direct_path, theta, theta_prime}},
        replicates, derive_seed(seed, e), threads);
    rows.push_back({eps_values[e], reports[0], reports[1]});
  }
  return rows;
}

}  // namespace gridmh
