#include "gridmh/diagnostics.hpp"
#include "gridmh/harness.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/math/distributions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace gridmh;

namespace {

ChainTrace constant_trace(double x, std::size_t iters) {
  ChainTrace t;
  t.states.assign(iters + 1, Vector::Constant(1, x));
  t.accepted.assign(iters, 0);
  t.log_anchors.assign(iters + 1, 0.0);
  return t;
}

}  // namespace

TEST_CASE("gamma reference bins") {
  const TvReference ref = reference_from_gamma(1.5, 3.0, 50);
  const boost::math::gamma_distribution<double> g(1.5, 1.0 / 3.0);
  CHECK(ref.bins() == 50);
  CHECK(ref.lo == doctest::Approx(boost::math::quantile(g, 0.0005)));
  CHECK(ref.hi == doctest::Approx(boost::math::quantile(g, 0.9995)));
  CHECK(std::accumulate(ref.mass.begin(), ref.mass.end(), 0.0) == doctest::Approx(1.0));
  const double w = (ref.hi - ref.lo) / 50.0;
  const double first = boost::math::cdf(g, ref.lo + w) - boost::math::cdf(g, ref.lo);
  CHECK(ref.mass[0] == doctest::Approx(first / 0.999).epsilon(1e-6));
}

TEST_CASE("TV of iid draws from the reference is at the multinomial noise level") {
  const TvReference ref = reference_from_gamma(1.5, 3.0, 50);
  std::mt19937_64 rng(1);
  std::gamma_distribution<double> gamma(1.5, 1.0 / 3.0);
  std::vector<double> draws(100000);
  for (auto& x : draws) x = gamma(rng);
  const double tv = tv_distance(draws, ref);
  CHECK(tv <= 0.02);

  // Noise level from multinomial counts with the reference masses, plus the
  // 0.1% outside the bins.
  std::vector<double> sims;
  for (int r = 0; r < 50; ++r) {
    std::vector<double> probs(ref.mass.begin(), ref.mass.end());
    for (auto& p : probs) p *= 0.999;
    probs.push_back(0.001);
    std::discrete_distribution<int> pick(probs.begin(), probs.end());
    std::vector<double> counts(probs.size(), 0.0);
    for (int k = 0; k < 100000; ++k) counts[static_cast<std::size_t>(pick(rng))] += 1.0;
    double l1 = counts.back() / 1e5;
    for (int b = 0; b < 50; ++b) l1 += std::abs(counts[static_cast<std::size_t>(b)] / 1e5 - ref.mass[static_cast<std::size_t>(b)]);
    sims.push_back(0.5 * l1);
  }
  std::sort(sims.begin(), sims.end());
  CHECK(tv <= sims.back() * 1.5);
  CHECK(tv >= sims.front() * 0.5);
}

TEST_CASE("TV edge cases") {
  const TvReference ref = reference_from_gamma(1.5, 3.0, 50);
  const std::vector<double> outside(1000, 100.0);
  CHECK(tv_distance(outside, ref) == doctest::Approx(1.0));

  std::vector<double> xs;
  for (int i = 0; i < 999; ++i) xs.push_back(std::sin(i) + 2.0);
  const TvReference self = reference_from_samples(xs, 0.5, 3.5, 50);
  CHECK(tv_distance(xs, self) == 0.0);

  std::vector<ChainTrace> ensemble{constant_trace(0.4, 5), constant_trace(0.4, 5)};
  const TvCurve curve = tv_occupation(ensemble, ref);
  CHECK(curve.tv.size() == 6);
  for (double v : curve.tv) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS(tv_occupation({}, ref));

  std::ostringstream out;
  write_tv_csv(out, curve);
  CHECK(out.str().rfind("iter,tv\n", 0) == 0);
}

TEST_CASE("effective sample size") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> iid(10000);
  for (auto& x : iid) x = z(rng);
  const double e = ess(iid);
  CHECK(e >= 0.9 * 10000);
  CHECK(e <= 10000);

  CHECK(ess(std::vector<double>(100, 2.5)) == 1.0);

  std::vector<double> ar(100000);
  double prev = 0.0;
  for (auto& x : ar) {
    x = 0.5 * prev + z(rng) * std::sqrt(0.75);
    prev = x;
  }
  CHECK(ess(ar) == doctest::Approx(100000.0 / 3.0).epsilon(0.1));
}

TEST_CASE("variance summary") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const VarianceSummary s = summarize(x);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.mean_se == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(s.variance_se > 0.0);
}

TEST_CASE("estimator moments") {
  const PrecompFactory f = toy_precomp_factory(0.1, 10);
  for (auto kind : {EstimatorKind::one_pivot, EstimatorKind::direct_path, EstimatorKind::full_path}) {
    const MomentReport same = estimator_moments(f, kind, Vector::Constant(1, 0.7), Vector::Constant(1, 0.7), 100, 1);
    CHECK(same.bias == 0.0);
    CHECK(same.variance == 0.0);
  }
  CHECK_THROWS(estimator_moments(f, EstimatorKind::full_path, Vector::Ones(1), Vector::Ones(1), 50, 1));

  const MomentReport fp =
      estimator_moments(f, EstimatorKind::full_path, Vector::Constant(1, 1.01), Vector::Constant(1, 2.06), 2000, 2);
  CHECK(fp.truth == doctest::Approx(oracle::toy_ratio(1.01, 2.06)));
  CHECK(std::abs(fp.bias) < 0.01);
  CHECK(fp.variance > 0.005 / 3.0);
  CHECK(fp.variance < 0.005 * 3.0);

  const auto batch = estimator_moments_batch(
      f, {{EstimatorKind::one_pivot, Vector::Constant(1, 0.12), Vector::Constant(1, 0.94)},
          {EstimatorKind::full_path, Vector::Constant(1, 0.12), Vector::Constant(1, 0.94)}},
      2000, 3);
  CHECK(batch[0].variance >= 10.0 * batch[1].variance);

  const PrecompFactory er = [](std::uint64_t seed) {
    return run_precompute(GrfModel::ising(5, 5), make_regular_grid(0.0, 0.1, 0, 1), 5, 1, seed, 1);
  };
  CHECK_THROWS_AS(estimator_moments(er, EstimatorKind::full_path, Vector::Zero(1), Vector::Ones(1), 100, 1),
                  IntractableModel);
}

TEST_CASE("Erdos-Renyi variance growth") {
  CHECK(er_anchored_variance(5, 0.0, 0.0, 10) == 0.0);
  // n = 1: Var exp(h S), S ~ Binomial(10, 1/2).
  const double h = 0.3;
  const double m2 = std::pow((1.0 + std::exp(2.0 * h)) / 2.0, 10);
  const double m1 = std::pow((1.0 + std::exp(h)) / 2.0, 10);
  CHECK(er_anchored_variance(5, 0.0, h, 1) == doctest::Approx(m2 - m1 * m1));
  CHECK(er_anchored_variance(5, 0.0, h, 10) == doctest::Approx((m2 - m1 * m1) / 10.0));

  const SlopeReport rep = variance_growth_study(4, 0.0, {0.0, 0.25, 0.5, 1.0, 1.5, 2.0}, 10, 2000, 4, 1.0);
  CHECK(rep.points.front().variance == 0.0);
  for (const auto& p : rep.points) {
    if (p.h > 0.0 && p.h <= 0.5) CHECK(std::abs(p.variance - p.exact) < 3.0 * p.variance_se);
  }
  CHECK(rep.slope == doctest::Approx(12.0).epsilon(0.25));
}

TEST_CASE("local variance slopes") {
  const SlopeReport toy = local_variance_study(toy_model(), 1.0, {0.0, 0.02, 0.05, 0.1, 0.2}, 10, 2000, 5);
  CHECK(toy.points.front().variance == 0.0);
  CHECK(toy.slope == doctest::Approx(2.0).epsilon(0.15));
  const SlopeReport er = local_variance_study(GrfModel::erdos_renyi(4), 0.0, {0.02, 0.05, 0.1, 0.2}, 10, 2000, 6);
  CHECK(er.slope == doctest::Approx(2.0).epsilon(0.15));
  for (const auto& p : er.points) CHECK(std::isfinite(p.exact));
}

TEST_CASE("FP and DP across grid spacings") {
  const Vector t = Vector::Constant(1, 1.01), tp = Vector::Constant(1, 2.06);
  const auto rows = fp_vs_dp_study([](double eps) { return toy_precomp_factory(eps, 10); }, t, tp, {0.4, 0.2, 0.1}, 2000, 7);
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double slack = 3.0 * std::hypot(rows[k].fp.variance_se, rows[k - 1].fp.variance_se);
    CHECK(rows[k].fp.variance <= rows[k - 1].fp.variance + slack);
  }
  CHECK(rows.back().fp.variance <= rows.back().dp.variance);
  CHECK(rows.back().dp.variance >= 0.5 * rows.front().dp.variance);

  // With a spacing of 5 both parameters snap to the same point and every estimator collapses to OP.
  const auto wide = fp_vs_dp_study([](double eps) { return toy_precomp_factory(eps, 10); }, t, tp, {5.0}, 200, 8);
  const MomentReport op = estimator_moments(toy_precomp_factory(5.0, 10), EstimatorKind::one_pivot, t, tp, 200, derive_seed(8, 0));
  CHECK(wide[0].fp.mean == doctest::Approx(wide[0].dp.mean));
  CHECK(wide[0].fp.mean == doctest::Approx(op.mean));
}

TEST_CASE("linear fit") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const auto [a, b] = linear_fit(x, y);
  CHECK(a == doctest::Approx(1.0));
  CHECK(b == doctest::Approx(2.0));
}
