#include "gridmh/estimators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace gridmh;

namespace {

std::shared_ptr<const PrecompData> toy_precomp(int n, std::uint64_t seed, double eps = 0.1, int last = 100) {
  return std::make_shared<const PrecompData>(
      run_precompute(GrfModel::toy_gaussian(), make_regular_grid(0.0, eps, 1, last), n, 1, seed, 1));
}

Vector v1(double x) { return Vector::Constant(1, x); }

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Grid rect_grid(int w, int h) {
  Grid g(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Ones(2), 1.0);
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < h; ++j) g.add({i, j});
  return g;
}

bool adjacent(const Grid& g, std::size_t a, std::size_t b) {
  int diff = 0;
  for (int i = 0; i < g.dims(); ++i) diff += std::abs(g.point(a).coords[i] - g.point(b).coords[i]);
  return diff == 1;
}

}  // namespace

TEST_CASE("anchored ratio") {
  const auto p = toy_precomp(10, 1);
  const std::size_t m = p->nearest(v1(1.0));
  CHECK(anchored_ratio(*p, p->grid().point(m).theta, m) == 1.0);

  // n = 1: exp((theta - anchor) s) exactly.
  const auto single = toy_precomp(1, 2);
  const double s = single->stats(m)(0, 0);
  CHECK(anchored_ratio(*single, v1(1.2), m) == doctest::Approx(std::exp(0.2 * s)).epsilon(1e-14));

  // Large n against the closed form Z(1.2)/Z(1) = sqrt(1/1.2).
  const auto big = std::make_shared<const PrecompData>(
      run_precompute(GrfModel::toy_gaussian(), make_regular_grid(1.0, 0.1, 0, 0), 1000000, 1, 3, 1));
  // Var of exp(-0.1 X^2), X ~ N(0, 1): 1/sqrt(1.2) - 1/1.2.
  const double se = std::sqrt((1.0 / std::sqrt(1.2) - 1.0 / 1.2) / 1e6);
  CHECK(std::abs(anchored_ratio(*big, v1(1.2), 0) - oracle::toy_ratio(1.2, 1.0)) < 3.0 * se);
}

TEST_CASE("log-space evaluation survives large exponents") {
  Matrix stats(3, 1);
  stats << 700.0, 690.0, -700.0;
  const PrecompData p(GrfModel::erdos_renyi(4), make_regular_grid(0.0, 1.0, 0, 0), 3, {stats}, 1, 1);
  const double big = log_anchored_ratio(p, v1(1.0), 0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(700.0 + std::log1p(std::exp(-10.0)) - std::log(3.0)));
  CHECK(std::isfinite(log_anchored_ratio(p, v1(-1.0), 0)));
  CHECK_THROWS_AS(anchored_ratio(p, v1(2.0), 0), NumericalError);
}

TEST_CASE("staircase paths") {
  const Grid g = rect_grid(4, 3);
  const std::size_t a = *g.find({0, 0});
  const std::size_t b = *g.find({3, 2});
  CHECK(build_path(g, a, a).indices.size() == 1);
  const GridPath path = build_path(g, a, b);
  REQUIRE(path.indices.size() == 6);
  CHECK(g.point(path.indices[3]).coords == Coords{3, 0});
  const GridPath other = build_path(g, a, b, {1, 0});
  CHECK(g.point(other.indices[2]).coords == Coords{0, 2});
  for (const auto* p : {&path, &other}) {
    std::set<std::size_t> seen(p->indices.begin(), p->indices.end());
    CHECK(seen.size() == p->indices.size());
    for (std::size_t k = 1; k < p->indices.size(); ++k) CHECK(adjacent(g, p->indices[k - 1], p->indices[k]));
    CHECK(p->indices.front() == a);
    CHECK(p->indices.back() == b);
  }
}

TEST_CASE("paths around a hole and across a gap") {
  // L-shaped grid: the ascending staircase corner (2, 0) is missing.
  Grid g(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Ones(2), 1.0);
  for (Coords c : {Coords{0, 0}, Coords{1, 0}, Coords{0, 1}, Coords{1, 1}, Coords{2, 1}}) g.add(c);
  const GridPath p = build_path(g, *g.find({0, 0}), *g.find({2, 1}));
  CHECK(p.indices.size() == 4);
  for (std::size_t k = 1; k < p.indices.size(); ++k) CHECK(adjacent(g, p.indices[k - 1], p.indices[k]));

  g.add({5, 5});
  CHECK_THROWS_AS(build_path(g, *g.find({0, 0}), *g.find({5, 5})), DisconnectedGrid);
}

TEST_CASE("estimator identities") {
  const RatioEstimator est(toy_precomp(10, 4));
  for (auto kind : {EstimatorKind::one_pivot, EstimatorKind::direct_path, EstimatorKind::full_path}) {
    const RatioEstimate same = est.estimate(kind, v1(0.73), v1(0.73));
    CHECK(same.log_value == 0.0);
    CHECK(same.value == 1.0);
  }
  // The single pivot is shared by both directions, so OP is exactly reciprocal.
  CHECK(est.one_pivot(v1(0.42), v1(1.37)).log_value + est.one_pivot(v1(1.37), v1(0.42)).log_value ==
        doctest::Approx(0.0).epsilon(1e-12));
  // Same nearest point: DP and FP reduce to OP with that pivot.
  const Vector a = v1(0.51), b = v1(0.54);
  CHECK(est.direct_path(a, b).log_value == doctest::Approx(est.one_pivot(a, b).log_value));
  CHECK(est.full_path(a, b).log_value == doctest::Approx(est.one_pivot(a, b).log_value));
  CHECK(est.full_path(a, b).path_len == 1);

  // FP is the anchored ends plus the sum of links along the staircase.
  const Vector t = v1(0.33), tp = v1(0.71);
  const std::size_t i = est.precomp().nearest(t), j = est.precomp().nearest(tp);
  const double expect = log_anchored_ratio(est.precomp(), t, i) + est.log_path(build_path(est.precomp().grid(), i, j)) -
                        log_anchored_ratio(est.precomp(), tp, j);
  CHECK(est.full_path(t, tp).log_value == doctest::Approx(expect));
  CHECK(est.full_path(t, tp).path_len == 5);
  // Links use the draws at the second argument.
  CHECK(est.log_link(i, i + 1) == doctest::Approx(est.log_direct(i, i + 1)));
}

TEST_CASE("averaging over the two axis orders") {
  Grid g(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Constant(2, 1.0), 0.2);
  for (int i = -1; i <= 3; ++i)
    for (int j = -1; j <= 3; ++j) g.add({i, j});
  const auto p = std::make_shared<const PrecompData>(run_precompute(GrfModel::autologistic(2, 2), g, 20, 3, 8, 1));
  const RatioEstimator est(p);
  const Vector t = v2(0.0, 0.0), tp = v2(0.41, 0.58);
  const std::size_t a = p->nearest(t), b = p->nearest(tp);
  const double l1 = est.log_path(build_path(g, a, b, {0, 1}));
  const double l2 = est.log_path(build_path(g, a, b, {1, 0}));
  const double avg = std::log(0.5 * (std::exp(l1) + std::exp(l2)));
  CHECK(est.log_middle(EstimatorKind::full_path, a, b, true) == doctest::Approx(avg));
  CHECK(est.log_middle(EstimatorKind::full_path, a, b, false) == doctest::Approx(l1));
}

TEST_CASE("estimator consistency as n grows") {
  const Vector t = v1(1.01), tp = v1(2.06);
  const double truth = std::log(oracle::toy_ratio(1.01, 2.06));
  for (auto kind : {EstimatorKind::one_pivot, EstimatorKind::direct_path, EstimatorKind::full_path}) {
    double err_small = 0.0, err_big = 0.0;
    for (int r = 0; r < 5; ++r) {
      err_small += std::abs(RatioEstimator(toy_precomp(100, 100 + r)).estimate(kind, t, tp).log_value - truth);
      err_big += std::abs(RatioEstimator(toy_precomp(10000, 200 + r, 0.1, 30)).estimate(kind, t, tp).log_value - truth);
    }
    CHECK(err_big < err_small);
    CHECK(err_big / 5.0 < 0.05);
  }
}

TEST_CASE("estimator kind names") {
  CHECK(parse_estimator_kind("fp") == EstimatorKind::full_path);
  CHECK(parse_estimator_kind("direct_path") == EstimatorKind::direct_path);
  CHECK(to_string(EstimatorKind::one_pivot) == "op");
  CHECK_THROWS_AS(parse_estimator_kind("xp"), ValidationError);
}
