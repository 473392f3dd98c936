#include "gridmh/grid_builder.hpp"

#include "gridmh/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace gridmh {

Vector estimate_gradient(const GrfModel& model, const SuffStats& y_stats, const Vector& theta, const Prior& prior,
                         int draws, int sweeps, Rng& rng) {
  require_dims(y_stats, model.dims(), "observed statistics");
  require_dims(theta, model.dims(), "gradient theta");
  if (draws < 1) throw ValidationError("gradient estimate needs at least one draw");
  Vector mean = Vector::Zero(model.dims());
  for (int i = 0; i < draws; ++i) mean += sample_stats(model, theta, sweeps, rng);
  mean /= draws;
  return y_stats - mean + prior.gradient(theta);
}

HessianEstimate estimate_hessian(const GrfModel& model, const Vector& theta, const Prior& prior, int draws,
                                 int sweeps, Rng& rng) {
  require_dims(theta, model.dims(), "hessian theta");
  if (draws < 2) throw ValidationError("hessian estimate needs at least two draws");
  const int d = model.dims();
  Matrix samples(draws, d);
  for (int i = 0; i < draws; ++i) samples.row(i) = sample_stats(model, theta, sweeps, rng).transpose();
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  Matrix cov = centered.transpose() * centered / static_cast<double>(draws - 1);
  cov = 0.5 * (cov + cov.transpose());
  return {cov, prior.hessian(theta)};
}

Eigensystem inverse_eigensystem(const Matrix& curvature, double floor_ratio) {
  if (curvature.rows() != curvature.cols() || curvature.rows() == 0) {
    throw DimensionMismatch("curvature must be a non-empty square matrix");
  }
  if (!curvature.allFinite()) throw NumericalError("curvature has non-finite entries");
  const Matrix sym = 0.5 * (curvature + curvature.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("curvature eigen-decomposition failed");
  Vector values = solver.eigenvalues();
  Matrix vectors = solver.eigenvectors();
  const double top = values.cwiseAbs().maxCoeff();
  const double floor = top > 0 ? floor_ratio * top : 1.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = 1.0 / std::max(values[i], floor);
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0) vectors.col(j) *= -1.0;
  }
  return {vectors, values};
}

ModeResult find_mode(const GrfModel& model, const SuffStats& y_stats, const Prior& prior, const Vector& init,
                     const ModeOptions& options, int sweeps, Rng& rng) {
  require_dims(init, model.dims(), "mode init");
  if (options.steps < 1) throw ValidationError("find_mode needs steps >= 1");
  if (!(options.a0 > 0) || !(options.t0 >= 0)) throw ValidationError("find_mode needs a0 > 0 and t0 >= 0");
  if (!prior.in_support(init)) throw ValidationError("find_mode init lies outside the prior support");

  const int d = model.dims();
  Matrix gain = Matrix::Identity(d, d);
  if (options.precondition) {
    const auto h = estimate_hessian(model, init, prior, std::max(2, options.curvature_draws), sweeps, rng);
    const auto eig = inverse_eigensystem(h.curvature());
    gain = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  }

  Vector theta = init;
  Vector tail_sum = Vector::Zero(d);
  const int tail_start = options.steps / 2;
  for (int t = 0; t < options.steps; ++t) {
    const double a = options.a0 / (t + options.t0 + 1.0);
    Vector delta = a * gain * estimate_gradient(model, y_stats, theta, prior, options.draws, sweeps, rng);
    if (options.max_step > 0) {
      const double norm = delta.norm();
      if (norm > options.max_step) delta *= options.max_step / norm;
    }
    for (int halving = 0; halving < 60 && !prior.in_support(theta + delta); ++halving) delta *= 0.5;
    if (prior.in_support(theta + delta)) theta += delta;
    if (!theta.allFinite() || theta.norm() > options.divergence_bound) {
      throw DivergenceError("Robbins-Monro iterate left the bound at step " + std::to_string(t));
    }
    if (t >= tail_start) tail_sum += theta;
  }
  return {theta, tail_sum / static_cast<double>(options.steps - tail_start)};
}

double default_threshold(const SuffStats& y_stats) { return 0.05 * y_stats.norm(); }

Grid build_grid(const GradientFn& gradient, const SupportFn& in_support, const Vector& mode,
                const Eigensystem& eig, const GridOptions& options) {
  if (!(options.eps > 0)) throw ValidationError("grid eps must be positive");
  if (!(options.m > 0)) throw ValidationError("grid threshold m must be positive");
  if (options.max_steps < 0) throw ValidationError("grid max_steps must be >= 0");
  Grid grid(mode, eig.vectors, eig.values, options.eps);
  const int d = grid.dims();
  grid.add(Coords(static_cast<std::size_t>(d), 0));
  if (options.max_steps == 0) return grid;

  for (int axis = 0; axis < d; ++axis) {
    const std::vector<GridPoint> snapshot = grid.points();
    std::vector<std::vector<Coords>> rays(snapshot.size() * 2);
    parallel_for(rays.size(), options.threads, [&](std::size_t r) {
      const std::size_t origin = r / 2;
      const int sign = (r % 2 == 0) ? 1 : -1;
      Rng rng = make_stream(options.seed, (static_cast<std::uint64_t>(axis) << 40) | r);
      Coords coords = snapshot[origin].coords;
      Vector current = snapshot[origin].theta;
      Vector g_current = gradient(current, rng);
      for (int step = 0; step < options.max_steps; ++step) {
        const Vector next = current + grid.step(axis, sign);
        if (!in_support(next)) break;
        const Vector g_next = gradient(next, rng);
        if (!((g_next - g_current).norm() > options.m)) break;
        coords[axis] += sign;
        rays[r].push_back(coords);
        current = next;
        g_current = g_next;
      }
    });
    for (const auto& ray : rays) {
      for (const auto& c : ray) grid.add(c);
    }
  }
  return grid;
}

Grid build_grid(const GrfModel& model, const SuffStats& y_stats, const Prior& prior, const Vector& mode,
                const Matrix& curvature, const GridOptions& options) {
  require_dims(mode, model.dims(), "grid mode");
  GridOptions opts = options;
  if (!(opts.m > 0)) opts.m = default_threshold(y_stats);
  if (opts.draws < 1) throw ValidationError("grid gradient draws must be >= 1");
  const GradientFn gradient = [&](const Vector& theta, Rng& rng) {
    return estimate_gradient(model, y_stats, theta, prior, opts.draws, opts.sweeps, rng);
  };
  const SupportFn support = [&](const Vector& theta) { return prior.in_support(theta); };
  return build_grid(gradient, support, mode, inverse_eigensystem(curvature), opts);
}

}  // namespace gridmh
