#pragma once

#include "gridmh/core.hpp"
#include "gridmh/grid.hpp"
#include "gridmh/models.hpp"
#include "gridmh/prior.hpp"
#include "gridmh/rng.hpp"

#include <cstdint>
#include <functional>

namespace gridmh {

/// s(y) - mean of s(X_i) over N auxiliary draws at theta, plus grad log p(theta).
Vector estimate_gradient(const GrfModel& model, const SuffStats& y_stats, const Vector& theta, const Prior& prior,
                         int draws, int sweeps, Rng& rng);

struct HessianEstimate {
  Matrix covariance;     // sample covariance of s(X) at theta
  Matrix prior_hessian;  // second derivatives of log p at theta

  /// Hessian of the log posterior: -covariance + prior_hessian.
  Matrix hessian() const { return prior_hessian - covariance; }
  /// Its negation, the positive semi-definite matrix used to scale the grid.
  Matrix curvature() const { return covariance - prior_hessian; }
};

HessianEstimate estimate_hessian(const GrfModel& model, const Vector& theta, const Prior& prior, int draws,
                                 int sweeps, Rng& rng);

struct ModeOptions {
  int steps = 10000;
  int draws = 50;
  double a0 = 1.0;
  double t0 = 10.0;
  /// Scale each step by the inverse curvature estimated at the initial point.
  bool precondition = true;
  int curvature_draws = 200;
  /// Largest allowed step norm; 0 disables the cap.
  double max_step = 0.0;
  double divergence_bound = 1e6;
};

struct ModeResult {
  Vector last;
  /// Polyak average over the second half of the iterates.
  Vector averaged;
};

/// Robbins-Monro: theta_{t+1} = theta_t + a0/(t + t0) * K * G(theta_t), with K the
/// inverse initial curvature (or the identity). Steps that leave the prior support
/// are halved until they land inside. Throws DivergenceError past divergence_bound.
ModeResult find_mode(const GrfModel& model, const SuffStats& y_stats, const Prior& prior, const Vector& init,
                     const ModeOptions& options, int sweeps, Rng& rng);

struct Eigensystem {
  Matrix vectors;  // columns: orthonormal eigenvectors
  Vector values;   // positive eigenvalues of the inverse curvature
};

/// Eigen-decomposition of curvature^{-1}. Curvature eigenvalues below
/// floor_ratio * (largest) are raised to that floor. Each eigenvector is signed so
/// that its largest-magnitude entry is positive.
Eigensystem inverse_eigensystem(const Matrix& curvature, double floor_ratio = 1e-8);

struct GridOptions {
  double eps = 0.1;
  /// Gradient-plateau threshold; non-positive means 0.05 * |s(y)|_2.
  double m = 0.0;
  int draws = 100;
  int max_steps = 50;
  int sweeps = 5;
  std::uint64_t seed = 1;
  int threads = 0;
};

using GradientFn = std::function<Vector(const Vector& theta, Rng& rng)>;
using SupportFn = std::function<bool(const Vector& theta)>;

/// Grid construction by ray extension. For each axis in turn, every point already
/// in the grid sends a ray in the + and then the - direction. A ray keeps adding
/// points while consecutive gradient estimates differ by more than m, for at most
/// max_steps points, and stops early if the next point leaves the support.
Grid build_grid(const GradientFn& gradient, const SupportFn& in_support, const Vector& mode,
                const Eigensystem& eig, const GridOptions& options);

Grid build_grid(const GrfModel& model, const SuffStats& y_stats, const Prior& prior, const Vector& mode,
                const Matrix& curvature, const GridOptions& options);

double default_threshold(const SuffStats& y_stats);

}  // namespace gridmh
