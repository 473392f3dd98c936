#pragma once

#include "gridmh/core.hpp"
#include "gridmh/models.hpp"
#include "gridmh/prior.hpp"
#include "gridmh/proposal.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridmh {

/// Everything a CLI command needs. Loaded from an INI file where unknown sections
/// or keys are rejected.
struct ExperimentConfig {
  // [model]
  std::string model_kind = "toy_gaussian";
  std::vector<int> model_size;
  int sweeps = 0;  // 0: model default

  // [data] exactly one source
  std::optional<double> y;               // toy observation
  std::vector<double> stats;             // observed statistics given directly
  std::string edgelist;                  // graph file; "karate" selects the bundled data
  std::vector<double> synthetic_theta;   // simulate y at this parameter
  int synthetic_sweeps = 200;
  std::uint64_t synthetic_seed = 7;

  // [prior]
  std::string prior_kind = "gamma";
  double prior_shape = 1.0;
  double prior_rate = 1.0;
  std::vector<double> prior_lower;
  std::vector<double> prior_upper;
  double prior_mean = 0.0;
  double prior_sd = 1.0;

  // [proposal]
  std::string proposal_kind = "multiplicative";
  double proposal_sigma = 0.5;
  std::vector<double> proposal_scale;  // empty: derived from the grid

  // [grid]
  std::string grid_method = "adaptive";
  double eps = 0.1;
  double m = 0.0;  // <= 0: 0.05 |s(y)|
  int grid_draws = 100;
  int max_steps = 50;
  std::vector<double> mode_init;
  int mode_steps = 10000;
  int mode_draws = 50;
  double a0 = 1.0;
  double t0 = 10.0;
  int hessian_draws = 1000;
  double origin = 0.0;
  int first = 1;
  int last = 100;

  // [precompute]
  int n = 10;
  int precompute_sweeps = 0;  // 0: same as [model] sweeps

  // [chain]
  std::string chain_kind = "precomp";
  std::string estimator = "fp";
  long iters = 10000;
  int chains = 1;
  int n_aux = 1;
  double tolerance = 1.0;
  std::vector<double> init;
  bool average_paths = false;
  long burn_in = 0;

  // [run]
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "out";

  // [study]
  std::string study;
  long replicates = 10000;

  /// key = value lines of every recognised setting, for manifests.
  std::string echo() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

GrfModel make_model(const ExperimentConfig& cfg);
int aux_sweeps(const ExperimentConfig& cfg, const GrfModel& model);
int precompute_sweeps(const ExperimentConfig& cfg, const GrfModel& model);
/// s(y) from whichever [data] source is configured.
SuffStats observed_stats(const ExperimentConfig& cfg, const GrfModel& model);
Prior make_prior(const ExperimentConfig& cfg, int d);
/// A point inside the prior support used to start mode finding when none is given.
Vector default_mode_init(const ExperimentConfig& cfg, const Prior& prior);

}  // namespace gridmh
