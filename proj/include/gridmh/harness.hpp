#pragma once

#include "gridmh/chains.hpp"
#include "gridmh/config.hpp"
#include "gridmh/diagnostics.hpp"
#include "gridmh/estimators.hpp"
#include "gridmh/grid.hpp"
#include "gridmh/precompute.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gridmh {

/// Model, data and prior resolved from a config.
struct Problem {
  GrfModel model;
  SuffStats y_stats;
  Prior prior;
  int sweeps;
};

Problem make_problem(const ExperimentConfig& cfg);

/// Mode search, curvature estimate and ray extension (or a regular grid), as configured.
Grid grid_from_config(const ExperimentConfig& cfg, const Problem& problem, std::ostream* log = nullptr);

/// Proposal from [proposal]; a random walk without explicit scales uses
/// eps * sqrt(diag(V Lambda V')) of the grid.
Proposal proposal_from_config(const ExperimentConfig& cfg, const Grid* grid);

/// Writes <out>/grid.txt (pre-computation format with n = 0) and returns its path.
std::string cmd_grid(const ExperimentConfig& cfg, std::ostream& log);
/// Reads a grid file, runs the pre-computation, writes <out>/precomp.txt.
std::string cmd_precompute(const ExperimentConfig& cfg, const std::string& grid_path, std::ostream& log);
/// Runs cfg.chains chains of cfg.chain_kind; writes trace_<k>.csv and run_manifest.csv.
/// `precomp_path` is needed for precomp and abc chains and optional otherwise.
void cmd_run(const ExperimentConfig& cfg, const std::string& precomp_path, std::ostream& log);
/// Runs the study named in cfg.study and writes its CSV files under cfg.out.
void cmd_study(const ExperimentConfig& cfg, std::ostream& log);

// ---------------------------------------------------------------------------
// Studies on the toy model: y = 2, Gamma(1, 1) prior, regular grid {k eps : 1 <= k <= 10/eps}.

GrfModel toy_model();
Target toy_target(bool truncate_to_grid, double eps = 0.1);
Grid toy_grid(double eps);
PrecompFactory toy_precomp_factory(double eps, int n);

struct Table1Row {
  double theta = 0.0;
  double theta_prime = 0.0;
  MomentReport op;
  MomentReport dp;
  MomentReport fp;
};

std::vector<Table1Row> run_table1(long replicates, std::uint64_t seed, int threads = 0, double eps = 0.1, int n = 10);
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);
/// One row per estimator, one bias/variance column pair per parameter pair.
void write_table1_layout_csv(std::ostream& out, const std::vector<Table1Row>& rows);

/// TV curves of exchange, op, dp and fp ensembles against the Gamma(3/2, 3)
/// posterior. All pre-computing chains share one pre-computation drawn from `seed`.
std::map<std::string, TvCurve> run_tv_toy(int chains, long iters, std::uint64_t seed, int threads = 0,
                                          double eps = 0.1, int n = 10, double sigma = 0.5);

struct PosteriorSummary {
  std::string method;
  Vector mean;
  Vector variance;
  Vector mean_se;  // batch-means-free: sd / sqrt(ESS)
  Vector q05;
  Vector q95;
  Vector ess;
  double acceptance = 0.0;
  double seconds = 0.0;
};

PosteriorSummary summarize_trace(const std::string& method, const ChainTrace& trace, long burn_in, double seconds);

struct DeskResult {
  std::vector<PosteriorSummary> rows;
  double grid_seconds = 0.0;
  double precompute_seconds = 0.0;
  std::size_t grid_points = 0;
};

/// Synthetic 20x20 Ising (or whatever the config holds): exchange, fp, dp and abc.
DeskResult run_ising_desk(const ExperimentConfig& cfg, std::ostream* log = nullptr);
/// Karate ERGM: exchange reference and the pre-computing chains.
DeskResult run_karate(const ExperimentConfig& cfg, std::ostream* log = nullptr);
void write_desk_csv(std::ostream& out, const DeskResult& result);

}  // namespace gridmh
