#include "gridmh/config.hpp"
#include "gridmh/harness.hpp"
#include "gridmh/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "master seed");
  cmd->add_option("--out", common.out, "output directory");
  cmd->add_option("--threads", common.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

gridmh::ExperimentConfig resolve(const Common& common) {
  auto cfg = gridmh::load_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.out = common.out;
  if (common.threads) cfg.threads = *common.threads;
  gridmh::set_default_threads(cfg.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pre-computed grid Metropolis samplers for Gibbs random fields"};
  app.require_subcommand(1);

  Common grid_opts;
  auto* grid = app.add_subcommand("grid", "find the mode, estimate curvature and build the grid");
  add_common(grid, grid_opts);

  Common pre_opts;
  std::string grid_file;
  auto* pre = app.add_subcommand("precompute", "simulate statistics at every grid point");
  add_common(pre, pre_opts);
  pre->add_option("--grid", grid_file, "grid file written by 'grid'")->required()->check(CLI::ExistingFile);

  Common run_opts;
  std::string precomp_file;
  std::string chain;
  std::string estimator;
  std::optional<long> iters;
  std::optional<int> chains;
  auto* run = app.add_subcommand("run", "run one or more chains");
  add_common(run, run_opts);
  run->add_option("--precomp", precomp_file, "pre-computation file")->check(CLI::ExistingFile);
  run->add_option("--chain", chain, "chain kind")->check(CLI::IsMember({"mh", "exchange", "noisy", "precomp", "abc"}));
  run->add_option("--estimator", estimator, "ratio estimator")->check(CLI::IsMember({"op", "dp", "fp"}));
  run->add_option("--iters", iters, "iterations per chain")->check(CLI::NonNegativeNumber);
  run->add_option("--chains", chains, "number of chains")->check(CLI::PositiveNumber);

  Common study_opts;
  std::string study_name;
  auto* study = app.add_subcommand("study", "run a named study and write its CSV reports");
  add_common(study, study_opts);
  study->add_option("--name", study_name, "study name")
      ->check(CLI::IsMember({"table1", "example1", "prop1", "prop2", "tv_toy", "ising_desk", "karate"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (grid->parsed()) {
      const auto path = gridmh::cmd_grid(resolve(grid_opts), std::cout);
      std::cout << "wrote " << path << '\n';
    } else if (pre->parsed()) {
      const auto path = gridmh::cmd_precompute(resolve(pre_opts), grid_file, std::cout);
      std::cout << "wrote " << path << '\n';
    } else if (run->parsed()) {
      auto cfg = resolve(run_opts);
      if (!chain.empty()) cfg.chain_kind = chain;
      if (!estimator.empty()) cfg.estimator = estimator;
      if (iters) cfg.iters = *iters;
      if (chains) cfg.chains = *chains;
      gridmh::cmd_run(cfg, precomp_file, std::cout);
    } else if (study->parsed()) {
      auto cfg = resolve(study_opts);
      if (!study_name.empty()) cfg.study = study_name;
      gridmh::cmd_study(cfg, std::cout);
    }
  } catch (const gridmh::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
