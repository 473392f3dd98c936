#include "gridmh/harness.hpp"

#include "gridmh/grid_builder.hpp"
#include "gridmh/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace gridmh {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path out_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + cfg.out + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out.precision(10);
  return out;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ostringstream out;
  out << std::hex << crc64(bytes);
  return out.str();
}

Vector vector_from(const std::vector<double>& v, int d, const char* what) {
  if (static_cast<int>(v.size()) != d) throw ValidationError(std::string(what) + " needs " + std::to_string(d) + " values");
  return Eigen::Map<const Vector>(v.data(), d);
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

Problem make_problem(const ExperimentConfig& cfg) {
  const GrfModel model = make_model(cfg);
  return {model, observed_stats(cfg, model), make_prior(cfg, model.dims()), aux_sweeps(cfg, model)};
}

Grid grid_from_config(const ExperimentConfig& cfg, const Problem& problem, std::ostream* log) {
  if (cfg.grid_method == "regular") {
    if (problem.model.dims() != 1) throw ValidationError("[grid] method = regular needs a one-parameter model");
    return make_regular_grid(cfg.origin, cfg.eps, cfg.first, cfg.last);
  }
  Rng rng = make_stream(cfg.seed, 1);
  const Vector init = default_mode_init(cfg, problem.prior);
  ModeOptions mode_opts;
  mode_opts.steps = cfg.mode_steps;
  mode_opts.draws = cfg.mode_draws;
  mode_opts.a0 = cfg.a0;
  mode_opts.t0 = cfg.t0;
  mode_opts.curvature_draws = std::min(cfg.hessian_draws, 500);
  const ModeResult mode = find_mode(problem.model, problem.y_stats, problem.prior, init, mode_opts, problem.sweeps, rng);
  if (log) *log << "mode estimate: " << mode.averaged.transpose() << '\n';
  const HessianEstimate hess =
      estimate_hessian(problem.model, mode.averaged, problem.prior, cfg.hessian_draws, problem.sweeps, rng);
  GridOptions grid_opts;
  grid_opts.eps = cfg.eps;
  grid_opts.m = cfg.m;
  grid_opts.draws = cfg.grid_draws;
  grid_opts.max_steps = cfg.max_steps;
  grid_opts.sweeps = problem.sweeps;
  grid_opts.seed = derive_seed(cfg.seed, 2);
  grid_opts.threads = cfg.threads;
  return build_grid(problem.model, problem.y_stats, problem.prior, mode.averaged, hess.curvature(), grid_opts);
}

Proposal proposal_from_config(const ExperimentConfig& cfg, const Grid* grid) {
  if (cfg.proposal_kind == "multiplicative") return Proposal::multiplicative(cfg.proposal_sigma);
  if (!cfg.proposal_scale.empty()) {
    const int d = grid ? grid->dims() : static_cast<int>(cfg.proposal_scale.size());
    if (cfg.proposal_scale.size() == 1) return Proposal::random_walk(Vector::Constant(d, cfg.proposal_scale[0]));
    return Proposal::random_walk(vector_from(cfg.proposal_scale, d, "[proposal] scale"));
  }
  if (!grid) throw ValidationError("[proposal] scale is required when no grid is available");
  const Matrix cov = grid->eigvecs() * grid->eigvals().asDiagonal() * grid->eigvecs().transpose();
  return Proposal::random_walk(grid->eps() * cov.diagonal().cwiseSqrt());
}

std::string cmd_grid(const ExperimentConfig& cfg, std::ostream& log) {
  const Problem problem = make_problem(cfg);
  const auto start = Clock::now();
  Grid grid = grid_from_config(cfg, problem, &log);
  const std::size_t count = grid.size();
  std::vector<Matrix> blocks(count, Matrix(0, grid.dims()));
  const PrecompData data(problem.model, std::move(grid), 0, std::move(blocks), cfg.seed, problem.sweeps);
  const fs::path path = out_dir(cfg) / "grid.txt";
  save_precomp(data, path.string());
  log << "grid: M = " << count << ", eps = " << data.grid().eps() << ", mode = " << data.grid().mode().transpose()
      << ", seconds = " << seconds_since(start) << '\n';
  return path.string();
}

std::string cmd_precompute(const ExperimentConfig& cfg, const std::string& grid_path, std::ostream& log) {
  const GrfModel model = make_model(cfg);
  const PrecompData grid_file = load_precomp(grid_path);
  if (!(grid_file.model() == model)) {
    throw ValidationError("grid file was built for " + grid_file.model().describe() + ", config has " + model.describe());
  }
  const auto start = Clock::now();
  const PrecompData data = run_precompute(model, grid_file.grid(), cfg.n, precompute_sweeps(cfg, model),
                                          derive_seed(cfg.seed, 3), cfg.threads);
  const double secs = seconds_since(start);
  const fs::path path = out_dir(cfg) / "precomp.txt";
  save_precomp(data, path.string());
  log << "precompute: M = " << data.size() << ", n = " << data.n() << ", statistic rows = " << data.size() * data.n()
      << ", seconds = " << secs << '\n';
  return path.string();
}

void cmd_run(const ExperimentConfig& cfg, const std::string& precomp_path, std::ostream& log) {
  const Problem problem = make_problem(cfg);
  std::shared_ptr<const PrecompData> precomp;
  if (!precomp_path.empty()) {
    precomp = std::make_shared<const PrecompData>(load_precomp(precomp_path));
    if (!(precomp->model() == problem.model)) {
      throw ValidationError("pre-computed data was built for " + precomp->model().describe() + ", config has " +
                            problem.model.describe());
    }
  }
  const bool needs_precomp = cfg.chain_kind == "precomp" || cfg.chain_kind == "abc";
  if (needs_precomp && !precomp) throw ValidationError("chain kind '" + cfg.chain_kind + "' needs --precomp");
  if (cfg.chain_kind == "mh" && !exact_log_z(problem.model, Vector::Zero(problem.model.dims()).array() + 1.0)) {
    throw IntractableModel(problem.model.describe() + " has no exact normalizing constant; mh is unavailable");
  }

  std::optional<SupportBox> box;
  if (precomp) box = precomp->support();
  const Target target(problem.model, problem.y_stats, problem.prior, box);
  const Proposal proposal = proposal_from_config(cfg, precomp ? &precomp->grid() : nullptr);
  std::unique_ptr<RatioEstimator> estimator;
  if (cfg.chain_kind == "precomp") estimator = std::make_unique<RatioEstimator>(precomp);
  const EstimatorKind kind = parse_estimator_kind(cfg.estimator);

  const fs::path dir = out_dir(cfg);
  std::vector<double> acceptance(static_cast<std::size_t>(cfg.chains));
  std::vector<double> seconds(static_cast<std::size_t>(cfg.chains));
  parallel_for(static_cast<std::size_t>(cfg.chains), cfg.threads, [&](std::size_t k) {
    Rng rng = make_stream(cfg.seed, 100 + k);
    const Vector init = cfg.init.empty() ? initial_state(target, rng) : vector_from(cfg.init, problem.model.dims(), "[chain] init");
    const auto start = Clock::now();
    ChainTrace trace;
    if (cfg.chain_kind == "mh") {
      trace = mh_exact(target, proposal, init, cfg.iters, rng);
    } else if (cfg.chain_kind == "exchange") {
      trace = exchange(target, proposal, init, cfg.iters, problem.sweeps, rng);
    } else if (cfg.chain_kind == "noisy") {
      trace = noisy_mh(target, proposal, init, cfg.iters, cfg.n_aux, problem.sweeps, rng);
    } else if (cfg.chain_kind == "precomp") {
      trace = precomp_metropolis(target, proposal, *estimator, kind, init, cfg.iters, rng, cfg.average_paths);
    } else {
      trace = abc_mcmc_precomp(target, proposal, *precomp, cfg.tolerance, init, cfg.iters, rng);
    }
    seconds[k] = seconds_since(start);
    acceptance[k] = trace.acceptance_rate();
    auto out = open_out(dir / ("trace_" + std::to_string(k) + ".csv"));
    write_trace_csv(out, trace);
  });

  auto manifest = open_out(dir / "run_manifest.csv");
  manifest << "key,value\n";
  manifest << "seed," << cfg.seed << "\nchain," << cfg.chain_kind << "\nestimator," << cfg.estimator
           << "\niters," << cfg.iters << "\nchains," << cfg.chains << "\nproposal," << proposal.describe() << '\n';
  if (precomp) manifest << "precomp_file," << precomp_path << "\nprecomp_crc64," << file_checksum(precomp_path) << '\n';
  std::istringstream echo(cfg.echo());
  std::string line;
  while (std::getline(echo, line)) {
    const auto eq = line.find('=');
    manifest << "config." << line.substr(0, eq) << ",\"" << line.substr(eq + 1) << "\"\n";
  }
  for (int k = 0; k < cfg.chains; ++k) {
    manifest << "acceptance_" << k << ',' << acceptance[static_cast<std::size_t>(k)] << '\n';
    manifest << "seconds_" << k << ',' << seconds[static_cast<std::size_t>(k)] << '\n';
    log << "chain " << k << ": acceptance " << acceptance[static_cast<std::size_t>(k)] << ", seconds "
        << seconds[static_cast<std::size_t>(k)] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Toy studies

GrfModel toy_model() { return GrfModel::toy_gaussian(); }

Grid toy_grid(double eps) { return make_regular_grid(0.0, eps, 1, static_cast<int>(std::lround(10.0 / eps))); }

Target toy_target(bool truncate_to_grid, double eps) {
  const GrfModel model = toy_model();
  std::optional<SupportBox> box;
  if (truncate_to_grid) box = toy_grid(eps).support();
  return Target(model, suff_stats(model, ModelState{2.0}), Prior::gamma(1, 1.0, 1.0), box);
}

PrecompFactory toy_precomp_factory(double eps, int n) {
  const GrfModel model = toy_model();
  const Grid grid = toy_grid(eps);
  return [model, grid, n](std::uint64_t seed) { return run_precompute(model, grid, n, 1, seed, 1); };
}

std::vector<Table1Row> run_table1(long replicates, std::uint64_t seed, int threads, double eps, int n) {
  const std::vector<std::pair<double, double>> pairs{{1.01, 2.06}, {3.02, 0.55}, {0.12, 0.94}};
  std::vector<MomentQuery> queries;
  for (const auto& [a, b] : pairs) {
    for (auto kind : {EstimatorKind::one_pivot, EstimatorKind::direct_path, EstimatorKind::full_path}) {
      queries.push_back({kind, Vector::Constant(1, a), Vector::Constant(1, b)});
    }
  }
  const auto reports = estimator_moments_batch(toy_precomp_factory(eps, n), queries, replicates, seed, threads);
  std::vector<Table1Row> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    rows.push_back({pairs[i].first, pairs[i].second, reports[3 * i], reports[3 * i + 1], reports[3 * i + 2]});
  }
  return rows;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "theta,theta_prime,estimator,truth,mean,bias,bias_se,variance,variance_se,replicates\n";
  for (const auto& row : rows) {
    for (const MomentReport* r : {&row.fp, &row.dp, &row.op}) {
      out << row.theta << ',' << row.theta_prime << ',' << to_string(r->kind) << ',' << r->truth << ',' << r->mean << ','
          << r->bias << ',' << r->bias_se << ',' << r->variance << ',' << r->variance_se << ',' << r->replicates << '\n';
    }
  }
}

void write_table1_layout_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "estimator";
  for (const auto& row : rows) {
    out << ",bias(" << row.theta << ";" << row.theta_prime << "),variance(" << row.theta << ";" << row.theta_prime << ")";
  }
  out << '\n';
  for (auto pick : {&Table1Row::fp, &Table1Row::dp, &Table1Row::op}) {
    out << to_string((rows.front().*pick).kind);
    for (const auto& row : rows) out << ',' << std::abs((row.*pick).bias) << ',' << (row.*pick).variance;
    out << '\n';
  }
}

std::map<std::string, TvCurve> run_tv_toy(int chains, long iters, std::uint64_t seed, int threads, double eps, int n,
                                          double sigma) {
  if (chains < 1) throw ValidationError("TV study needs at least one chain");
  const Target exact_target = toy_target(false);
  const Target truncated = toy_target(true, eps);
  const Proposal proposal = Proposal::multiplicative(sigma);
  const PrecompFactory factory = toy_precomp_factory(eps, n);
  const std::vector<std::pair<std::string, int>> algs{{"exchange", -1}, {"op", 0}, {"dp", 1}, {"fp", 2}};
  const EstimatorKind kinds[] = {EstimatorKind::one_pivot, EstimatorKind::direct_path, EstimatorKind::full_path};

  // The chains are copies of one Markov chain, so they share a single pre-computation.
  const RatioEstimator estimator(std::make_shared<const PrecompData>(factory(derive_seed(seed, 3))));
  std::map<std::string, std::vector<ChainTrace>> ensembles;
  for (const auto& alg : algs) ensembles[alg.first].resize(static_cast<std::size_t>(chains));
  parallel_for(static_cast<std::size_t>(chains), threads, [&](std::size_t c) {
    Rng init_rng = make_stream(derive_seed(seed, 1), c);
    const Vector init = initial_state(truncated, init_rng);
    Rng ex_rng = make_stream(derive_seed(seed, 2), c);
    ensembles.at("exchange")[c] = exchange(exact_target, proposal, init, iters, 1, ex_rng);
    for (int k = 0; k < 3; ++k) {
      Rng rng = make_stream(derive_seed(seed, 4 + static_cast<std::uint64_t>(k)), c);
      ensembles.at(algs[static_cast<std::size_t>(k) + 1].first)[c] =
          precomp_metropolis(truncated, proposal, estimator, kinds[k], init, iters, rng);
    }
  });

  const TvReference reference = reference_from_gamma(1.5, 3.0, 50);
  std::map<std::string, TvCurve> curves;
  for (const auto& alg : algs) curves[alg.first] = tv_occupation(ensembles.at(alg.first), reference);
  return curves;
}

// ---------------------------------------------------------------------------
// Desk-scale lattice and network studies

PosteriorSummary summarize_trace(const std::string& method, const ChainTrace& trace, long burn_in, double seconds) {
  const int d = static_cast<int>(trace.states.front().size());
  PosteriorSummary s;
  s.method = method;
  s.mean.resize(d);
  s.variance.resize(d);
  s.mean_se.resize(d);
  s.q05.resize(d);
  s.q95.resize(d);
  s.ess.resize(d);
  for (int i = 0; i < d; ++i) {
    const std::vector<double> values = trace.coordinate(i, static_cast<std::size_t>(burn_in) + 1);
    const auto sum = summarize(values);
    s.mean[i] = sum.mean;
    s.variance[i] = sum.variance;
    s.ess[i] = ess(values);
    s.mean_se[i] = std::sqrt(sum.variance / s.ess[i]);
    s.q05[i] = quantile(values, 0.05);
    s.q95[i] = quantile(values, 0.95);
  }
  s.acceptance = trace.acceptance_rate();
  s.seconds = seconds;
  return s;
}

namespace {

DeskResult run_desk(const ExperimentConfig& cfg, bool with_abc, std::ostream* log) {
  const Problem problem = make_problem(cfg);
  DeskResult result;
  auto start = Clock::now();
  const Grid grid = grid_from_config(cfg, problem, log);
  result.grid_seconds = seconds_since(start);
  result.grid_points = grid.size();
  if (log) *log << "grid points: " << grid.size() << " (" << result.grid_seconds << " s)\n";

  start = Clock::now();
  auto precomp = std::make_shared<const PrecompData>(run_precompute(
      problem.model, grid, cfg.n, precompute_sweeps(cfg, problem.model), derive_seed(cfg.seed, 3), cfg.threads));
  const RatioEstimator estimator(precomp);
  result.precompute_seconds = seconds_since(start);
  if (log) *log << "pre-computation: " << result.precompute_seconds << " s\n";

  const Target reference_target(problem.model, problem.y_stats, problem.prior);
  const Target truncated(problem.model, problem.y_stats, problem.prior, precomp->support());
  const Proposal proposal = proposal_from_config(cfg, &grid);
  const Vector init = cfg.init.empty() ? grid.mode() : vector_from(cfg.init, problem.model.dims(), "[chain] init");

  struct Job {
    std::string name;
    std::function<ChainTrace(Rng&)> run;
  };
  std::vector<Job> jobs{
      {"exchange", [&](Rng& rng) { return exchange(reference_target, proposal, init, cfg.iters, problem.sweeps, rng); }},
      {"fp",
       [&](Rng& rng) {
         return precomp_metropolis(truncated, proposal, estimator, EstimatorKind::full_path, init, cfg.iters, rng,
                                   cfg.average_paths);
       }},
      {"dp",
       [&](Rng& rng) {
         return precomp_metropolis(truncated, proposal, estimator, EstimatorKind::direct_path, init, cfg.iters, rng);
       }},
  };
  if (with_abc) {
    jobs.push_back(
        {"abc", [&](Rng& rng) { return abc_mcmc_precomp(truncated, proposal, *precomp, cfg.tolerance, init, cfg.iters, rng); }});
  }
  // Sequential on purpose: the per-method wall times feed the ESS-per-second comparison.
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    Rng rng = make_stream(derive_seed(cfg.seed, 10), j);
    const auto t0 = Clock::now();
    const ChainTrace trace = jobs[j].run(rng);
    const double secs = seconds_since(t0);
    result.rows.push_back(summarize_trace(jobs[j].name, trace, cfg.burn_in, secs));
    if (log) {
      *log << jobs[j].name << ": mean " << result.rows.back().mean.transpose() << ", acceptance "
           << result.rows.back().acceptance << ", " << secs << " s\n";
    }
  }
  return result;
}

}  // namespace

DeskResult run_ising_desk(const ExperimentConfig& cfg, std::ostream* log) {
  return run_desk(cfg, make_model(cfg).dims() == 1, log);
}

DeskResult run_karate(const ExperimentConfig& cfg, std::ostream* log) { return run_desk(cfg, false, log); }

void write_desk_csv(std::ostream& out, const DeskResult& result) {
  const int d = static_cast<int>(result.rows.front().mean.size());
  out << "method";
  for (int i = 1; i <= d; ++i) {
    out << ",mean_" << i << ",var_" << i << ",se_" << i << ",q05_" << i << ",q95_" << i << ",ess_" << i;
  }
  out << ",acceptance,chain_seconds,ess_per_second,grid_points,grid_seconds,precompute_seconds\n";
  for (const auto& r : result.rows) {
    out << r.method;
    for (int i = 0; i < d; ++i) {
      out << ',' << r.mean[i] << ',' << r.variance[i] << ',' << r.mean_se[i] << ',' << r.q05[i] << ',' << r.q95[i] << ','
          << r.ess[i];
    }
    out << ',' << r.acceptance << ',' << r.seconds << ',' << r.ess.minCoeff() / std::max(r.seconds, 1e-9) << ','
        << result.grid_points << ',' << result.grid_seconds << ',' << result.precompute_seconds << '\n';
  }
}

void cmd_study(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.study.empty()) throw ValidationError("[study] name is required for the study command");
  const fs::path dir = out_dir(cfg);
  const auto start = Clock::now();
  if (cfg.study == "table1") {
    const auto rows = run_table1(cfg.replicates, cfg.seed, cfg.threads, cfg.eps, cfg.n);
    auto out = open_out(dir / "table1.csv");
    write_table1_csv(out, rows);
    auto layout = open_out(dir / "table1_layout.csv");
    write_table1_layout_csv(layout, rows);
  } else if (cfg.study == "example1" || cfg.study == "prop1") {
    SlopeReport report;
    double target_slope = 2.0;
    if (cfg.study == "example1") {
      const int p = cfg.model_kind == "erdos_renyi" && !cfg.model_size.empty() ? cfg.model_size[0] : 5;
      std::vector<double> hs;
      for (int k = 0; k <= 12; ++k) hs.push_back(0.25 * k);
      report = variance_growth_study(p, 0.0, hs, cfg.n, cfg.replicates, cfg.seed, 1.0, cfg.threads);
      target_slope = p * (p - 1);
    } else {
      std::vector<double> hs;
      for (int k = 1; k <= 10; ++k) hs.push_back(0.02 * k);
      report = local_variance_study(toy_model(), 1.0, hs, cfg.n, cfg.replicates, cfg.seed, 1, cfg.threads);
    }
    auto out = open_out(dir / (cfg.study + ".csv"));
    out << "h,variance,variance_se,exact_variance\n";
    for (const auto& p : report.points) out << p.h << ',' << p.variance << ',' << p.variance_se << ',' << p.exact << '\n';
    auto fit = open_out(dir / (cfg.study + "_fit.csv"));
    fit << "slope,intercept,reference_slope\n" << report.slope << ',' << report.intercept << ',' << target_slope << '\n';
    log << cfg.study << ": fitted slope " << report.slope << " (reference " << target_slope << ")\n";
  } else if (cfg.study == "prop2") {
    const auto rows = fp_vs_dp_study([&](double eps) { return toy_precomp_factory(eps, cfg.n); }, Vector::Constant(1, 1.01),
                                     Vector::Constant(1, 2.06), {0.4, 0.2, 0.1}, cfg.replicates, cfg.seed, cfg.threads);
    auto out = open_out(dir / "prop2.csv");
    out << "eps,fp_bias,fp_variance,fp_variance_se,dp_bias,dp_variance,dp_variance_se\n";
    for (const auto& r : rows) {
      out << r.eps << ',' << r.fp.bias << ',' << r.fp.variance << ',' << r.fp.variance_se << ',' << r.dp.bias << ','
          << r.dp.variance << ',' << r.dp.variance_se << '\n';
    }
  } else if (cfg.study == "tv_toy") {
    const auto curves = run_tv_toy(cfg.chains, cfg.iters, cfg.seed, cfg.threads, cfg.eps, cfg.n, cfg.proposal_sigma);
    for (const auto& [name, curve] : curves) {
      auto out = open_out(dir / ("tv_toy_" + name + ".csv"));
      write_tv_csv(out, curve);
      log << "tv_toy " << name << ": TV at last iteration " << curve.tv.back() << '\n';
    }
    auto bins = open_out(dir / "tv_toy_bins.csv");
    const auto& ref = curves.begin()->second.reference;
    bins << "lo,hi,bins\n" << ref.lo << ',' << ref.hi << ',' << ref.bins() << '\n';
  } else {
    const DeskResult result = cfg.study == "karate" ? run_karate(cfg, &log) : run_ising_desk(cfg, &log);
    auto out = open_out(dir / (cfg.study + ".csv"));
    write_desk_csv(out, result);
  }
  log << "study " << cfg.study << " finished in " << seconds_since(start) << " s\n";
}

}  // namespace gridmh
