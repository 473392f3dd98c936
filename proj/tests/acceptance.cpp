// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any fails.
#include "gridmh/chains.hpp"
#include "gridmh/config.hpp"
#include "gridmh/diagnostics.hpp"
#include "gridmh/harness.hpp"
#include "gridmh/models.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace gridmh;

namespace {

int failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

void criterion(const std::string& label, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= budget_seconds;
  const bool pass = outcome.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream line;
  line.precision(4);
  line << label << ": " << (pass ? "PASS" : "FAIL") << " (" << outcome.detail << "; " << secs << " s of "
       << budget_seconds << " s" << (in_time ? "" : ", over budget") << ")";
  std::cout << line.str() << std::endl;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

struct ChainMoments {
  double mean, mean_se, var, var_se;
};

ChainMoments chain_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::vector<double> sq(x.size());
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sq[i] = (x[i] - mean) * (x[i] - mean);
    var += sq[i];
  }
  var /= n - 1.0;
  double var_sq = 0.0;
  for (double v : sq) var_sq += (v - var) * (v - var);
  var_sq /= n - 1.0;
  return {mean, std::sqrt(var / ess(x)), var, std::sqrt(var_sq / ess(sq))};
}

std::string config_path(const std::string& name) { return std::string(GRIDMH_SOURCE_DIR) + "/configs/" + name; }

}  // namespace

int main() {
  std::cout << "gridmh acceptance run" << std::endl;

  criterion("criterion 1 exact log Z oracle", 1.0, [] {
    const GrfModel er = GrfModel::erdos_renyi(4);
    double worst = 0.0;
    for (double t : {-1.0, 0.0, 1.0}) {
      const double got = brute_force_log_z(er, Vector::Constant(1, t));
      worst = std::max(worst, std::abs(got - 6.0 * oracle::softplus(t)));
    }
    return Outcome{worst <= 1e-12, "max |error| " + fmt(worst)};
  });

  criterion("criterion 2 toy posterior via exchange and mh_exact", 30.0, [] {
    const Target target = toy_target(false);
    const Proposal proposal = Proposal::multiplicative(0.5);
    const Vector init = Vector::Constant(1, 0.5);
    Rng rng_mh = make_stream(2, 1);
    Rng rng_ex = make_stream(2, 2);
    const ChainTrace mh = mh_exact(target, proposal, init, 100000, rng_mh);
    const ChainTrace ex = exchange(target, proposal, init, 100000, 1, rng_ex);
    bool ok = true;
    std::string detail;
    for (auto [name, trace] : {std::pair<const char*, const ChainTrace*>{"mh", &mh}, {"exchange", &ex}}) {
      const ChainMoments m = chain_moments(trace->coordinate(0, 1));
      const double zm = (m.mean - oracle::ToyPosterior::mean) / m.mean_se;
      const double zv = (m.var - oracle::ToyPosterior::variance) / m.var_se;
      ok = ok && std::abs(zm) <= 2.0 && std::abs(zv) <= 2.0;
      detail += std::string(detail.empty() ? "" : "; ") + name + " mean " + fmt(m.mean) + " (z " + fmt(zm) + "), var " +
                fmt(m.var) + " (z " + fmt(zv) + ")";
    }
    return Outcome{ok, detail};
  });

  criterion("criterion 3 estimator moments at (1.01, 2.06)", 300.0, [] {
    const auto rows = run_table1(10000, 2024);
    const Table1Row& r = rows.front();
    const bool ok = r.fp.variance <= r.dp.variance / 5.0 && r.fp.variance <= r.op.variance / 5.0 &&
                    std::abs(r.fp.bias) < 0.01;
    return Outcome{ok, "FP bias " + fmt(r.fp.bias) + " var " + fmt(r.fp.variance) + ", DP var " + fmt(r.dp.variance) +
                           ", OP var " + fmt(r.op.variance)};
  });

  criterion("criterion 4 Erdos-Renyi variance growth", 120.0, [] {
    std::vector<double> hs{0.5};
    for (int k = 0; k <= 8; ++k) hs.push_back(1.0 + 0.25 * k);
    const SlopeReport rep = variance_growth_study(5, 0.0, hs, 10, 10000, 2024, 1.0);
    const SlopePoint& half = rep.points.front();
    const double z = (half.variance - half.exact) / half.variance_se;
    const bool ok = std::abs(rep.slope - 20.0) <= 0.15 * 20.0 && std::abs(z) <= 3.0;
    return Outcome{ok, "slope " + fmt(rep.slope) + " vs 20, h = 0.5 MC " + fmt(half.variance) + " exact " +
                           fmt(half.exact) + " (z " + fmt(z) + ")"};
  });

  criterion("criterion 5 local variance slope on the toy model", 120.0, [] {
    std::vector<double> hs;
    for (int k = 1; k <= 10; ++k) hs.push_back(0.02 * k);
    const SlopeReport rep = local_variance_study(toy_model(), 1.0, hs, 10, 10000, 2024);
    return Outcome{std::abs(rep.slope - 2.0) <= 0.3, "slope " + fmt(rep.slope)};
  });

  criterion("criterion 6 toy TV ordering at iteration 50", 600.0, [] {
    const auto curves = run_tv_toy(10000, 50, 2024);
    const double ex = curves.at("exchange").tv.back();
    const double op = curves.at("op").tv.back();
    const double dp = curves.at("dp").tv.back();
    const double fp = curves.at("fp").tv.back();
    const bool ok = std::abs(fp - ex) <= 0.05 && op > fp && dp > fp;
    return Outcome{ok, "TV exchange " + fmt(ex) + ", fp " + fmt(fp) + ", dp " + fmt(dp) + ", op " + fmt(op)};
  });

  criterion("criterion 7 karate posterior means", 1800.0, [] {
    const ExperimentConfig cfg = load_config(config_path("karate.ini"));
    const DeskResult res = run_karate(cfg);
    const PosteriorSummary* fp = nullptr;
    const PosteriorSummary* ex = nullptr;
    for (const auto& r : res.rows) {
      if (r.method == "fp") fp = &r;
      if (r.method == "exchange") ex = &r;
    }
    const bool ok = std::abs(fp->mean[0] + 2.05) <= 0.3 && std::abs(fp->mean[1] - 0.38) <= 0.15;
    return Outcome{ok, "FP means (" + fmt(fp->mean[0]) + ", " + fmt(fp->mean[1]) + "), exchange reference (" +
                           fmt(ex->mean[0]) + ", " + fmt(ex->mean[1]) + "), grid M = " +
                           std::to_string(res.grid_points)};
  });

  criterion("criterion 8 property suite", 600.0, [] {
    const std::string cmd = std::string("\"") + GRIDMH_PROPERTIES_BIN + "\" --minimal > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return Outcome{status == 0, "property binary exit status " + std::to_string(status)};
  });

  criterion("ising desk ESS per second, FP vs exchange", 1800.0, [] {
    const ExperimentConfig cfg = load_config(config_path("ising.ini"));
    const DeskResult res = run_ising_desk(cfg);
    double fp = 0.0;
    double ex = 0.0;
    double ex_lo = 0.0, ex_hi = 0.0, abc_lo = 0.0, abc_hi = 0.0;
    for (const auto& r : res.rows) {
      const double rate = r.ess[0] / r.seconds;
      if (r.method == "fp") fp = rate;
      if (r.method == "exchange") {
        ex = rate;
        ex_lo = r.q05[0];
        ex_hi = r.q95[0];
      }
      if (r.method == "abc") {
        abc_lo = r.q05[0];
        abc_hi = r.q95[0];
      }
    }
    const bool overlap = abc_lo <= ex_hi && ex_lo <= abc_hi;
    return Outcome{fp >= ex && overlap, "ESS/s fp " + fmt(fp) + " exchange " + fmt(ex) + ", abc 90% [" + fmt(abc_lo) +
                                            ", " + fmt(abc_hi) + "] vs exchange [" + fmt(ex_lo) + ", " + fmt(ex_hi) +
                                            "]"};
  });

  std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
