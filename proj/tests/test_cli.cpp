// Drives the gridmh executable end to end.
#include "gridmh/precompute.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace gridmh;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(GRIDMH_SOURCE_DIR) + "/configs/";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gridmh_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + GRIDMH_CLI_BIN + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Copy of a bundled config with some keys replaced; keys are "section.key".
fs::path patched_config(const std::string& base, const std::map<std::string, std::string>& changes, const fs::path& dir) {
  std::istringstream in(slurp(kConfigs + base));
  std::ostringstream out;
  std::string line, section;
  std::map<std::string, std::string> pending = changes;
  auto flush_section = [&] {
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->first.rfind(section + ".", 0) == 0) {
        out << it->first.substr(section.size() + 1) << " = " << it->second << '\n';
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '[') {
      flush_section();
      section = line.substr(1, line.find(']') - 1);
      out << line << '\n';
      continue;
    }
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      key.erase(key.find_last_not_of(' ') + 1);
      if (pending.count(section + "." + key)) continue;
    }
    out << line << '\n';
  }
  flush_section();
  for (const auto& [k, v] : pending) {
    const auto dot = k.find('.');
    out << '[' << k.substr(0, dot) << "]\n" << k.substr(dot + 1) << " = " << v << '\n';
  }
  const fs::path path = dir / ("patched_" + base);
  std::ofstream(path) << out.str();
  return path;
}

std::map<std::string, std::string> manifest(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma != std::string::npos) kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return kv;
}

int count_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("grid command on the toy config") {
  const fs::path a = scratch("grid_a"), b = scratch("grid_b");
  REQUIRE(run("grid --config " + kConfigs + "toy.ini --out " + a.string()) == 0);
  REQUIRE(run("grid --config " + kConfigs + "toy.ini --out " + b.string()) == 0);
  CHECK(slurp(a / "grid.txt") == slurp(b / "grid.txt"));

  const PrecompData g = load_precomp((a / "grid.txt").string());
  CHECK(g.n() == 0);
  double lo = 1e300, hi = -1e300;
  for (const auto& p : g.grid().points()) {
    lo = std::min(lo, p.theta[0]);
    hi = std::max(hi, p.theta[0]);
  }
  // Central 99% interval of the Gamma(3/2, 3) posterior.
  CHECK(lo <= 0.013);
  CHECK(hi >= 1.47);

  const fs::path c = scratch("grid_c");
  const fs::path cfg = patched_config("toy.ini", {{"grid.max_steps", "0"}}, c);
  REQUIRE(run("grid --config " + cfg.string() + " --out " + c.string()) == 0);
  CHECK(load_precomp((c / "grid.txt").string()).size() == 1);
}

TEST_CASE("precompute command") {
  const fs::path dir = scratch("precompute");
  const fs::path cfg = patched_config(
      "toy.ini", {{"grid.method", "regular"}, {"grid.eps", "0.1"}, {"grid.first", "1"}, {"grid.last", "21"}}, dir);
  REQUIRE(run("grid --config " + cfg.string() + " --out " + dir.string()) == 0);
  const std::string grid = (dir / "grid.txt").string();
  const fs::path one = dir / "one", two = dir / "two", three = dir / "three";
  REQUIRE(run("precompute --config " + cfg.string() + " --grid " + grid + " --out " + one.string()) == 0);
  REQUIRE(run("precompute --config " + cfg.string() + " --grid " + grid + " --out " + two.string()) == 0);
  REQUIRE(run("precompute --config " + cfg.string() + " --grid " + grid + " --threads 3 --out " + three.string()) == 0);
  const std::string text = slurp(one / "precomp.txt");
  CHECK(text == slurp(two / "precomp.txt"));
  CHECK(text == slurp(three / "precomp.txt"));
  const PrecompData p = load_precomp((one / "precomp.txt").string());
  CHECK(p.size() == 21);
  long rows = 0;
  for (std::size_t m = 0; m < p.size(); ++m) rows += p.stats(m).rows();
  CHECK(rows == 210);
  CHECK(text.find("\nM 21\nn 10\n") != std::string::npos);

  const fs::path other = dir / "other";
  REQUIRE(run("precompute --config " + cfg.string() + " --grid " + grid + " --seed 77 --out " + other.string()) == 0);
  CHECK(slurp(other / "precomp.txt") != text);
}

TEST_CASE("pre-computed statistic means on the adaptive toy grid") {
  const fs::path dir = scratch("means");
  const fs::path cfg = patched_config("toy.ini", {{"precompute.n", "10000"}}, dir);
  REQUIRE(run("grid --config " + cfg.string() + " --out " + dir.string()) == 0);
  REQUIRE(run("precompute --config " + cfg.string() + " --grid " + (dir / "grid.txt").string() + " --out " +
              dir.string()) == 0);
  const PrecompData p = load_precomp((dir / "precomp.txt").string());
  for (std::size_t m = 0; m < p.size(); ++m) {
    const double theta = p.grid().point(m).theta[0];
    // s = -X^2/2 with X ~ N(0, 1/theta): mean -1/(2 theta), variance 1/(2 theta^2).
    const double se = std::sqrt(0.5 / (theta * theta) / p.n());
    CAPTURE(theta);
    CHECK(std::abs(p.stats(m).col(0).mean() + 0.5 / theta) < 3.0 * se);
  }
}

TEST_CASE("run command") {
  const fs::path dir = scratch("run");
  const std::string cfg = kConfigs + "toy.ini";
  REQUIRE(run("grid --config " + cfg + " --out " + dir.string()) == 0);
  REQUIRE(run("precompute --config " + cfg + " --grid " + (dir / "grid.txt").string() + " --out " + dir.string()) == 0);
  const std::string precomp = (dir / "precomp.txt").string();

  const fs::path fp = dir / "fp";
  REQUIRE(run("run --config " + cfg + " --precomp " + precomp + " --chain precomp --estimator fp --iters 10000 --out " +
              fp.string()) == 0);
  const auto m = manifest(fp / "run_manifest.csv");
  const double acc = std::stod(m.at("acceptance_0"));
  CHECK(acc > 0.1);
  CHECK(acc < 0.9);
  CHECK(m.at("seed") == "2024");
  CHECK(m.count("precomp_crc64") == 1);
  CHECK(m.count("config.model.kind") == 1);
  CHECK(count_lines(fp / "trace_0.csv") == 10002);

  const fs::path ex = dir / "ex", nz = dir / "nz";
  REQUIRE(run("run --config " + cfg + " --chain exchange --iters 2000 --chains 2 --out " + ex.string()) == 0);
  REQUIRE(run("run --config " + cfg + " --chain noisy --iters 2000 --chains 2 --threads 2 --out " + nz.string()) == 0);
  CHECK(slurp(ex / "trace_0.csv") == slurp(nz / "trace_0.csv"));
  CHECK(slurp(ex / "trace_1.csv") == slurp(nz / "trace_1.csv"));

  for (const char* est : {"op", "dp"}) {
    CHECK(run("run --config " + cfg + " --precomp " + precomp + " --chain precomp --estimator " + est +
              " --iters 500 --out " + (dir / est).string()) == 0);
  }
  CHECK(run("run --config " + cfg + " --precomp " + precomp + " --chain abc --iters 500 --out " +
            (dir / "abc").string()) == 0);
}

TEST_CASE("error exits") {
  const fs::path dir = scratch("errors");
  CHECK(run("run --config " + kConfigs + "karate.ini --chain mh --iters 10 --out " + dir.string()) == 3);
  CHECK(run("grid --config /nonexistent.ini") == 2);
  CHECK(run("grid") == 2);
  CHECK(run("frobnicate --config " + kConfigs + "toy.ini") == 2);
  CHECK(run("run --config " + kConfigs + "toy.ini --chain gibbs") == 2);
  CHECK(run("run --config " + kConfigs + "toy.ini --chain precomp --out " + dir.string()) == 2);

  const fs::path bad = dir / "bad.ini";
  std::ofstream(bad) << "[model]\nkind = toy_gaussian\nflavour = mint\n";
  CHECK(run("grid --config " + bad.string()) == 2);

  // Pre-computed data for another model is refused.
  REQUIRE(run("grid --config " + kConfigs + "toy.ini --out " + dir.string()) == 0);
  REQUIRE(run("precompute --config " + kConfigs + "toy.ini --grid " + (dir / "grid.txt").string() + " --out " +
              dir.string()) == 0);
  CHECK(run("run --config " + kConfigs + "er.ini --precomp " + (dir / "precomp.txt").string() + " --out " +
            dir.string()) == 2);

  std::string damaged = slurp(dir / "precomp.txt");
  damaged[damaged.size() / 2] = damaged[damaged.size() / 2] == '1' ? '2' : '1';
  std::ofstream(dir / "damaged.txt") << damaged;
  CHECK(run("run --config " + kConfigs + "toy.ini --precomp " + (dir / "damaged.txt").string() + " --out " +
            dir.string()) == 2);
}

TEST_CASE("study command") {
  const fs::path t1 = scratch("table1");
  REQUIRE(run("study --config " + patched_config("table1.ini", {{"study.replicates", "200"}}, t1).string() + " --out " +
              t1.string()) == 0);
  CHECK(count_lines(t1 / "table1_layout.csv") == 4);
  std::istringstream layout(slurp(t1 / "table1_layout.csv"));
  std::string header;
  std::getline(layout, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 6);

  const fs::path tv = scratch("tv");
  REQUIRE(run("study --config " + patched_config("tv_toy.ini", {{"chain.chains", "200"}}, tv).string() + " --out " +
              tv.string()) == 0);
  for (const char* alg : {"exchange", "op", "dp", "fp"}) {
    CHECK(count_lines(tv / (std::string("tv_toy_") + alg + ".csv")) == 52);
  }

  for (const char* name : {"example1", "prop1", "prop2"}) {
    const fs::path d = scratch(name);
    REQUIRE(run("study --config " + patched_config(std::string(name) + ".ini", {{"study.replicates", "200"}}, d).string() +
                " --out " + d.string()) == 0);
    CHECK(fs::exists(d / (std::string(name) + ".csv")));
  }
}
