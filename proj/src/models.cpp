#include "gridmh/models.hpp"

#include "gridmh/numeric.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>

#ifndef GRIDMH_DATA_DIR
#define GRIDMH_DATA_DIR "data"
#endif

namespace gridmh {

namespace {

constexpr long kMaxEnumerationBits = 20;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::erdos_renyi: return "erdos_renyi";
    case ModelKind::ising: return "ising";
    case ModelKind::autologistic: return "autologistic";
    case ModelKind::ergm_edges_triangles: return "ergm_edges_triangles";
    case ModelKind::ergm_edges_twostars: return "ergm_edges_twostars";
    case ModelKind::toy_gaussian: return "toy_gaussian";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto kind : {ModelKind::erdos_renyi, ModelKind::ising, ModelKind::autologistic,
                    ModelKind::ergm_edges_triangles, ModelKind::ergm_edges_twostars,
                    ModelKind::toy_gaussian}) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown model kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(int nodes) : nodes_(nodes), words_((nodes + 63) / 64) {
  if (nodes < 1) throw InvalidState("graph needs at least one node");
  rows_.assign(static_cast<std::size_t>(nodes) * words_, 0);
}

void Graph::set_edge(int i, int j, bool present) {
  if (i == j) throw InvalidState("self-loops are not allowed");
  const std::uint64_t bit_j = std::uint64_t{1} << (j % 64);
  const std::uint64_t bit_i = std::uint64_t{1} << (i % 64);
  auto& wij = rows_[row(i) + j / 64];
  auto& wji = rows_[row(j) + i / 64];
  if (present) {
    wij |= bit_j;
    wji |= bit_i;
  } else {
    wij &= ~bit_j;
    wji &= ~bit_i;
  }
}

int Graph::degree(int i) const {
  int d = 0;
  for (int w = 0; w < words_; ++w) d += std::popcount(rows_[row(i) + w]);
  return d;
}

int Graph::common_neighbours(int i, int j) const {
  int c = 0;
  for (int w = 0; w < words_; ++w) c += std::popcount(rows_[row(i) + w] & rows_[row(j) + w]);
  return c;
}

int Graph::edge_count() const {
  long total = 0;
  for (int i = 0; i < nodes_; ++i) total += degree(i);
  return static_cast<int>(total / 2);
}

long Graph::triangle_count() const {
  long total = 0;
  for (int i = 0; i < nodes_; ++i) {
    for (int j = i + 1; j < nodes_; ++j) {
      if (edge(i, j)) total += common_neighbours(i, j);
    }
  }
  return total / 3;
}

long Graph::two_star_count() const {
  long total = 0;
  for (int i = 0; i < nodes_; ++i) {
    const long d = degree(i);
    total += d * (d - 1) / 2;
  }
  return total;
}

// ---------------------------------------------------------------------------
// GrfModel

GrfModel::GrfModel(ModelKind kind, std::vector<int> size) : kind_(kind), size_(std::move(size)) {}

GrfModel GrfModel::erdos_renyi(int nodes) { return from_kind(ModelKind::erdos_renyi, {nodes}); }
GrfModel GrfModel::ising(int height, int width) { return from_kind(ModelKind::ising, {height, width}); }
GrfModel GrfModel::autologistic(int height, int width) {
  return from_kind(ModelKind::autologistic, {height, width});
}
GrfModel GrfModel::ergm_edges_triangles(int nodes) {
  return from_kind(ModelKind::ergm_edges_triangles, {nodes});
}
GrfModel GrfModel::ergm_edges_twostars(int nodes) {
  return from_kind(ModelKind::ergm_edges_twostars, {nodes});
}
GrfModel GrfModel::toy_gaussian() { return from_kind(ModelKind::toy_gaussian, {}); }

GrfModel GrfModel::from_kind(ModelKind kind, const std::vector<int>& size) {
  switch (kind) {
    case ModelKind::erdos_renyi:
    case ModelKind::ergm_edges_triangles:
    case ModelKind::ergm_edges_twostars:
      if (size.size() != 1 || size[0] < 2) {
        throw ValidationError(to_string(kind) + " needs a single node count >= 2");
      }
      break;
    case ModelKind::ising:
    case ModelKind::autologistic:
      if (size.size() != 2 || size[0] < 1 || size[1] < 1 || size[0] * size[1] < 2) {
        throw ValidationError(to_string(kind) + " needs a lattice height and width");
      }
      break;
    case ModelKind::toy_gaussian:
      if (!size.empty()) throw ValidationError("toy_gaussian takes no size");
      break;
  }
  return GrfModel(kind, size);
}

int GrfModel::dims() const {
  switch (kind_) {
    case ModelKind::erdos_renyi:
    case ModelKind::ising:
    case ModelKind::toy_gaussian:
      return 1;
    default:
      return 2;
  }
}

bool GrfModel::is_graph() const {
  return kind_ == ModelKind::erdos_renyi || kind_ == ModelKind::ergm_edges_triangles ||
         kind_ == ModelKind::ergm_edges_twostars;
}

bool GrfModel::is_lattice() const { return kind_ == ModelKind::ising || kind_ == ModelKind::autologistic; }

int GrfModel::nodes() const { return is_graph() ? size_[0] : 0; }
int GrfModel::height() const { return is_lattice() ? size_[0] : 0; }
int GrfModel::width() const { return is_lattice() ? size_[1] : 0; }

long GrfModel::sites() const {
  if (is_graph()) return static_cast<long>(nodes()) * (nodes() - 1) / 2;
  if (is_lattice()) return static_cast<long>(height()) * width();
  return 1;
}

std::optional<long> GrfModel::log2_state_count() const {
  if (kind_ == ModelKind::toy_gaussian) return std::nullopt;
  return sites();
}

std::string GrfModel::describe() const {
  std::ostringstream out;
  out << to_string(kind_);
  for (int s : size_) out << ' ' << s;
  return out.str();
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

SuffStats graph_stats(const GrfModel& model, const Graph& g) {
  if (g.nodes() != model.nodes()) {
    throw InvalidState("graph has " + std::to_string(g.nodes()) + " nodes, model expects " +
                       std::to_string(model.nodes()));
  }
  SuffStats s(model.dims());
  s[0] = g.edge_count();
  if (model.kind() == ModelKind::ergm_edges_triangles) s[1] = static_cast<double>(g.triangle_count());
  if (model.kind() == ModelKind::ergm_edges_twostars) s[1] = static_cast<double>(g.two_star_count());
  return s;
}

long bond_sum(const SpinLattice& lat) {
  long total = 0;
  for (int r = 0; r < lat.height; ++r) {
    for (int c = 0; c < lat.width; ++c) {
      const int v = lat.at(r, c);
      if (c + 1 < lat.width) total += v * lat.at(r, c + 1);
      if (r + 1 < lat.height) total += v * lat.at(r + 1, c);
    }
  }
  return total;
}

SuffStats lattice_stats(const GrfModel& model, const SpinLattice& lat) {
  if (lat.height != model.height() || lat.width != model.width() ||
      lat.spins.size() != static_cast<std::size_t>(lat.height) * lat.width) {
    throw InvalidState("lattice shape does not match " + model.describe());
  }
  long magnet = 0;
  for (auto v : lat.spins) {
    if (v != 1 && v != -1) throw InvalidState("spin values must be -1 or +1");
    magnet += v;
  }
  SuffStats s(model.dims());
  if (model.kind() == ModelKind::ising) {
    s[0] = static_cast<double>(bond_sum(lat));
  } else {
    s[0] = static_cast<double>(magnet);
    s[1] = static_cast<double>(bond_sum(lat));
  }
  return s;
}

}  // namespace

SuffStats suff_stats(const GrfModel& model, const ModelState& state) {
  if (model.is_graph()) {
    const auto* g = std::get_if<Graph>(&state);
    if (!g) throw InvalidState(model.describe() + " expects a graph state");
    return graph_stats(model, *g);
  }
  if (model.is_lattice()) {
    const auto* lat = std::get_if<SpinLattice>(&state);
    if (!lat) throw InvalidState(model.describe() + " expects a spin lattice state");
    return lattice_stats(model, *lat);
  }
  const auto* y = std::get_if<double>(&state);
  if (!y) throw InvalidState("toy_gaussian expects a scalar state");
  if (!std::isfinite(*y)) throw InvalidState("toy_gaussian state must be finite");
  SuffStats s(1);
  s[0] = -0.5 * (*y) * (*y);
  return s;
}

double log_q(const GrfModel& model, const Vector& theta, const SuffStats& stats) {
  require_dims(theta, model.dims(), "log_q theta");
  require_dims(stats, model.dims(), "log_q stats");
  return theta.dot(stats);
}

// ---------------------------------------------------------------------------
// Normalizing constants

namespace {

ModelState state_from_mask(const GrfModel& model, std::uint64_t mask) {
  if (model.is_graph()) {
    Graph g(model.nodes());
    int bit = 0;
    for (int i = 0; i < model.nodes(); ++i) {
      for (int j = i + 1; j < model.nodes(); ++j, ++bit) {
        if ((mask >> bit) & 1u) g.set_edge(i, j, true);
      }
    }
    return g;
  }
  SpinLattice lat(model.height(), model.width());
  for (std::size_t k = 0; k < lat.spins.size(); ++k) lat.spins[k] = ((mask >> k) & 1u) ? 1 : -1;
  return lat;
}

/// Histogram of distinct statistic vectors over all 2^sites configurations.
std::map<std::vector<double>, double> enumerate_histogram(const GrfModel& model) {
  const auto bits = model.log2_state_count();
  if (!bits || *bits > kMaxEnumerationBits) {
    throw IntractableModel(model.describe() + " has no enumerable state space");
  }
  std::map<std::vector<double>, double> histogram;
  const std::uint64_t count = std::uint64_t{1} << *bits;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const SuffStats s = suff_stats(model, state_from_mask(model, mask));
    histogram[std::vector<double>(s.data(), s.data() + s.size())] += 1.0;
  }
  return histogram;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double toy_log_z(double theta) {
  if (!(theta > 0)) throw NumericalError("toy_gaussian normalizing constant needs theta > 0");
  return 0.5 * std::log(2.0 * std::numbers::pi / theta);
}

}  // namespace

double brute_force_log_z(const GrfModel& model, const Vector& theta) {
  require_dims(theta, model.dims(), "brute_force_log_z theta");
  const auto histogram = enumerate_histogram(model);
  std::vector<double> terms;
  terms.reserve(histogram.size());
  for (const auto& [stats, count] : histogram) {
    const Eigen::Map<const Vector> s(stats.data(), static_cast<Eigen::Index>(stats.size()));
    terms.push_back(std::log(count) + theta.dot(s));
  }
  return log_sum_exp(terms);
}

SuffStats brute_force_mean_stats(const GrfModel& model, const Vector& theta) {
  require_dims(theta, model.dims(), "brute_force_mean_stats theta");
  const auto histogram = enumerate_histogram(model);
  const double log_z = brute_force_log_z(model, theta);
  SuffStats mean = SuffStats::Zero(model.dims());
  for (const auto& [stats, count] : histogram) {
    const Eigen::Map<const Vector> s(stats.data(), static_cast<Eigen::Index>(stats.size()));
    mean += std::exp(std::log(count) + theta.dot(s) - log_z) * s;
  }
  return mean;
}

std::optional<double> exact_log_z(const GrfModel& model, const Vector& theta) {
  require_dims(theta, model.dims(), "exact_log_z theta");
  switch (model.kind()) {
    case ModelKind::erdos_renyi:
      return static_cast<double>(model.sites()) * softplus(theta[0]);
    case ModelKind::toy_gaussian:
      return toy_log_z(theta[0]);
    default:
      if (model.log2_state_count().value_or(kMaxEnumerationBits + 1) > kMaxEnumerationBits) {
        return std::nullopt;
      }
      return brute_force_log_z(model, theta);
  }
}

ExactPartition::ExactPartition(const GrfModel& model) : model_(model) {
  if (model.kind() == ModelKind::erdos_renyi || model.kind() == ModelKind::toy_gaussian) return;
  if (model.log2_state_count().value_or(kMaxEnumerationBits + 1) > kMaxEnumerationBits) {
    throw IntractableModel(model.describe() + " has no exact normalizing constant");
  }
  for (const auto& [stats, count] : enumerate_histogram(model)) {
    distinct_.push_back(Eigen::Map<const Vector>(stats.data(), static_cast<Eigen::Index>(stats.size())));
    log_counts_.push_back(std::log(count));
  }
}

double ExactPartition::operator()(const Vector& theta) const {
  require_dims(theta, model_.dims(), "log Z theta");
  if (model_.kind() == ModelKind::erdos_renyi) {
    return static_cast<double>(model_.sites()) * softplus(theta[0]);
  }
  if (model_.kind() == ModelKind::toy_gaussian) return toy_log_z(theta[0]);
  std::vector<double> terms(distinct_.size());
  for (std::size_t k = 0; k < distinct_.size(); ++k) terms[k] = log_counts_[k] + theta.dot(distinct_[k]);
  return log_sum_exp(terms);
}

// ---------------------------------------------------------------------------
// Auxiliary sampling

namespace {

Graph sample_independent_dyads(int nodes, double edge_probability, Rng& rng) {
  Graph g(nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      if (uniform01(rng) < edge_probability) g.set_edge(i, j, true);
    }
  }
  return g;
}

Graph gibbs_ergm(const GrfModel& model, const Vector& theta, int sweeps, Rng& rng) {
  const int p = model.nodes();
  Graph g = sample_independent_dyads(p, sigmoid(theta[0]), rng);
  const bool triangles = model.kind() == ModelKind::ergm_edges_triangles;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        double change;
        if (triangles) {
          change = g.common_neighbours(i, j);
        } else {
          const int present = g.edge(i, j) ? 1 : 0;
          change = g.degree(i) + g.degree(j) - 2 * present;
        }
        const double prob = sigmoid(theta[0] + theta[1] * change);
        g.set_edge(i, j, uniform01(rng) < prob);
      }
    }
  }
  return g;
}

SpinLattice gibbs_lattice(const GrfModel& model, const Vector& theta, int sweeps, Rng& rng) {
  SpinLattice lat(model.height(), model.width());
  for (auto& v : lat.spins) v = uniform01(rng) < 0.5 ? -1 : 1;
  const bool ising = model.kind() == ModelKind::ising;
  const double field = ising ? 0.0 : theta[0];
  const double coupling = ising ? theta[0] : theta[1];
  const int h = lat.height;
  const int w = lat.width;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        int nb = 0;
        if (r > 0) nb += lat.at(r - 1, c);
        if (r + 1 < h) nb += lat.at(r + 1, c);
        if (c > 0) nb += lat.at(r, c - 1);
        if (c + 1 < w) nb += lat.at(r, c + 1);
        const double prob_up = sigmoid(2.0 * field + 2.0 * coupling * nb);
        lat.at(r, c) = uniform01(rng) < prob_up ? 1 : -1;
      }
    }
  }
  return lat;
}

}  // namespace

ModelState sample_aux(const GrfModel& model, const Vector& theta, int sweeps, Rng& rng) {
  require_dims(theta, model.dims(), "sample_aux theta");
  if (sweeps < 1) throw ValidationError("sample_aux needs sweeps >= 1");
  switch (model.kind()) {
    case ModelKind::toy_gaussian: {
      if (!(theta[0] > 0)) throw NumericalError("toy_gaussian sampling needs theta > 0");
      return standard_normal(rng) / std::sqrt(theta[0]);
    }
    case ModelKind::erdos_renyi:
      return sample_independent_dyads(model.nodes(), sigmoid(theta[0]), rng);
    case ModelKind::ergm_edges_triangles:
    case ModelKind::ergm_edges_twostars:
      return gibbs_ergm(model, theta, sweeps, rng);
    case ModelKind::ising:
    case ModelKind::autologistic:
      return gibbs_lattice(model, theta, sweeps, rng);
  }
  throw Error("unreachable model kind");
}

// ---------------------------------------------------------------------------
// Data

Graph read_edge_list(std::istream& in, int nodes) {
  Graph g(nodes);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    int i = 0;
    int j = 0;
    if (!(fields >> i)) continue;
    if (!(fields >> j)) throw ValidationError("edge list line " + std::to_string(line_no) + ": expected 'i j'");
    if (i < 1 || j < 1 || i > nodes || j > nodes || i == j) {
      throw ValidationError("edge list line " + std::to_string(line_no) + ": invalid dyad");
    }
    g.set_edge(i - 1, j - 1, true);
  }
  return g;
}

Graph read_edge_list_file(const std::string& path, int nodes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open edge list '" + path + "'");
  return read_edge_list(in, nodes);
}

std::string data_path(const std::string& file) {
  if (const char* dir = std::getenv("GRIDMH_DATA_DIR")) return std::string(dir) + "/" + file;
  return std::string(GRIDMH_DATA_DIR) + "/" + file;
}

Graph karate_graph() { return read_edge_list_file(data_path("karate.txt"), 34); }

}  // namespace gridmh
