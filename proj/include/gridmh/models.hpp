#pragma once

#include "gridmh/core.hpp"
#include "gridmh/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gridmh {

enum class ModelKind {
  erdos_renyi,
  ising,
  autologistic,
  ergm_edges_triangles,
  ergm_edges_twostars,
  toy_gaussian,
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Undirected simple graph stored as one bitset row per node.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int nodes);

  int nodes() const { return nodes_; }
  bool edge(int i, int j) const { return (rows_[row(i) + j / 64] >> (j % 64)) & 1u; }
  void set_edge(int i, int j, bool present);
  int degree(int i) const;
  int common_neighbours(int i, int j) const;
  int edge_count() const;
  long triangle_count() const;
  long two_star_count() const;

  bool operator==(const Graph&) const = default;

 private:
  std::size_t row(int i) const { return static_cast<std::size_t>(i) * words_; }

  int nodes_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> rows_;
};

/// Rectangular lattice of +-1 spins, row-major.
struct SpinLattice {
  int height = 0;
  int width = 0;
  std::vector<std::int8_t> spins;

  SpinLattice() = default;
  SpinLattice(int h, int w, std::int8_t fill = 1) : height(h), width(w), spins(static_cast<std::size_t>(h) * w, fill) {}
  std::int8_t& at(int r, int c) { return spins[static_cast<std::size_t>(r) * width + c]; }
  std::int8_t at(int r, int c) const { return spins[static_cast<std::size_t>(r) * width + c]; }

  bool operator==(const SpinLattice&) const = default;
};

/// y for the toy Gaussian model is a single real.
using ModelState = std::variant<Graph, SpinLattice, double>;

/// A Gibbs random field family f(y|theta) = exp(theta' s(y)) / Z(theta).
///
/// Lattice models use free boundaries. The toy Gaussian model uses
/// s(y) = -y^2/2 so that q_theta(y) = exp(-theta y^2 / 2).
class GrfModel {
 public:
  static GrfModel erdos_renyi(int nodes);
  static GrfModel ising(int height, int width);
  static GrfModel autologistic(int height, int width);
  static GrfModel ergm_edges_triangles(int nodes);
  static GrfModel ergm_edges_twostars(int nodes);
  static GrfModel toy_gaussian();
  /// Builds from a kind and its size list ({p}, {h, w} or {}).
  static GrfModel from_kind(ModelKind kind, const std::vector<int>& size);

  ModelKind kind() const { return kind_; }
  int dims() const;
  const std::vector<int>& size() const { return size_; }
  bool is_graph() const;
  bool is_lattice() const;
  int nodes() const;
  int height() const;
  int width() const;
  /// Number of dyads (graphs), cells (lattices) or 1 (toy).
  long sites() const;
  /// Full systematic scans per auxiliary draw when the caller gives none.
  int default_sweeps() const { return 5; }
  /// log2 of the number of configurations, or nullopt for the continuous toy model.
  std::optional<long> log2_state_count() const;

  std::string describe() const;

  bool operator==(const GrfModel&) const = default;

 private:
  GrfModel(ModelKind kind, std::vector<int> size);

  ModelKind kind_ = ModelKind::toy_gaussian;
  std::vector<int> size_;
};

SuffStats suff_stats(const GrfModel& model, const ModelState& state);

/// theta' s, i.e. log q_theta(y) expressed through the statistics.
double log_q(const GrfModel& model, const Vector& theta, const SuffStats& stats);

/// Exact log Z(theta) where available: closed form for Erdos-Renyi and the toy
/// model, enumeration for graph/lattice models with at most 2^20 states.
/// Returns nullopt for intractable models.
std::optional<double> exact_log_z(const GrfModel& model, const Vector& theta);

/// log Z(theta) by summing over every configuration. Throws IntractableModel
/// beyond 2^20 states or for the continuous toy model.
double brute_force_log_z(const GrfModel& model, const Vector& theta);

/// E_theta[s(X)] by enumeration (same availability as brute_force_log_z).
SuffStats brute_force_mean_stats(const GrfModel& model, const Vector& theta);

/// One approximate draw from f(.|theta).
///
/// Lattices: `sweeps` systematic-scan single-site Gibbs scans from a uniformly
/// random configuration. ERGMs: `sweeps` systematic scans over dyads, starting
/// from independent dyads with probability logit^-1(theta_edges). Erdos-Renyi
/// and the toy model are sampled exactly.
ModelState sample_aux(const GrfModel& model, const Vector& theta, int sweeps, Rng& rng);

inline SuffStats sample_stats(const GrfModel& model, const Vector& theta, int sweeps, Rng& rng) {
  return suff_stats(model, sample_aux(model, theta, sweeps, rng));
}

/// Caches what is needed to evaluate log Z(theta) repeatedly: a closed form, or
/// the histogram of distinct statistic vectors over the full state space.
class ExactPartition {
 public:
  /// Throws IntractableModel when no exact route exists.
  explicit ExactPartition(const GrfModel& model);

  double operator()(const Vector& theta) const;
  const GrfModel& model() const { return model_; }

 private:
  GrfModel model_;
  std::vector<SuffStats> distinct_;
  std::vector<double> log_counts_;
};

/// Reads an undirected "i j" edge list with 1-based indices. Self-loops and
/// indices outside [1, nodes] are rejected.
Graph read_edge_list(std::istream& in, int nodes);
Graph read_edge_list_file(const std::string& path, int nodes);

/// Zachary's karate club (34 nodes, 78 edges) from the bundled data directory.
Graph karate_graph();
std::string data_path(const std::string& file);

}  // namespace gridmh
