#include "gridmh/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gridmh {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"kind", "size", "sweeps"}},
      {"data", {"y", "stats", "edgelist", "synthetic_theta", "synthetic_sweeps", "synthetic_seed"}},
      {"prior", {"kind", "shape", "rate", "lower", "upper", "mean", "sd"}},
      {"proposal", {"kind", "sigma", "scale"}},
      {"grid",
       {"method", "eps", "m", "draws", "max_steps", "mode_init", "mode_steps", "mode_draws", "a0", "t0",
        "hessian_draws", "origin", "first", "last"}},
      {"precompute", {"n", "sweeps"}},
      {"chain", {"kind", "estimator", "iters", "chains", "n_aux", "tolerance", "init", "average_paths", "burn_in"}},
      {"run", {"seed", "threads", "out"}},
      {"study", {"name", "replicates"}},
  };
  return keys;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw ValidationError(what + ": cannot parse '" + text + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string text, const std::string& what) {
  for (auto& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<T> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_number<T>(tok, what));
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError(what + ": expected true or false, got '" + text + "'");
}

void require_one_of(const std::string& value, const std::set<std::string>& options, const std::string& what) {
  if (!options.count(value)) {
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    throw ValidationError(what + ": '" + value + "' is not one of " + list);
  }
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  return out.str();
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config syntax: ") + e.what());
  }

  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    const auto known = allowed_keys().find(section);
    if (known == allowed_keys().end()) {
      if (body.empty()) throw ValidationError("config key '" + section + "' outside any section");
      throw ValidationError("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.count(key)) throw ValidationError("unknown config key " + where(section, key));
      const std::string value = node.get_value<std::string>();
      const std::string what = where(section, key);
      if (section == "model") {
        if (key == "kind") c.model_kind = value;
        if (key == "size") c.model_size = parse_list<int>(value, what);
        if (key == "sweeps") c.sweeps = parse_number<int>(value, what);
      } else if (section == "data") {
        if (key == "y") c.y = parse_number<double>(value, what);
        if (key == "stats") c.stats = parse_list<double>(value, what);
        if (key == "edgelist") c.edgelist = value;
        if (key == "synthetic_theta") c.synthetic_theta = parse_list<double>(value, what);
        if (key == "synthetic_sweeps") c.synthetic_sweeps = parse_number<int>(value, what);
        if (key == "synthetic_seed") c.synthetic_seed = parse_number<std::uint64_t>(value, what);
      } else if (section == "prior") {
        if (key == "kind") c.prior_kind = value;
        if (key == "shape") c.prior_shape = parse_number<double>(value, what);
        if (key == "rate") c.prior_rate = parse_number<double>(value, what);
        if (key == "lower") c.prior_lower = parse_list<double>(value, what);
        if (key == "upper") c.prior_upper = parse_list<double>(value, what);
        if (key == "mean") c.prior_mean = parse_number<double>(value, what);
        if (key == "sd") c.prior_sd = parse_number<double>(value, what);
      } else if (section == "proposal") {
        if (key == "kind") c.proposal_kind = value;
        if (key == "sigma") c.proposal_sigma = parse_number<double>(value, what);
        if (key == "scale") c.proposal_scale = parse_list<double>(value, what);
      } else if (section == "grid") {
        if (key == "method") c.grid_method = value;
        if (key == "eps") c.eps = parse_number<double>(value, what);
        if (key == "m") c.m = parse_number<double>(value, what);
        if (key == "draws") c.grid_draws = parse_number<int>(value, what);
        if (key == "max_steps") c.max_steps = parse_number<int>(value, what);
        if (key == "mode_init") c.mode_init = parse_list<double>(value, what);
        if (key == "mode_steps") c.mode_steps = parse_number<int>(value, what);
        if (key == "mode_draws") c.mode_draws = parse_number<int>(value, what);
        if (key == "a0") c.a0 = parse_number<double>(value, what);
        if (key == "t0") c.t0 = parse_number<double>(value, what);
        if (key == "hessian_draws") c.hessian_draws = parse_number<int>(value, what);
        if (key == "origin") c.origin = parse_number<double>(value, what);
        if (key == "first") c.first = parse_number<int>(value, what);
        if (key == "last") c.last = parse_number<int>(value, what);
      } else if (section == "precompute") {
        if (key == "n") c.n = parse_number<int>(value, what);
        if (key == "sweeps") c.precompute_sweeps = parse_number<int>(value, what);
      } else if (section == "chain") {
        if (key == "kind") c.chain_kind = value;
        if (key == "estimator") c.estimator = value;
        if (key == "iters") c.iters = parse_number<long>(value, what);
        if (key == "chains") c.chains = parse_number<int>(value, what);
        if (key == "n_aux") c.n_aux = parse_number<int>(value, what);
        if (key == "tolerance") c.tolerance = parse_number<double>(value, what);
        if (key == "init") c.init = parse_list<double>(value, what);
        if (key == "average_paths") c.average_paths = parse_bool(value, what);
        if (key == "burn_in") c.burn_in = parse_number<long>(value, what);
      } else if (section == "run") {
        if (key == "seed") c.seed = parse_number<std::uint64_t>(value, what);
        if (key == "threads") c.threads = parse_number<int>(value, what);
        if (key == "out") c.out = value;
      } else if (section == "study") {
        if (key == "name") c.study = value;
        if (key == "replicates") c.replicates = parse_number<long>(value, what);
      }
    }
  }

  // Validation that does not need the model.
  parse_model_kind(c.model_kind);
  require_one_of(c.prior_kind, {"gamma", "uniform", "gaussian", "flat"}, "[prior] kind");
  require_one_of(c.proposal_kind, {"random_walk", "multiplicative"}, "[proposal] kind");
  require_one_of(c.grid_method, {"adaptive", "regular"}, "[grid] method");
  require_one_of(c.chain_kind, {"mh", "exchange", "noisy", "precomp", "abc"}, "[chain] kind");
  require_one_of(c.estimator, {"op", "dp", "fp"}, "[chain] estimator");
  if (!c.study.empty()) {
    require_one_of(c.study, {"table1", "example1", "prop1", "prop2", "tv_toy", "ising_desk", "karate"},
                   "[study] name");
  }
  if (c.sweeps < 0 || c.precompute_sweeps < 0) throw ValidationError("sweeps must be >= 0");
  if (!(c.eps > 0)) throw ValidationError("[grid] eps must be positive");
  if (c.grid_draws < 1 || c.mode_draws < 1) throw ValidationError("[grid] draws must be >= 1");
  if (c.max_steps < 0) throw ValidationError("[grid] max_steps must be >= 0");
  if (c.mode_steps < 1) throw ValidationError("[grid] mode_steps must be >= 1");
  if (c.hessian_draws < 2) throw ValidationError("[grid] hessian_draws must be >= 2");
  if (c.first > c.last) throw ValidationError("[grid] first must not exceed last");
  if (c.n < 1) throw ValidationError("[precompute] n must be >= 1");
  if (c.iters < 0 || c.chains < 1 || c.n_aux < 1 || c.burn_in < 0) throw ValidationError("[chain] counts out of range");
  if (!(c.tolerance > 0)) throw ValidationError("[chain] tolerance must be positive");
  if (!(c.proposal_sigma > 0)) throw ValidationError("[proposal] sigma must be positive");
  if (c.threads < 0) throw ValidationError("[run] threads must be >= 0");
  if (c.replicates < 2) throw ValidationError("[study] replicates must be >= 2");
  const int sources = (c.y ? 1 : 0) + (c.stats.empty() ? 0 : 1) + (c.edgelist.empty() ? 0 : 1) +
                      (c.synthetic_theta.empty() ? 0 : 1);
  if (sources > 1) throw ValidationError("[data] give only one of y, stats, edgelist, synthetic_theta");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  return parse_config(in);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream text;
  text.precision(17);
  text << "model.kind=" << model_kind << "\nmodel.size=" << join(model_size) << "\nmodel.sweeps=" << sweeps;
  if (y) text << "\ndata.y=" << *y;
  if (!stats.empty()) text << "\ndata.stats=" << join(stats);
  if (!edgelist.empty()) text << "\ndata.edgelist=" << edgelist;
  if (!synthetic_theta.empty()) {
    text << "\ndata.synthetic_theta=" << join(synthetic_theta) << "\ndata.synthetic_sweeps=" << synthetic_sweeps
        << "\ndata.synthetic_seed=" << synthetic_seed;
  }
  text << "\nprior.kind=" << prior_kind << "\nprior.shape=" << prior_shape << "\nprior.rate=" << prior_rate
      << "\nprior.lower=" << join(prior_lower) << "\nprior.upper=" << join(prior_upper)
      << "\nprior.mean=" << prior_mean << "\nprior.sd=" << prior_sd << "\nproposal.kind=" << proposal_kind
      << "\nproposal.sigma=" << proposal_sigma << "\nproposal.scale=" << join(proposal_scale)
      << "\ngrid.method=" << grid_method << "\ngrid.eps=" << eps << "\ngrid.m=" << m << "\ngrid.draws=" << grid_draws
      << "\ngrid.max_steps=" << max_steps << "\ngrid.mode_init=" << join(mode_init)
      << "\ngrid.mode_steps=" << mode_steps << "\ngrid.mode_draws=" << mode_draws << "\ngrid.a0=" << a0
      << "\ngrid.t0=" << t0 << "\ngrid.hessian_draws=" << hessian_draws << "\ngrid.origin=" << origin
      << "\ngrid.first=" << first << "\ngrid.last=" << last << "\nprecompute.n=" << n
      << "\nprecompute.sweeps=" << precompute_sweeps << "\nchain.kind=" << chain_kind
      << "\nchain.estimator=" << estimator << "\nchain.iters=" << iters << "\nchain.chains=" << chains
      << "\nchain.n_aux=" << n_aux << "\nchain.tolerance=" << tolerance << "\nchain.init=" << join(init)
      << "\nchain.average_paths=" << (average_paths ? "true" : "false") << "\nchain.burn_in=" << burn_in
      << "\nrun.seed=" << seed << "\nrun.threads=" << threads << "\nrun.out=" << out
      << "\nstudy.name=" << study << "\nstudy.replicates=" << replicates << '\n';
  return text.str();
}

GrfModel make_model(const ExperimentConfig& cfg) { return GrfModel::from_kind(parse_model_kind(cfg.model_kind), cfg.model_size); }

int aux_sweeps(const ExperimentConfig& cfg, const GrfModel& model) {
  return cfg.sweeps > 0 ? cfg.sweeps : model.default_sweeps();
}

int precompute_sweeps(const ExperimentConfig& cfg, const GrfModel& model) {
  return cfg.precompute_sweeps > 0 ? cfg.precompute_sweeps : aux_sweeps(cfg, model);
}

SuffStats observed_stats(const ExperimentConfig& cfg, const GrfModel& model) {
  const int d = model.dims();
  if (cfg.y) {
    if (model.kind() != ModelKind::toy_gaussian) throw ValidationError("[data] y applies to toy_gaussian only");
    return suff_stats(model, ModelState{*cfg.y});
  }
  if (!cfg.stats.empty()) {
    if (static_cast<int>(cfg.stats.size()) != d) throw ValidationError("[data] stats length must equal model dimension");
    return Eigen::Map<const Vector>(cfg.stats.data(), d);
  }
  if (!cfg.edgelist.empty()) {
    if (!model.is_graph()) throw ValidationError("[data] edgelist needs a graph model");
    const Graph g = cfg.edgelist == "karate" ? karate_graph() : read_edge_list_file(cfg.edgelist, model.nodes());
    if (g.nodes() != model.nodes()) throw ValidationError("[data] edge list node count differs from [model] size");
    return suff_stats(model, g);
  }
  if (!cfg.synthetic_theta.empty()) {
    if (static_cast<int>(cfg.synthetic_theta.size()) != d) {
      throw ValidationError("[data] synthetic_theta length must equal model dimension");
    }
    Rng rng(cfg.synthetic_seed);
    const Vector theta = Eigen::Map<const Vector>(cfg.synthetic_theta.data(), d);
    return sample_stats(model, theta, cfg.synthetic_sweeps, rng);
  }
  throw ValidationError("[data] needs one of y, stats, edgelist, synthetic_theta");
}

Prior make_prior(const ExperimentConfig& cfg, int d) {
  if (cfg.prior_kind == "gamma") return Prior::gamma(d, cfg.prior_shape, cfg.prior_rate);
  if (cfg.prior_kind == "gaussian") return Prior::gaussian(d, cfg.prior_mean, cfg.prior_sd);
  if (cfg.prior_kind == "flat") return Prior::flat(d);
  auto expand = [d](const std::vector<double>& v, const char* what) {
    if (v.size() == 1) return Vector::Constant(d, v[0]).eval();
    if (static_cast<int>(v.size()) != d) throw ValidationError(std::string("[prior] ") + what + " needs 1 or d values");
    return Vector(Eigen::Map<const Vector>(v.data(), d));
  };
  if (cfg.prior_lower.empty() || cfg.prior_upper.empty()) throw ValidationError("[prior] uniform needs lower and upper");
  return Prior::uniform(expand(cfg.prior_lower, "lower"), expand(cfg.prior_upper, "upper"));
}

Vector default_mode_init(const ExperimentConfig& cfg, const Prior& prior) {
  const int d = prior.dims();
  if (!cfg.mode_init.empty()) {
    if (static_cast<int>(cfg.mode_init.size()) != d) throw ValidationError("[grid] mode_init needs d values");
    return Eigen::Map<const Vector>(cfg.mode_init.data(), d);
  }
  Vector init(d);
  for (int i = 0; i < d; ++i) {
    const auto& c = prior.coords()[static_cast<std::size_t>(i)];
    if (const auto* g = std::get_if<GammaPrior>(&c)) {
      init[i] = g->shape / g->rate;
    } else if (const auto* u = std::get_if<UniformPrior>(&c)) {
      init[i] = std::isfinite(u->lower) && std::isfinite(u->upper) ? 0.5 * (u->lower + u->upper) : 0.0;
    } else {
      init[i] = std::get<GaussianPrior>(c).mean;
    }
  }
  return init;
}

}  // namespace gridmh
