#include "gptpinn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gptpinn/error.hpp"
#include "gptpinn/hash.hpp"

namespace gptpinn {

namespace {

namespace pt = boost::property_tree;
using nlohmann::json;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"pde", {"family", "domain", "t_final"}},
      {"collocation",
       {"interior", "boundary", "initial", "strategy", "seed", "filter",
        "filter_fraction", "reduced_interior", "reduced_boundary",
        "reduced_initial", "reduced_seed"}},
      {"full_pinn",
       {"dims", "activation", "lr", "epochs", "stop_loss", "phase2_epochs",
        "phase2_lr", "sa_enabled", "sa_lr", "sa_init", "seed"}},
      {"online", {"lr", "epochs", "optimizer"}},
      {"greedy",
       {"xi", "xi_list", "mu1", "n_max", "tol", "seed", "final_scan",
        "threads"}},
      {"eval",
       {"test_count", "grid", "seed", "bench_queries", "bench_full_queries",
        "bench_horizon", "svd_params", "svd_solution_source", "svd_epochs"}},
      {"output", {"directory"}},
  };
  return keys;
}

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

double to_double(const std::string& v, const std::string& at) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw Error("bad number for " + at + ": '" + v + "'");
  }
  if (used != v.size()) throw Error("bad number for " + at + ": '" + v + "'");
  return out;
}

long to_long(const std::string& v, const std::string& at) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    throw Error("bad integer for " + at + ": '" + v + "'");
  }
  if (used != v.size()) throw Error("bad integer for " + at + ": '" + v + "'");
  return out;
}

std::uint64_t to_seed(const std::string& v, const std::string& at) {
  const long s = to_long(v, at);
  if (s < 0) throw Error("seed must be >= 0 for " + at);
  return static_cast<std::uint64_t>(s);
}

bool to_bool(const std::string& v, const std::string& at) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("bad boolean for " + at + ": '" + v + "'");
}

json to_json(const std::string& v, const std::string& at) {
  try {
    return json::parse(v);
  } catch (const json::exception&) {
    throw Error("bad list for " + at + ": '" + v + "'");
  }
}

template <class T>
std::vector<T> to_list(const std::string& v, const std::string& at) {
  const json j = to_json(v, at);
  try {
    return j.get<std::vector<T>>();
  } catch (const json::exception&) {
    throw Error("bad list for " + at + ": '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::defaults(PdeFamily family) {
  RunConfig c;
  c.pde = PdeDefinition::standard(family);
  switch (family) {
    case PdeFamily::kKleinGordon:
      c.counts = {10000, 512, 512};
      c.full.dims = {2, 40, 40, 1};
      c.full.activation = Activation::kCos;
      c.full.lr = 5e-4;
      c.full.epochs = 75000;
      c.online = {0.025, 2000, OnlineOptimizer::kPlainGd};
      c.xi_counts = {10, 10, 10};
      c.n_max = 15;
      c.test_count = 200;
      break;
    case PdeFamily::kBurgers:
      c.counts = {10000, 100, 100};
      c.filter = FilterRule::kMaxFraction;
      c.full.dims = {2, 20, 20, 20, 20, 1};
      c.full.activation = Activation::kTanh;
      c.full.lr = 5e-3;
      c.full.epochs = 60000;
      c.full.stop_loss = 2e-5;
      c.online = {0.02, 2000, OnlineOptimizer::kPlainGd};
      c.xi_counts = {129};
      c.n_max = 9;
      c.test_count = 25;
      break;
    case PdeFamily::kAllenCahn:
      c.counts = {20000, 100, 512};
      c.strategy = SamplingStrategy::kLatinHypercube;
      c.full.dims = {2, 128, 128, 128, 128, 1};
      c.full.activation = Activation::kTanh;
      c.full.lr = 5e-3;
      c.full.epochs = 10000;
      c.full.phase2_epochs = 10000;
      c.full.phase2_lr = 5e-4;
      c.full.sa_enabled = true;
      c.online = {0.0025, 2000, OnlineOptimizer::kPlainGd};
      c.xi_counts = {11, 11};
      c.n_max = 9;
      c.test_count = 25;
      break;
  }
  return c;
}

CollocationSet RunConfig::collocation() const {
  return sample_collocation(pde, counts, strategy, colloc_seed);
}

std::optional<CollocationSet> RunConfig::reduced_collocation() const {
  if (!reduced_counts) return std::nullopt;
  return sample_collocation(pde, *reduced_counts, strategy, reduced_seed);
}

std::vector<ParameterPoint> RunConfig::training_set() const {
  if (!xi_list.empty()) return xi_list;
  return pde.domain().tensor_grid(xi_counts);
}

GreedyConfig RunConfig::greedy_config() const {
  GreedyConfig g;
  g.xi = training_set();
  g.mu1 = mu1;
  g.n_max = n_max;
  g.tol = tol;
  g.full = full;
  g.online = online;
  g.seed = greedy_seed;
  g.colloc = collocation();
  g.reduced = reduced_collocation();
  g.filter = filter;
  g.filter_fraction = filter_fraction;
  g.final_scan = final_scan;
  g.threads = threads;
  return g;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "pde.family=" << to_string(pde.family()) << '\n';
  os << "pde.domain=";
  for (const auto& b : pde.domain().bounds()) os << fmt(b.lo) << ':' << fmt(b.hi) << ';';
  os << "\npde.t_final=" << fmt(pde.t_final()) << '\n';
  os << "collocation.counts=" << counts.interior << ',' << counts.boundary << ','
     << counts.initial << '\n';
  os << "collocation.strategy=" << to_string(strategy) << '\n';
  os << "collocation.seed=" << colloc_seed << '\n';
  os << "collocation.filter=" << to_string(filter) << ':' << fmt(filter_fraction) << '\n';
  os << "collocation.reduced=";
  if (reduced_counts) {
    os << reduced_counts->interior << ',' << reduced_counts->boundary << ','
       << reduced_counts->initial << '@' << reduced_seed;
  } else {
    os << "none";
  }
  os << "\nfull_pinn.dims=";
  for (int d : full.dims) os << d << ',';
  os << "\nfull_pinn.activation=" << to_string(full.activation) << '\n';
  os << "full_pinn.lr=" << fmt(full.lr) << '\n';
  os << "full_pinn.epochs=" << full.epochs << '\n';
  os << "full_pinn.stop_loss=" << (full.stop_loss ? fmt(*full.stop_loss) : "none") << '\n';
  os << "full_pinn.phase2=" << full.phase2_epochs << '@' << fmt(full.phase2_lr) << '\n';
  os << "full_pinn.sa=" << full.sa_enabled << ':' << fmt(full.sa_lr) << ':'
     << fmt(full.sa_init) << '\n';
  os << "full_pinn.seed=" << full_seed << '\n';
  os << "online=" << fmt(online.lr) << ':' << online.epochs << ':'
     << to_string(online.optimizer) << '\n';
  os << "greedy.xi=";
  for (const auto& mu : training_set()) os << format_parameter(mu) << ';';
  os << "\ngreedy.mu1=" << (mu1 ? format_parameter(*mu1) : "random") << '\n';
  os << "greedy.n_max=" << n_max << '\n';
  os << "greedy.tol=" << (tol ? fmt(*tol) : "none") << '\n';
  os << "greedy.seed=" << greedy_seed << '\n';
  os << "greedy.final_scan=" << final_scan << '\n';
  os << "eval=" << test_count << ':' << grid.nx << 'x' << grid.nt << ':'
     << eval_seed << ':' << bench_queries << ':' << bench_full_queries << ':'
     << bench_horizon << ':' << svd_params << ':' << to_string(svd_source) << ':'
     << (svd_epochs ? std::to_string(*svd_epochs) : "full") << '\n';
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

std::vector<std::string> RunConfig::deviations() const {
  std::vector<std::string> out;
  if (full.phase2_epochs > 0) {
    out.push_back("lbfgs_replaced_by_adam_phase2");
  }
  if (full.sa_enabled) out.push_back("sa_mask_one_plus_square");
  if (final_scan) out.push_back("final_round_scan");
  if (online.optimizer == OnlineOptimizer::kAdam) out.push_back("online_adam");
  if (filter == FilterRule::kQuantile) out.push_back("filter_quantile");
  return out;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("config: ") + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw Error("unknown config section [" + section + "]");
    }
    if (!body.data().empty()) {
      throw Error("config key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw Error("unknown config key " + where(section, key));
      }
    }
  }
  auto get = [&](const std::string& section,
                 const std::string& key) -> std::optional<std::string> {
    const auto s = tree.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  };

  const auto family = get("pde", "family");
  if (!family) throw Error("config needs [pde] family");
  RunConfig c = RunConfig::defaults(pde_family_from_string(*family));

  {
    ParameterDomain domain = c.pde.domain();
    double tf = c.pde.t_final();
    if (auto v = get("pde", "domain")) {
      const auto rows = to_list<std::vector<double>>(*v, where("pde", "domain"));
      std::vector<Interval> bounds;
      for (const auto& r : rows) {
        if (r.size() != 2) throw Error("bad list for [pde] domain");
        bounds.push_back({r[0], r[1]});
      }
      domain = ParameterDomain(std::move(bounds));
    }
    if (auto v = get("pde", "t_final")) tf = to_double(*v, where("pde", "t_final"));
    c.pde = PdeDefinition(c.pde.family(), domain, tf);
  }

  const std::string co = "collocation";
  if (auto v = get(co, "interior")) c.counts.interior = static_cast<int>(to_long(*v, where(co, "interior")));
  if (auto v = get(co, "boundary")) c.counts.boundary = static_cast<int>(to_long(*v, where(co, "boundary")));
  if (auto v = get(co, "initial")) c.counts.initial = static_cast<int>(to_long(*v, where(co, "initial")));
  if (auto v = get(co, "strategy")) c.strategy = sampling_strategy_from_string(*v);
  if (auto v = get(co, "seed")) c.colloc_seed = to_seed(*v, where(co, "seed"));
  if (auto v = get(co, "filter")) c.filter = filter_rule_from_string(*v);
  if (auto v = get(co, "filter_fraction")) c.filter_fraction = to_double(*v, where(co, "filter_fraction"));
  {
    auto ri = get(co, "reduced_interior");
    auto rb = get(co, "reduced_boundary");
    auto rn = get(co, "reduced_initial");
    if (ri || rb || rn) {
      if (!(ri && rb && rn)) {
        throw Error("reduced collocation needs interior, boundary and initial counts");
      }
      c.reduced_counts = CollocationCounts{
          static_cast<int>(to_long(*ri, where(co, "reduced_interior"))),
          static_cast<int>(to_long(*rb, where(co, "reduced_boundary"))),
          static_cast<int>(to_long(*rn, where(co, "reduced_initial")))};
    }
    if (auto v = get(co, "reduced_seed")) c.reduced_seed = to_seed(*v, where(co, "reduced_seed"));
  }

  const std::string fp = "full_pinn";
  if (auto v = get(fp, "dims")) c.full.dims = to_list<int>(*v, where(fp, "dims"));
  if (auto v = get(fp, "activation")) c.full.activation = activation_from_string(*v);
  if (auto v = get(fp, "lr")) c.full.lr = to_double(*v, where(fp, "lr"));
  if (auto v = get(fp, "epochs")) c.full.epochs = to_long(*v, where(fp, "epochs"));
  if (auto v = get(fp, "stop_loss")) {
    if (*v == "none") {
      c.full.stop_loss.reset();
    } else {
      c.full.stop_loss = to_double(*v, where(fp, "stop_loss"));
    }
  }
  if (auto v = get(fp, "phase2_epochs")) c.full.phase2_epochs = to_long(*v, where(fp, "phase2_epochs"));
  if (auto v = get(fp, "phase2_lr")) c.full.phase2_lr = to_double(*v, where(fp, "phase2_lr"));
  if (auto v = get(fp, "sa_enabled")) c.full.sa_enabled = to_bool(*v, where(fp, "sa_enabled"));
  if (auto v = get(fp, "sa_lr")) c.full.sa_lr = to_double(*v, where(fp, "sa_lr"));
  if (auto v = get(fp, "sa_init")) c.full.sa_init = to_double(*v, where(fp, "sa_init"));
  if (auto v = get(fp, "seed")) c.full_seed = to_seed(*v, where(fp, "seed"));

  if (auto v = get("online", "lr")) c.online.lr = to_double(*v, where("online", "lr"));
  if (auto v = get("online", "epochs")) c.online.epochs = to_long(*v, where("online", "epochs"));
  if (auto v = get("online", "optimizer")) c.online.optimizer = online_optimizer_from_string(*v);

  const std::string gr = "greedy";
  const auto xi = get(gr, "xi");
  const auto xi_list = get(gr, "xi_list");
  if (xi && xi_list) throw Error("config sets both [greedy] xi and xi_list");
  if (xi) c.xi_counts = to_list<int>(*xi, where(gr, "xi"));
  if (xi_list) {
    c.xi_list.clear();
    for (const auto& row : to_list<std::vector<double>>(*xi_list, where(gr, "xi_list"))) {
      c.xi_list.push_back(ParameterPoint{row});
    }
  }
  if (auto v = get(gr, "mu1")) c.mu1 = parse_parameter(*v);
  if (auto v = get(gr, "n_max")) c.n_max = static_cast<int>(to_long(*v, where(gr, "n_max")));
  if (auto v = get(gr, "tol")) {
    if (*v == "none") {
      c.tol.reset();
    } else {
      c.tol = to_double(*v, where(gr, "tol"));
    }
  }
  if (auto v = get(gr, "seed")) c.greedy_seed = to_seed(*v, where(gr, "seed"));
  if (auto v = get(gr, "final_scan")) c.final_scan = to_bool(*v, where(gr, "final_scan"));
  if (auto v = get(gr, "threads")) c.threads = static_cast<int>(to_long(*v, where(gr, "threads")));

  const std::string ev = "eval";
  if (auto v = get(ev, "test_count")) c.test_count = static_cast<int>(to_long(*v, where(ev, "test_count")));
  if (auto v = get(ev, "grid")) {
    const auto g = to_list<int>(*v, where(ev, "grid"));
    if (g.size() != 2) throw Error("bad list for [eval] grid");
    c.grid = {g[0], g[1]};
  }
  if (auto v = get(ev, "seed")) c.eval_seed = to_seed(*v, where(ev, "seed"));
  if (auto v = get(ev, "bench_queries")) c.bench_queries = static_cast<int>(to_long(*v, where(ev, "bench_queries")));
  if (auto v = get(ev, "bench_full_queries")) c.bench_full_queries = static_cast<int>(to_long(*v, where(ev, "bench_full_queries")));
  if (auto v = get(ev, "bench_horizon")) c.bench_horizon = to_long(*v, where(ev, "bench_horizon"));
  if (auto v = get(ev, "svd_params")) c.svd_params = static_cast<int>(to_long(*v, where(ev, "svd_params")));
  if (auto v = get(ev, "svd_solution_source")) c.svd_source = snapshot_source_from_string(*v);
  if (auto v = get(ev, "svd_epochs")) c.svd_epochs = to_long(*v, where(ev, "svd_epochs"));

  if (auto v = get("output", "directory")) c.output_dir = *v;

  c.full.validate();
  c.online.validate();
  if (c.n_max < 1) throw Error("[greedy] n_max must be >= 1");
  if (c.threads < 1) throw Error("[greedy] threads must be >= 1");
  if (c.xi_list.empty() && c.xi_counts.size() != c.pde.domain().dim()) {
    throw Error("[greedy] xi needs one count per parameter component");
  }
  for (const auto& mu : c.xi_list) {
    if (mu.dim() != c.pde.domain().dim()) throw Error("[greedy] xi_list entry has the wrong dimension");
  }
  if (c.mu1 && !c.pde.domain().contains(*c.mu1)) throw Error("parameter outside domain");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gptpinn
