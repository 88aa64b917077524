#include "cdg/experiments.hpp"

#include "cdg/inference.hpp"
#include "cdg/io.hpp"
#include "cdg/ldp.hpp"
#include "cdg/scenario.hpp"
#include "cdg/tree.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace cdg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text, const std::string& where) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  std::string rest;
  if (!ss || (ss >> rest)) throw Error(where + ": bad value for " + key + ": '" + text + "'");
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, std::string text, const std::string& where) {
  for (char& c : text)
    if (c == ',') c = ' ';
  std::istringstream ss(text);
  std::vector<T> out;
  for (std::string tok; ss >> tok;) out.push_back(parse_number<T>(key, tok, where));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += fmt(v[k]);
  }
  return s;
}

// Runs job(0..count-1) on a fixed pool; each job writes only its own slot.
void run_jobs(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; !failed && (k = next++) < count;) {
        try {
          job(k);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

LearnedTree learn_from(const PairwiseStats& stats, const CostMatrix& costs, double gamma,
                       double beta, Algorithm algo) {
  switch (algo) {
    case Algorithm::Async: return async_learn(stats, costs, gamma);
    case Algorithm::Sync: return sync_learn(stats, costs, gamma, beta);
    case Algorithm::BruteAsync:
      return brute_force_async_opt(WeightedCandidateGraph(stats, costs), gamma);
    case Algorithm::BruteSync: return brute_force_sync_opt(stats, costs, gamma);
  }
  throw Error("unknown algorithm");
}

struct Study {
  ExperimentConfig cfg;
  ExperimentInputs in;
  CostMode mode;
  Assignment true_map;
  std::vector<LearnedTree> ideals;  // per gamma
  StudyResult result;
};

Study prepare(const ExperimentConfig& cfg) {
  validate(cfg);
  Study s{cfg, load_inputs(cfg), cost_mode(cfg.algo), {}, {}, {}};
  const PairwiseMarginals exact = exact_pairwise_marginals(s.in.model);
  s.true_map = map_estimate(exact, s.in.model.edges());
  for (double g : cfg.gammas) s.ideals.push_back(ideal_tree(s.in.model, s.in.costs, g, cfg.beta, cfg.algo));
  s.result.config = cfg;
  s.result.reference_cost =
      protocol_cost(ideal_tree(s.in.model, s.in.costs, 0.0, cfg.beta, cfg.algo).edges, s.in.costs, s.mode);
  return s;
}

void run_trials(Study& s) {
  const auto& cfg = s.cfg;
  const std::size_t G = cfg.gammas.size(), N = cfg.ns.size(), T = static_cast<std::size_t>(cfg.trials);
  s.result.records.assign(G * N * T, {});
  run_jobs(G * N * T, cfg.threads, [&](std::size_t k) {
    const std::size_t gi = k / (N * T), ni = (k / T) % N, t = k % T;
    const double gamma = cfg.gammas[gi];
    const std::int64_t n = cfg.ns[ni];
    const SampleSet samples = sample(s.in.model, n, derive_seed(cfg.seed, gi, ni, t));
    const PairwiseStats stats(samples);
    const LearnedTree learned = learn_from(stats, s.in.costs, gamma, cfg.beta, cfg.algo);
    TrialRecord& r = s.result.records[k];
    r.gamma = gamma;
    r.n = n;
    r.trial = static_cast<int>(t);
    r.edges = learned.edges;
    r.structure_error = learned.edges != s.ideals[gi].edges;
    r.map_error = map_estimate(empirical_marginals(stats), learned.edges) != s.true_map;
    r.cost = protocol_cost(learned.edges, s.in.costs, s.mode);
  });
  for (std::size_t gi = 0; gi < G; ++gi)
    for (std::size_t ni = 0; ni < N; ++ni) {
      StudyRow row;
      row.gamma = cfg.gammas[gi];
      row.n = cfg.ns[ni];
      row.trials = cfg.trials;
      ExactSum cost;
      for (std::size_t t = 0; t < T; ++t) {
        const TrialRecord& r = s.result.records[(gi * N + ni) * T + t];
        row.structure_errors += r.structure_error;
        row.map_errors += r.map_error;
        cost.add(r.cost);
      }
      row.mean_cost = cost.value() / cfg.trials;
      row.ideal_cost = protocol_cost(s.ideals[gi].edges, s.in.costs, s.mode);
      row.normalized_cost = row.mean_cost / s.result.reference_cost;
      s.result.rows.push_back(row);
    }
}

std::string opt_field(const std::optional<double>& v, const char* missing) {
  return v ? format_double(*v) : std::string(missing);
}

void write_header(std::ostream& out, const StudyResult& r, const char* kind) {
  out << "# " << kind << " study\n";
  std::istringstream lines(render_config(r.config));
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << "# reference_cost = " << format_double(r.reference_cost) << '\n';
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  int lineno = 0;
  std::map<std::string, int> seen;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (seen[key]++) throw Error(where + ": duplicate key " + key);
    if (key == "model") cfg.model = value;
    else if (key == "network") cfg.network = value;
    else if (key == "kappa") cfg.kappa = parse_number<double>(key, value, where);
    else if (key == "algo") {
      try {
        cfg.algo = parse_algorithm(value);
      } catch (const Error& e) {
        throw Error(where + ": " + e.what());
      }
    } else if (key == "gammas") cfg.gammas = parse_list<double>(key, value, where);
    else if (key == "beta") cfg.beta = parse_number<double>(key, value, where);
    else if (key == "ns") cfg.ns = parse_list<std::int64_t>(key, value, where);
    else if (key == "trials") cfg.trials = parse_number<int>(key, value, where);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value, where);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "bound") {
      if (value != "true" && value != "false") throw Error(where + ": bound must be true or false");
      cfg.bound = value == "true";
    } else if (key == "rate_starts") cfg.rate_starts = parse_number<int>(key, value, where);
    else if (key == "threads") cfg.threads = parse_number<int>(key, value, where);
    else throw Error(where + ": unknown key " + key);
  }
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return parse_config(f, path);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.gammas.empty()) throw Error("gammas must be non-empty");
  if (cfg.ns.empty()) throw Error("ns must be non-empty");
  if (cfg.trials < 1) throw Error("trials must be at least 1");
  for (double g : cfg.gammas)
    if (!(g >= 0.0) || !std::isfinite(g)) throw Error("gammas must be finite and >= 0");
  for (auto n : cfg.ns)
    if (n < 1) throw Error("ns must be >= 1");
  if (!(cfg.kappa > 0.0) || !std::isfinite(cfg.kappa)) throw Error("kappa must be positive");
  if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta)) throw Error("beta must be finite and >= 0");
  if (cfg.rate_starts < 1) throw Error("rate_starts must be at least 1");
  if (cfg.threads < 0) throw Error("threads must be >= 0");
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << "model = " << cfg.model << '\n'
    << "network = " << cfg.network << '\n'
    << "kappa = " << format_double(cfg.kappa) << '\n'
    << "algo = " << to_string(cfg.algo) << '\n'
    << "gammas = " << join(cfg.gammas, format_double) << '\n'
    << "beta = " << format_double(cfg.beta) << '\n'
    << "ns = " << join(cfg.ns, [](std::int64_t n) { return std::to_string(n); }) << '\n'
    << "trials = " << cfg.trials << '\n'
    << "seed = " << cfg.seed << '\n'
    << "out = " << cfg.out_dir << '\n'
    << "bound = " << (cfg.bound ? "true" : "false") << '\n'
    << "rate_starts = " << cfg.rate_starts << '\n';
  // threads is omitted: it never changes results.
  return o.str();
}

ExperimentInputs load_inputs(const ExperimentConfig& cfg) {
  TreeModel model = cfg.model == "builtin" ? scenario_model() : read_model(cfg.model);
  PhysicalNetwork net = cfg.network == "line20" ? line_network(kScenarioNodes, cfg.kappa)
                                                : read_network(cfg.network);
  if (net.d() != model.d())
    throw Error("network has " + std::to_string(net.d()) + " nodes but model has " +
                std::to_string(model.d()));
  return {std::move(model), all_pairs_costs(net)};
}

LearnedTree ideal_tree(const TreeModel& model, const CostMatrix& costs, double gamma, double beta,
                       Algorithm algo) {
  const WeightedCandidateGraph g(exact_pairwise_marginals(model), costs);
  switch (algo) {
    case Algorithm::Async: return async_learn(g, gamma);
    case Algorithm::Sync: return sync_learn(g, gamma, beta);
    case Algorithm::BruteAsync: return brute_force_async_opt(g, gamma);
    case Algorithm::BruteSync: return brute_force_sync_opt(g, gamma);
  }
  throw Error("unknown algorithm");
}

double protocol_cost(const EdgeList& tree, const CostMatrix& costs, CostMode mode) {
  return mode == CostMode::Async ? async_protocol_cost(tree, costs) : sync_protocol_cost(tree, costs);
}

StudyResult run_error_study(const ExperimentConfig& cfg) {
  Study s = prepare(cfg);
  run_trials(s);
  if (cfg.bound) {
    RateOptions opt;
    opt.starts = cfg.rate_starts;
    opt.seed = derive_seed(cfg.seed, 0x7a7e);
    const std::size_t N = cfg.ns.size();
    for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
      const double g = cfg.gammas[gi];
      const ExponentReport rep = s.mode == CostMode::Async
                                     ? error_exponent_async(s.in.model, s.in.costs, g, opt)
                                     : error_exponent_sync(s.in.model, s.in.costs, g, cfg.beta, opt);
      for (std::size_t ni = 0; ni < N; ++ni) {
        StudyRow& row = s.result.rows[gi * N + ni];
        row.exponent = rep.exponent;
        row.bound = rep.exponent
                        ? finite_sample_bound(s.in.model.d(), row.n, *rep.exponent, s.mode)
                        : 0.0;
      }
    }
  }
  return std::move(s.result);
}

StudyResult run_tradeoff_study(const ExperimentConfig& cfg) {
  Study s = prepare(cfg);
  run_trials(s);
  return std::move(s.result);
}

void write_error_csv(std::ostream& out, const StudyResult& r) {
  write_header(out, r, "error");
  out << "gamma,n,trials,structure_error_rate,map_error_rate,mean_cost,ideal_cost,exponent,bound\n";
  for (const StudyRow& row : r.rows)
    out << format_double(row.gamma) << ',' << row.n << ',' << row.trials << ','
        << format_double(row.structure_error_rate()) << ',' << format_double(row.map_error_rate())
        << ',' << format_double(row.mean_cost) << ',' << format_double(row.ideal_cost) << ','
        << (r.config.bound ? opt_field(row.exponent, "inf") : "nan") << ','
        << (r.config.bound ? opt_field(row.bound, "nan") : "nan") << '\n';
}

void write_tradeoff_csv(std::ostream& out, const StudyResult& r) {
  write_header(out, r, "tradeoff");
  out << "gamma,n,trials,map_error_rate,mean_cost,normalized_cost,structure_error_rate,ideal_cost\n";
  for (const StudyRow& row : r.rows)
    out << format_double(row.gamma) << ',' << row.n << ',' << row.trials << ','
        << format_double(row.map_error_rate()) << ',' << format_double(row.mean_cost) << ','
        << format_double(row.normalized_cost) << ',' << format_double(row.structure_error_rate())
        << ',' << format_double(row.ideal_cost) << '\n';
}

}  // namespace cdg
