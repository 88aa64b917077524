// Command-line front end: learn, infer, rate, hardness, experiment, sample, scenario.
#include "cdg/experiments.hpp"
#include "cdg/hardness.hpp"
#include "cdg/inference.hpp"
#include "cdg/io.hpp"
#include "cdg/ldp.hpp"
#include "cdg/learn.hpp"
#include "cdg/scenario.hpp"
#include "cdg/tree.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using json = nlohmann::ordered_json;
using namespace cdg;

namespace {

json edge_json(const Edge& e) { return json::array({e.u + 1, e.v + 1}); }

json edges_json(const EdgeList& edges) {
  json a = json::array();
  for (const Edge& e : edges) a.push_back(edge_json(e));
  return a;
}

// "line20"-style names select a built-in line of that many nodes; anything
// else is a network file. kappa scales file networks too.
PhysicalNetwork load_network(const std::string& name, double kappa) {
  if (name.rfind("line", 0) == 0 && name.size() > 4 &&
      name.find_first_not_of("0123456789", 4) == std::string::npos)
    return line_network(std::stoi(name.substr(4)), kappa);
  PhysicalNetwork net = read_network(name);
  return kappa == 1.0 ? net : net.scaled(kappa);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  return f;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

struct LearnArgs {
  std::string algo, samples, network, out;
  double gamma = 0.0, beta = 1.0, kappa = 1.0;
};

void cmd_learn(const LearnArgs& a) {
  const Algorithm algo = parse_algorithm(a.algo);
  const SampleSet samples = read_samples(a.samples);
  const PhysicalNetwork net = load_network(a.network, a.kappa);
  if (net.d() != samples.d())
    throw Error("network has " + std::to_string(net.d()) + " nodes, samples have " +
                std::to_string(samples.d()));
  const CostMatrix costs = all_pairs_costs(net);
  const PairwiseStats stats(samples);
  const WeightedCandidateGraph graph(stats, costs);
  LearnedTree t;
  switch (algo) {
    case Algorithm::Async: t = async_learn(graph, a.gamma); break;
    case Algorithm::Sync: t = sync_learn(graph, a.gamma, a.beta); break;
    case Algorithm::BruteAsync: t = brute_force_async_opt(graph, a.gamma); break;
    case Algorithm::BruteSync: t = brute_force_sync_opt(graph, a.gamma); break;
  }
  json meta;
  meta["algorithm"] = to_string(algo);
  meta["gamma"] = a.gamma;
  meta["beta"] = algo == Algorithm::Sync ? json(a.beta) : json(nullptr);
  meta["d"] = samples.d();
  meta["n"] = samples.n();
  meta["diameter"] = t.diameter;
  meta["objective"] = objective_value(t.edges, graph, a.gamma, cost_mode(algo));
  auto f = open_out(a.out);
  write_tree(f, t.edges, meta.dump());
}

struct InferArgs {
  std::string protocol, model, tree, network;
  double kappa = 1.0;
};

void cmd_infer(const InferArgs& a) {
  const Protocol p = parse_protocol(a.protocol);
  const TreeModel model = read_model(a.model);
  const TreeFile tree = read_tree(a.tree);
  const PhysicalNetwork net = load_network(a.network, a.kappa);
  if (tree.d != model.d() || net.d() != model.d())
    throw Error("model, tree and network must have the same number of nodes");
  const CostMatrix costs = all_pairs_costs(net);
  const Potentials pot = make_potentials(exact_pairwise_marginals(model), tree.edges);
  const InferenceResult r = p == Protocol::Async ? max_product_async(pot, costs) : max_product_sync(pot, costs);
  std::string bits;
  for (auto v : r.assignment) bits += v ? '1' : '0';
  json j;
  j["protocol"] = to_string(p);
  j["assignment"] = bits;
  j["messages_sent"] = r.messages_sent;
  j["total_cost"] = r.total_cost;
  j["iterations"] = r.iterations;
  print(j);
}

struct RateArgs {
  std::string mode, model, network;
  double gamma = 0.0, beta = 1.0, tol = 1e-8, kappa = 1.0;
  int starts = 32;
  std::uint64_t seed = 0x5eed;
};

void cmd_rate(const RateArgs& a) {
  const CostMode mode = parse_cost_mode(a.mode);
  const TreeModel model = read_model(a.model);
  const PhysicalNetwork net = load_network(a.network, a.kappa);
  if (net.d() != model.d()) throw Error("model and network sizes differ");
  const CostMatrix costs = all_pairs_costs(net);
  RateOptions opt;
  opt.tol = a.tol;
  opt.starts = a.starts;
  opt.seed = a.seed;
  const ExponentReport rep = mode == CostMode::Async ? error_exponent_async(model, costs, a.gamma, opt)
                                                     : error_exponent_sync(model, costs, a.gamma, a.beta, opt);
  json j;
  j["mode"] = to_string(mode);
  j["gamma"] = a.gamma;
  j["beta"] = mode == CostMode::Sync ? json(a.beta) : json(nullptr);
  j["K"] = rep.exponent ? json(*rep.exponent) : json("inf");
  j["ideal_tree"] = edges_json(rep.ideal.edges);
  json pairs = json::array();
  for (const PairRate& pr : rep.pairs) {
    json q;
    q["e"] = edge_json(pr.e);
    q["e_prime"] = edge_json(pr.e_prime);
    if (mode == CostMode::Sync) q["step"] = pr.step;
    q["offset_e"] = pr.offset_e;
    q["offset_e_prime"] = pr.offset_e_prime;
    if (pr.result.infeasible) {
      q["J"] = "inf";
    } else {
      q["J"] = pr.result.rate;
      q["residual"] = pr.result.residual;
      q["minimizer"] = std::vector<double>(pr.result.minimizer.begin(), pr.result.minimizer.end());
    }
    pairs.push_back(q);
  }
  j["pairs"] = pairs;
  print(j);
}

void cmd_hardness(int s, const std::string& subsets_path, bool table) {
  const X3CInstance inst{s, read_subsets(subsets_path)};
  const GadgetInstance g = build_gadget(inst);
  const ValueOrdering ord = check_value_ordering(g);
  json j;
  j["s"] = g.s;
  j["q"] = g.q;
  j["d"] = g.d;
  j["delta"] = g.delta;
  j["kappa"] = g.kappa;
  j["alpha1"] = g.alpha1;
  j["alpha2"] = g.alpha2;
  j["I"] = std::vector<double>(g.path_mi.begin(), g.path_mi.end());
  j["triangle_violation"] = triangle_violation(g.cost);
  j["value_ordering"] = {{"holds", ord.holds}, {"detail", ord.detail}};
  j["x3c_solvable"] = x3c_brute_force(inst);
  if (table) {
    json rows = json::array();
    for (int a = 0; a < g.d; ++a)
      for (int b = a + 1; b < g.d; ++b)
        rows.push_back({{"pair", {g.label(a), g.label(b)}},
                        {"type", "T" + std::to_string(g.type(a, b))},
                        {"mi", g.mi(a, b)},
                        {"cost", g.cost(a, b)}});
    j["table"] = rows;
  }
  if (g.d <= kMaxLemmaNodes) {
    const LemmaVerdict v = verify_lemma1(inst);
    json opt = json::array();
    for (const Edge& e : v.opt_tree) opt.push_back({g.label(e.u), g.label(e.v)});
    j["verdict"] = {{"opt_diameter", v.opt_diameter},
                    {"opt_objective", v.opt_objective},
                    {"formula_objective", v.formula_objective},
                    {"cover_tree_objective", v.cover_tree_objective ? json(*v.cover_tree_objective) : json(nullptr)},
                    {"diameter4_and_formula", v.diameter4_and_formula},
                    {"lemma_holds", v.lemma_holds},
                    {"opt_tree", opt}};
  } else {
    j["verdict"] = "skipped: d = " + std::to_string(g.d) + " exceeds the brute-force limit of " +
                   std::to_string(kMaxLemmaNodes);
  }
  print(j);
}

void cmd_experiment(const std::string& kind, const std::string& config, const std::string& out_dir,
                    int threads) {
  ExperimentConfig cfg = read_config(config);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads >= 0) cfg.threads = threads;
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / (kind + ".csv")).string();
  const StudyResult r = kind == "error" ? run_error_study(cfg) : run_tradeoff_study(cfg);
  auto f = open_out(path);
  if (kind == "error")
    write_error_csv(f, r);
  else
    write_tradeoff_csv(f, r);
  std::cout << path << '\n';
}

void cmd_sample(const std::string& model_path, std::int64_t n, std::uint64_t seed, const std::string& out) {
  const TreeModel m = read_model(model_path);
  auto f = open_out(out);
  write_samples(f, sample(m, n, seed));
}

void cmd_scenario(double kappa, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const Scenario s = builtin_scenario(kappa);
  const std::filesystem::path p(dir);
  auto m = open_out((p / "model.txt").string());
  write_model(m, s.model);
  auto n = open_out((p / "network.txt").string());
  write_network(n, s.network);
  auto t = open_out((p / "tree.txt").string());
  write_tree(t, scenario_tree_edges(), R"({"source":"builtin data tree"})");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware tree structure learning and distributed MAP inference"};
  app.require_subcommand(1);

  LearnArgs la;
  auto* learn = app.add_subcommand("learn", "learn a tree from samples");
  learn->add_option("--algo", la.algo, "async | sync | brute-async | brute-sync")->required()
      ->check(CLI::IsMember({"async", "sync", "brute-async", "brute-sync"}));
  learn->add_option("--gamma", la.gamma, "cost trade-off weight")->required()->check(CLI::NonNegativeNumber);
  learn->add_option("--beta", la.beta, "round-count weight (sync)")->check(CLI::NonNegativeNumber);
  learn->add_option("--samples", la.samples, "CSV of 0/1 samples")->required();
  learn->add_option("--network", la.network, "network file or lineN")->required();
  learn->add_option("--out", la.out, "output tree file")->required();
  learn->add_option("--kappa", la.kappa, "link cost scale")->check(CLI::PositiveNumber);

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "run max-product on a tree");
  infer->add_option("--protocol", ia.protocol)->required()->check(CLI::IsMember({"async", "sync"}));
  infer->add_option("--model", ia.model)->required();
  infer->add_option("--tree", ia.tree)->required();
  infer->add_option("--network", ia.network)->required();
  infer->add_option("--kappa", ia.kappa)->check(CLI::PositiveNumber);

  RateArgs ra;
  auto* rate = app.add_subcommand("rate", "error exponent of a learner");
  rate->add_option("--mode", ra.mode)->required()->check(CLI::IsMember({"async", "sync"}));
  rate->add_option("--model", ra.model)->required();
  rate->add_option("--network", ra.network)->required();
  rate->add_option("--gamma", ra.gamma)->required()->check(CLI::NonNegativeNumber);
  rate->add_option("--beta", ra.beta)->check(CLI::NonNegativeNumber);
  rate->add_option("--tol", ra.tol)->check(CLI::PositiveNumber);
  rate->add_option("--starts", ra.starts, "solver multistarts")->check(CLI::PositiveNumber);
  rate->add_option("--seed", ra.seed);
  rate->add_option("--kappa", ra.kappa)->check(CLI::PositiveNumber);

  int hs = 0;
  std::string subsets;
  bool table = false;
  auto* hard = app.add_subcommand("hardness", "build and check the X3C gadget");
  hard->add_option("--s", hs, "universe is {1..3s}")->required()->check(CLI::PositiveNumber);
  hard->add_option("--subsets", subsets, "one triple per line")->required();
  hard->add_flag("--table", table, "include the per-pair table");

  std::string kind, config, out_dir;
  int threads = -1;
  auto* exp = app.add_subcommand("experiment", "run an error or trade-off study");
  exp->add_option("kind", kind)->required()->check(CLI::IsMember({"error", "tradeoff"}));
  exp->add_option("--config", config)->required();
  exp->add_option("--out", out_dir, "output directory (overrides the config)");
  exp->add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

  std::string smodel, sout;
  std::int64_t sn = 0;
  std::uint64_t sseed = 1;
  auto* samp = app.add_subcommand("sample", "draw samples from a model");
  samp->add_option("--model", smodel)->required();
  samp->add_option("--n", sn)->required()->check(CLI::PositiveNumber);
  samp->add_option("--seed", sseed);
  samp->add_option("--out", sout)->required();

  double skappa = 1.0;
  std::string sdir = ".";
  auto* scen = app.add_subcommand("scenario", "write the built-in model, network and data tree");
  scen->add_option("--kappa", skappa)->check(CLI::PositiveNumber);
  scen->add_option("--out", sdir, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*learn) cmd_learn(la);
    else if (*infer) cmd_infer(ia);
    else if (*rate) cmd_rate(ra);
    else if (*hard) cmd_hardness(hs, subsets, table);
    else if (*exp) cmd_experiment(kind, config, out_dir, threads);
    else if (*samp) cmd_sample(smodel, sn, sseed, sout);
    else if (*scen) cmd_scenario(skappa, sdir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
