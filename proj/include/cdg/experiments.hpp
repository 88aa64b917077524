#pragma once

#include "cdg/learn.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cdg {

/// Flat key=value configuration. `model = builtin` and `network = line20`
/// select the built-in scenario; kappa scales only the built-in line.
struct ExperimentConfig {
  std::string model = "builtin";
  std::string network = "line20";
  double kappa = 1.0;
  Algorithm algo = Algorithm::Async;
  std::vector<double> gammas{0.0};
  double beta = 1.0;
  std::vector<std::int64_t> ns{200};
  int trials = 200;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool bound = false;    // error study: compute K and the finite-sample bound
  int rate_starts = 8;   // multistarts per crossover problem
  int threads = 0;       // 0 = hardware concurrency
};

ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig read_config(const std::string& path);
/// Throws Error on an empty grid, trials < 1 or out-of-range values.
void validate(const ExperimentConfig& cfg);
/// Canonical key=value rendering, one per line; parse_config inverts it.
std::string render_config(const ExperimentConfig& cfg);

struct ExperimentInputs {
  TreeModel model;
  CostMatrix costs;
};
ExperimentInputs load_inputs(const ExperimentConfig& cfg);

/// Learner run on exact marginals: the reference structure for error events.
LearnedTree ideal_tree(const TreeModel& model, const CostMatrix& costs, double gamma, double beta,
                       Algorithm algo);

/// Protocol cost of a tree under the mode its algorithm optimizes.
double protocol_cost(const EdgeList& tree, const CostMatrix& costs, CostMode mode);

struct TrialRecord {
  double gamma = 0.0;
  std::int64_t n = 0;
  int trial = 0;
  EdgeList edges;
  bool structure_error = false;
  bool map_error = false;
  double cost = 0.0;
};

struct StudyRow {
  double gamma = 0.0;
  std::int64_t n = 0;
  int trials = 0;
  int structure_errors = 0;
  int map_errors = 0;
  double mean_cost = 0.0;
  double ideal_cost = 0.0;
  double normalized_cost = 0.0;  // mean_cost / cost of the gamma = 0 ideal tree
  std::optional<double> exponent;  // error study with bound = true; nullopt = +inf
  std::optional<double> bound;
  double structure_error_rate() const { return static_cast<double>(structure_errors) / trials; }
  double map_error_rate() const { return static_cast<double>(map_errors) / trials; }
};

struct StudyResult {
  ExperimentConfig config;
  std::vector<StudyRow> rows;          // gamma-major, then n, in config order
  std::vector<TrialRecord> records;    // same order, trials innermost
  double reference_cost = 0.0;         // cost of the gamma = 0 ideal tree
};

StudyResult run_error_study(const ExperimentConfig& cfg);
StudyResult run_tradeoff_study(const ExperimentConfig& cfg);

void write_error_csv(std::ostream& out, const StudyResult& r);
void write_tradeoff_csv(std::ostream& out, const StudyResult& r);

}  // namespace cdg
