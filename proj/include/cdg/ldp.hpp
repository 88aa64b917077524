#pragma once

#include "cdg/common.hpp"
#include "cdg/learn.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace cdg {

/// w(Q) = I_{a,b}(Q) - offset, with a, b local indices into the endpoint set.
struct EdgeFunctional {
  int a = 0;
  int b = 1;
  double offset = 0.0;
};

/// Reference joint over the 3 or 4 endpoint variables of two candidate edges.
/// Cell index bit (k-1-p) holds the value of nodes[p].
struct CrossoverProblem {
  std::vector<int> nodes;     // global labels, sorted
  Eigen::VectorXd reference;  // P over X^k, k = nodes.size()
  EdgeFunctional e;           // the heavier edge under P
  EdgeFunctional e_prime;
};

/// Builds the problem for global edges e, e' with constant cost parts r_e, r_e'.
CrossoverProblem make_crossover_problem(const TreeModel& model, const Edge& e, double r_e,
                                        const Edge& e_prime, double r_e_prime);

/// g(Q) = w_e(Q) - w_e'(Q); the crossover constraint is g(Q) = 0.
double weight_gap(const CrossoverProblem& problem, const Eigen::VectorXd& q);

/// True when no joint can equalize the two weights: |r_e - r_e'| > ln 2,
/// since each binary mutual information lies in [0, ln 2].
bool crossover_empty(const CrossoverProblem& problem);

struct RateResult {
  bool infeasible = false;      // J = +infinity
  double rate = 0.0;            // meaningful only when !infeasible
  Eigen::VectorXd minimizer;    // empty when infeasible
  double residual = 0.0;        // |g(Q*)|
  int iterations = 0;           // total inner iterations over all starts
  int starts_converged = 0;
};

struct RateOptions {
  double tol = 1e-8;
  int starts = 32;  // reference joint plus starts-1 Dirichlet draws
  std::uint64_t seed = 0x5eed;
  int max_outer = 60;
  int max_inner = 400;
  bool inequality = false;  // minimize over g(Q) <= 0 instead of g(Q) = 0
};

/// No start reached the constraint; carries the best upper bound found.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double best_upper_bound)
      : Error(what), best_upper_bound_(best_upper_bound) {}
  double best_upper_bound() const { return best_upper_bound_; }

 private:
  double best_upper_bound_;
};

/// inf KL(Q || P) over {Q : w_e(Q) = w_e'(Q)} (or <= with options.inequality).
RateResult crossover_rate(const CrossoverProblem& problem, const RateOptions& options = {});

struct PairRate {
  Edge e;
  Edge e_prime;
  int step = 0;  // greedy step (sync); 0 for async
  double offset_e = 0.0;
  double offset_e_prime = 0.0;
  RateResult result;
};

struct ExponentReport {
  std::optional<double> exponent;  // nullopt means +infinity
  std::vector<PairRate> pairs;
  LearnedTree ideal;
  bool infinite() const { return !exponent.has_value(); }
};

/// min over non-tree pairs e' and edges e on the tree path between its endpoints.
ExponentReport error_exponent_async(const TreeModel& true_model, const CostMatrix& costs,
                                    double gamma, const RateOptions& options = {});

/// min over greedy steps t and competing cut edges at that step, weights fixed at T^t.
ExponentReport error_exponent_sync(const TreeModel& true_model, const CostMatrix& costs,
                                   double gamma, double beta = 1.0,
                                   const RateOptions& options = {});

/// log of the finite-sample bound; -inf when the prefactor vanishes (d = 2 async).
double log_finite_sample_bound(int d, std::int64_t n, double K, CostMode mode, int alphabet_size = 2);
double finite_sample_bound(int d, std::int64_t n, double K, CostMode mode, int alphabet_size = 2);
/// log binom(n - 1 + m, m - 1), the number of types over m cells with n samples.
double log_type_count(std::int64_t n, int cells);

struct ErrorPoint {
  std::int64_t n = 0;
  std::int64_t errors = 0;
  std::int64_t trials = 0;
};

struct DecayFit {
  bool defined = false;   // needs >= 3 points with nonzero error
  double slope = 0.0;     // of -log(error) against n
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;    // 95% t interval
  double ci_high = 0.0;
  int points = 0;
  /// When undefined: -log(3/trials)/n at the largest zero-error n, from the
  /// one-sided 95% bound on a zero count. 0 if there is no such point.
  double lower_bound = 0.0;
};

DecayFit empirical_decay_rate(const std::vector<ErrorPoint>& grid);

}  // namespace cdg
