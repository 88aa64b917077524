#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cdg/ldp.hpp"
#include "cdg/scenario.hpp"
#include "ldp_oracle.hpp"
#include "support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

using namespace cdg;
using namespace cdg::testing;

namespace {

double pair_mi_of(const CrossoverProblem& p, const EdgeFunctional& f) {
  const int k = static_cast<int>(p.nodes.size());
  Joint2 j = Joint2::Zero();
  for (int x = 0; x < (1 << k); ++x) j((x >> (k - 1 - f.a)) & 1, (x >> (k - 1 - f.b)) & 1) += p.reference(x);
  return mutual_information(j);
}

TreeModel chain(const std::vector<double>& stay) {
  const int d = static_cast<int>(stay.size()) + 1;
  std::vector<int> parent(static_cast<std::size_t>(d));
  std::vector<Joint2> cond(static_cast<std::size_t>(d), Joint2::Identity());
  for (int i = 0; i < d; ++i) parent[i] = i - 1;
  for (int i = 1; i < d; ++i) cond[i] << stay[i - 1], 1 - stay[i - 1], 1 - stay[i - 1], stay[i - 1];
  return TreeModel::from_conditionals(parent, Marginal2(0.45, 0.55), cond);
}

CostMatrix uniform_costs(int d, double c) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, c);
  m.diagonal().setZero();
  return CostMatrix(m);
}

}  // namespace

TEST_CASE("crossover_rate: reference on the constraint gives J = 0") {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 5; ++rep) {
    CrossoverProblem p = random_x4_problem(rng);
    p.e.offset = 0.3;
    p.e_prime.offset = 0.3 - pair_mi_of(p, p.e) + pair_mi_of(p, p.e_prime);
    const RateResult r = crossover_rate(p);
    CHECK(!r.infeasible);
    CHECK(r.rate == 0.0);
    CHECK(r.minimizer == p.reference);
    CHECK(r.residual <= 1e-8);
  }
}

TEST_CASE("crossover_rate: cost gap beyond ln 2 is infeasible") {
  std::mt19937_64 rng(62);
  CrossoverProblem p = random_x4_problem(rng);
  p.e.offset = 0.0;
  p.e_prime.offset = 0.8;
  CHECK(weight_gap(p, p.reference) > 0);
  CHECK(crossover_empty(p));
  const RateResult r = crossover_rate(p);
  CHECK(r.infeasible);
  CHECK(r.minimizer.size() == 0);
  // Just inside the range the set is non-empty and the solver finds a point.
  p.e_prime.offset = std::log(2.0) - 0.2;
  CHECK(!crossover_empty(p));
  const RateResult near = crossover_rate(p);
  CHECK(!near.infeasible);
  CHECK(std::abs(weight_gap(p, near.minimizer)) <= 1e-8);
}

TEST_CASE("crossover_rate: matches randomized search on X^4 and X^3") {
  std::mt19937_64 rng(63);
  for (int rep = 0; rep < 3; ++rep) {
    const CrossoverProblem p = random_x4_problem(rng);
    const RateResult r = crossover_rate(p);
    const double oracle = RandomSearchOracle(p, 1000 + rep).run(20000, 3, 10000);
    CHECK(r.rate <= oracle + 1e-3);
    CHECK(r.rate >= oracle - 1e-3);
    CHECK(r.rate >= 0.0);
    CHECK(std::abs(weight_gap(p, r.minimizer)) <= 1e-8);
    CHECK(r.minimizer.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const TreeModel m = random_model(5, rng);
  const WeightedCandidateGraph g(exact_pairwise_marginals(m), uniform_costs(5, 1.0));
  const LearnedTree t = async_learn(g, 0.0);
  // A tree edge against a non-edge sharing one endpoint: three variables.
  for (const Edge& e : t.edges)
    for (int z = 0; z < 5; ++z) {
      if (z == e.u || z == e.v) continue;
      const Edge ep(e.u, z);
      if (std::binary_search(t.edges.begin(), t.edges.end(), ep)) continue;
      if (!(g.mi(e) > g.mi(ep))) continue;
      const CrossoverProblem p = make_crossover_problem(m, e, 0.0, ep, 0.0);
      CHECK(p.nodes.size() == 3);
      CHECK(p.reference.size() == 8);
      const RateResult r = crossover_rate(p);
      const double oracle = RandomSearchOracle(p, 7).run(20000, 3, 10000);
      CHECK(std::abs(r.rate - oracle) <= 1e-3);
      return;
    }
}

TEST_CASE("crossover_rate: inequality relaxation never exceeds the equality rate") {
  std::mt19937_64 rng(64);
  for (int rep = 0; rep < 5; ++rep) {
    const CrossoverProblem p = random_x4_problem(rng, 0.01 * rep, 0.0);
    if (weight_gap(p, p.reference) <= 0) continue;
    RateOptions eq, le;
    le.inequality = true;
    const RateResult a = crossover_rate(p, eq), b = crossover_rate(p, le);
    CHECK(b.rate <= a.rate + 1e-9);
    CHECK(weight_gap(p, b.minimizer) <= 1e-8);
  }
}

TEST_CASE("crossover_rate: validation") {
  std::mt19937_64 rng(65);
  CrossoverProblem p = random_x4_problem(rng);
  std::swap(p.e, p.e_prime);
  CHECK_THROWS_AS(crossover_rate(p), Error);
  RateOptions le;
  le.inequality = true;
  CHECK(crossover_rate(p, le).rate == 0.0);
  CrossoverProblem bad = random_x4_problem(rng);
  bad.reference *= 2.0;
  CHECK_THROWS_AS(crossover_rate(bad), Error);
  bad = random_x4_problem(rng);
  bad.e.b = bad.e.a;
  CHECK_THROWS_AS(crossover_rate(bad), Error);
  const TreeModel m = random_model(4, rng);
  CHECK_THROWS_AS(make_crossover_problem(m, Edge(0, 1), 0, Edge(0, 1), 0), Error);
}

TEST_CASE("error_exponent_async: positive on a chain with distinct MIs") {
  const TreeModel m = chain({0.95, 0.8});
  const ExponentReport r = error_exponent_async(m, uniform_costs(3, 1.0), 0.0);
  REQUIRE(r.exponent.has_value());
  CHECK(*r.exponent > 0.0);
  CHECK(r.ideal.edges == EdgeList{Edge(0, 1), Edge(1, 2)});
  CHECK(r.pairs.size() == 2);
}

TEST_CASE("error_exponent_async: vanishes as gamma approaches a weight tie") {
  const TreeModel m = chain({0.95, 0.8});
  const auto pm = exact_pairwise_marginals(m);
  const double i12 = mutual_information(pm.joint(1, 2)), i02 = mutual_information(pm.joint(0, 2));
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 3, 1.0);
  c.diagonal().setZero();
  c(0, 2) = c(2, 0) = 0.5;
  const CostMatrix costs(c);
  const double tie = (i12 - i02) / (2.0 * (1.0 - 0.5));
  const double k0 = *error_exponent_async(m, costs, 0.0).exponent;
  const double k_near = *error_exponent_async(m, costs, tie * (1 - 1e-4)).exponent;
  const double k_tie = *error_exponent_async(m, costs, tie).exponent;
  CHECK(k_near < 1e-3 * k0);
  CHECK(k_tie <= 1e-8);
}

TEST_CASE("error_exponent_async: equals min over independently enumerated pairs") {
  std::mt19937_64 rng(66);
  const TreeModel m = random_model(4, rng, 0.1, 0.9);
  const CostMatrix costs = random_costs(4, rng, 0.1, 0.3);
  const double gamma = 0.02;
  RateOptions opt;
  opt.starts = 8;
  const ExponentReport rep = error_exponent_async(m, costs, gamma, opt);
  const WeightedCandidateGraph g(exact_pairwise_marginals(m), costs);
  const EdgeList tree = async_learn(g, gamma).edges;
  double best = 1e300;
  int count = 0;
  for (const Edge& e : tree)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const Edge ep(i, j);
        if (std::find(tree.begin(), tree.end(), ep) != tree.end()) continue;
        // e lies on the path of e' exactly when swapping them keeps a spanning tree.
        EdgeList swapped;
        for (const Edge& f : tree)
          if (f != e) swapped.push_back(f);
        swapped.push_back(ep);
        if (!is_spanning_tree(4, swapped)) continue;
        ++count;
        const auto p = make_crossover_problem(m, e, 2 * gamma * costs(e), ep, 2 * gamma * costs(ep));
        const RateResult r = crossover_rate(p, opt);
        if (!r.infeasible) best = std::min(best, r.rate);
      }
  CHECK(count == static_cast<int>(rep.pairs.size()));
  REQUIRE(rep.exponent.has_value());
  CHECK(*rep.exponent == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("error_exponent_sync: gamma = 0 uses MI-only rates along the trajectory") {
  std::mt19937_64 rng(67);
  const TreeModel m = random_model(5, rng, 0.1, 0.9);
  const CostMatrix costs = random_costs(5, rng);
  RateOptions opt;
  opt.starts = 8;
  const ExponentReport rep = error_exponent_sync(m, costs, 0.0, 1.0, opt);
  double best = 1e300;
  for (const PairRate& pr : rep.pairs) {
    CHECK(pr.offset_e == 0.0);
    CHECK(pr.offset_e_prime == 0.0);
    const RateResult r = crossover_rate(make_crossover_problem(m, pr.e, 0.0, pr.e_prime, 0.0), opt);
    best = std::min(best, r.rate);
  }
  REQUIRE(rep.exponent.has_value());
  CHECK(*rep.exponent == doctest::Approx(best).epsilon(1e-12));
  CHECK(rep.ideal.edges == async_learn(WeightedCandidateGraph(exact_pairwise_marginals(m), costs), 0.0).edges);
}

TEST_CASE("error exponents: d = 2 has no competitor") {
  const TreeModel m = chain({0.8});
  CHECK(error_exponent_async(m, uniform_costs(2, 1.0), 1.0).infinite());
  CHECK(error_exponent_sync(m, uniform_costs(2, 1.0), 1.0, 1.0).infinite());
}

TEST_CASE("error_exponent_async: not monotone in gamma on the scenario") {
  const Scenario sc = builtin_scenario(0.005);
  const CostMatrix costs = all_pairs_costs(sc.network);
  RateOptions opt;
  opt.starts = 4;
  std::vector<double> ks;
  for (double gamma : {0.0, 2.0, 4.0}) ks.push_back(error_exponent_async(sc.model, costs, gamma, opt).exponent.value());
  const bool monotone = (ks[0] >= ks[1] && ks[1] >= ks[2]) || (ks[0] <= ks[1] && ks[1] <= ks[2]);
  CHECK(!monotone);
}

TEST_CASE("finite_sample_bound: closed forms") {
  CHECK(std::exp(log_type_count(1, 16)) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(std::exp(log_type_count(2, 16)) == doctest::Approx(136.0).epsilon(1e-12));
  // K = 0 leaves the prefactor times the type count.
  CHECK(finite_sample_bound(5, 1, 0.0, CostMode::Async) == doctest::Approx(16.0 * 16 * 3 / 2).epsilon(1e-12));
  CHECK(finite_sample_bound(5, 1, 0.0, CostMode::Sync) == doctest::Approx(20.0 * 16).epsilon(1e-12));
  CHECK(finite_sample_bound(2, 10, 0.1, CostMode::Async) == 0.0);
  CHECK_THROWS_AS(finite_sample_bound(5, 0, 0.1, CostMode::Async), Error);
  CHECK_THROWS_AS(finite_sample_bound(5, 10, -0.1, CostMode::Async), Error);
}

TEST_CASE("finite_sample_bound: high-precision cross-check") {
  using boost::multiprecision::cpp_bin_float_50;
  const int d = 20;
  const std::int64_t n = 10000;
  const double K = 1e-3;
  cpp_bin_float_50 binom = 1;
  for (int i = 1; i <= 15; ++i) binom = binom * cpp_bin_float_50(n - 1 + 16 - 15 + i) / i;
  const cpp_bin_float_50 pre = cpp_bin_float_50((d - 1) * (d - 1) * (d - 2)) / 2;
  const cpp_bin_float_50 exact = pre * binom * exp(-cpp_bin_float_50(n) * cpp_bin_float_50(K));
  const double logb = log_finite_sample_bound(d, n, K, CostMode::Async);
  CHECK(logb == doctest::Approx(static_cast<double>(log(exact))).epsilon(1e-12));
  CHECK(finite_sample_bound(d, n, K, CostMode::Async) ==
        doctest::Approx(static_cast<double>(exact)).epsilon(1e-10));
  const cpp_bin_float_50 pre_s = cpp_bin_float_50((d - 1) * d * (d + 1)) / 6;
  CHECK(log_finite_sample_bound(d, n, K, CostMode::Sync) ==
        doctest::Approx(static_cast<double>(log(pre_s * binom) - n * K)).epsilon(1e-12));
}

TEST_CASE("empirical_decay_rate: planted exponential decay") {
  std::vector<ErrorPoint> grid;
  const std::int64_t trials = 1000000;
  for (std::int64_t n = 500; n <= 3000; n += 500)
    grid.push_back({n, static_cast<std::int64_t>(std::llround(std::exp(-0.002 * n) * trials)), trials});
  const DecayFit f = empirical_decay_rate(grid);
  REQUIRE(f.defined);
  CHECK(f.slope == doctest::Approx(0.002).epsilon(0.1));
  CHECK(f.ci_low <= f.slope);
  CHECK(f.ci_high >= f.slope);
  CHECK(f.points == 6);
}

TEST_CASE("empirical_decay_rate: too few nonzero points is undefined") {
  const DecayFit f = empirical_decay_rate({{500, 5, 200}, {1000, 0, 200}, {2000, 0, 200}});
  CHECK(!f.defined);
  CHECK(f.lower_bound == doctest::Approx(-std::log(3.0 / 200) / 2000).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_decay_rate({{500, 5, 2}}), Error);
}
