#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cdg/io.hpp"
#include "cdg/scenario.hpp"
#include "support.hpp"

#include <sstream>

using namespace cdg;

TEST_CASE("model format: round trip and 1-based labels") {
  std::mt19937_64 rng(81);
  const TreeModel m = testing::random_model(6, rng);
  std::ostringstream out;
  write_model(out, m);
  std::istringstream in(out.str());
  const TreeModel back = parse_model(in);
  CHECK(back.edges() == m.edges());
  for (int i = 0; i < 6; ++i) CHECK(back.node_marginal(i) == m.node_marginal(i));
  for (std::size_t k = 0; k < m.edges().size(); ++k) CHECK(back.edge_marginal(k) == m.edge_marginal(k));
  std::ostringstream again;
  write_model(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("model format: edge rows follow the first listed node") {
  std::istringstream in("2\n1 0.7\n2 0.4\n2 1 0.3 0.1 0.4 0.2\n");
  const TreeModel m = parse_model(in);
  REQUIRE(m.edges().size() == 1);
  CHECK(m.edges()[0] == Edge(0, 1));
  // File rows index node 2; internally rows index node 1.
  CHECK(m.edge_marginal(0)(0, 1) == 0.4);
  CHECK(m.edge_marginal(0)(1, 0) == 0.1);
}

TEST_CASE("model format: errors carry line context") {
  std::istringstream bad("2\n1 0.7\n3 0.4\n1 2 0.3 0.4 0.1 0.2\n");
  try {
    parse_model(bad, "m.txt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("m.txt:3") != std::string::npos);
  }
  std::istringstream truncated("3\n1 0.5\n2 0.5\n3 0.5\n1 2 0.25 0.25 0.25 0.25\n");
  CHECK_THROWS_AS(parse_model(truncated), Error);
  std::istringstream inconsistent("2\n1 0.7\n2 0.4\n1 2 0.25 0.25 0.25 0.25\n");
  CHECK_THROWS_AS(parse_model(inconsistent), Error);
}

TEST_CASE("network format: round trip") {
  const PhysicalNetwork net = line_network(5, 0.5);
  std::ostringstream out;
  write_network(out, net);
  CHECK(out.str().rfind("5\n1 2 2\n", 0) == 0);
  std::istringstream in(out.str());
  const PhysicalNetwork back = parse_network(in);
  REQUIRE(back.links().size() == net.links().size());
  for (std::size_t k = 0; k < net.links().size(); ++k) {
    CHECK(back.links()[k].edge == net.links()[k].edge);
    CHECK(back.links()[k].cost == net.links()[k].cost);
  }
  std::istringstream loop("3\n1 1 0.5\n");
  CHECK_THROWS_AS(parse_network(loop), Error);
  std::istringstream neg("3\n1 2 -0.5\n2 3 1\n");
  CHECK_THROWS_AS(parse_network(neg), Error);
}

TEST_CASE("samples format: CSV round trip and validation") {
  const SampleSet s = sample(scenario_model(), 50, 3);
  std::ostringstream out;
  write_samples(out, s);
  std::istringstream in(out.str());
  CHECK(parse_samples(in) == s);
  std::istringstream ragged("0,1\n1\n");
  CHECK_THROWS_AS(parse_samples(ragged), Error);
  std::istringstream value("0,2\n");
  CHECK_THROWS_AS(parse_samples(value), Error);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(parse_samples(empty), Error);
  std::istringstream spaced(" 0 , 1\r\n1,1\n");
  CHECK(parse_samples(spaced).n() == 2);
}

TEST_CASE("tree format: metadata line and validation") {
  const EdgeList t{{0, 1}, {1, 2}, {1, 3}};
  std::ostringstream out;
  write_tree(out, t, R"({"algorithm":"async"})");
  CHECK(out.str() == "# {\"algorithm\":\"async\"}\n1 2\n2 3\n2 4\n");
  std::istringstream in(out.str());
  const TreeFile f = parse_tree(in);
  CHECK(f.d == 4);
  CHECK(f.edges == t);
  CHECK(f.metadata == R"({"algorithm":"async"})");
  std::istringstream cycle("1 2\n2 3\n3 1\n");
  CHECK_THROWS_AS(parse_tree(cycle), Error);
}

TEST_CASE("subsets format") {
  std::istringstream in("1 2 3\n# comment\n4,5,6\n");
  const auto s = parse_subsets(in);
  REQUIRE(s.size() == 2);
  CHECK(s[1] == std::array<int, 3>{4, 5, 6});
  std::istringstream bad("1 2\n");
  CHECK_THROWS_AS(parse_subsets(bad), Error);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567}) CHECK(std::stod(format_double(x)) == x);
}
