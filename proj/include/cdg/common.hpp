#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdg {

/// Undirected node pair, always stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;

  Edge() = default;
  Edge(int a, int b) : u(a < b ? a : b), v(a < b ? b : a) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
  friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

/// Sorted copy with the canonical (u < v) orientation.
EdgeList canonical(EdgeList edges);

/// Thrown for malformed inputs and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Joint2 = Eigen::Matrix2d;
using Marginal2 = Eigen::Vector2d;

// Correctly rounded floating-point summation (Shewchuk partials). Used for
// communication-cost accounting so that identities between message-level
// and edge-level sums hold bit for bit.
class ExactSum {
 public:
  void add(double x);
  /// Adds a*b without intermediate rounding.
  void add_product(double a, double b);
  double value() const;

 private:
  std::vector<double> partials_;
};

double exact_sum(const std::vector<double>& values);

// Deterministic random numbers. std::mt19937_64 output is specified by the
// standard; the conversion to doubles is done by hand so results do not
// depend on the library's distribution implementations.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

template <typename Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cdg
