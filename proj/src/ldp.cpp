#include "cdg/ldp.hpp"

#include "cdg/tree.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cdg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLn2 = std::log(2.0);

int bit(int cell, int k, int p) { return (cell >> (k - 1 - p)) & 1; }

// MI of the (a, b) pair marginal of q and its gradient with respect to q
// (up to an additive constant, which the simplex parametrization ignores).
double pair_mi(const Eigen::VectorXd& q, int k, const EdgeFunctional& f, Eigen::VectorXd* grad,
               double sign) {
  Joint2 j = Joint2::Zero();
  const int m = 1 << k;
  for (int x = 0; x < m; ++x) j(bit(x, k, f.a), bit(x, k, f.b)) += q(x);
  const Marginal2 ra = j.rowwise().sum(), cb = j.colwise().sum().transpose();
  double mi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (j(a, b) > 0.0) mi += j(a, b) * std::log(j(a, b) / (ra(a) * cb(b)));
  if (grad) {
    for (int x = 0; x < m; ++x) {
      const int a = bit(x, k, f.a), b = bit(x, k, f.b);
      if (j(a, b) > 0.0) (*grad)(x) += sign * (std::log(j(a, b)) - std::log(ra(a)) - std::log(cb(b)));
    }
  }
  return std::max(mi, 0.0);
}

int endpoint_count(const CrossoverProblem& p) { return static_cast<int>(p.nodes.size()); }

double gap_and_grad(const CrossoverProblem& p, const Eigen::VectorXd& q, Eigen::VectorXd* grad) {
  const int k = endpoint_count(p);
  if (grad) grad->setZero(q.size());
  const double ie = pair_mi(q, k, p.e, grad, 1.0);
  const double ie2 = pair_mi(q, k, p.e_prime, grad, -1.0);
  return (ie - p.e.offset) - (ie2 - p.e_prime.offset);
}

double kl(const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
  double s = 0.0;
  for (Eigen::Index x = 0; x < q.size(); ++x)
    if (q(x) > 0.0) s += q(x) * std::log(q(x) / p(x));
  return std::max(s, 0.0);
}

// Minimal L-BFGS with Armijo backtracking. fg(x, grad) returns f(x).
template <typename FG>
int lbfgs(FG&& fg, Eigen::VectorXd& x, int max_iter) {
  constexpr int kMemory = 8;
  const Eigen::Index n = x.size();
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho;
  Eigen::VectorXd g(n), g_new(n), x_new(n), dir(n);
  double f = fg(x, g);
  int it = 0;
  for (; it < max_iter; ++it) {
    if (!std::isfinite(f) || g.lpNorm<Eigen::Infinity>() < 1e-13) break;
    // Two-loop recursion.
    dir = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;
    double f_new = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = x_new - x, y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-18) {
      if (static_cast<int>(s_hist.size()) == kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho.erase(rho.begin());
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho.push_back(1.0 / sy);
    }
    const double df = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;
    if (df <= 1e-16 * std::max(1.0, std::abs(f))) break;
  }
  return it;
}

// Softmax over the support of P.
struct Simplex {
  std::vector<int> support;
  int cells = 0;

  Eigen::VectorXd q(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cells);
    const double hi = theta.maxCoeff();
    double z = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) z += std::exp(theta(s) - hi);
    for (std::size_t s = 0; s < support.size(); ++s) out(support[s]) = std::exp(theta(s) - hi) / z;
    return out;
  }

  // Pulls a gradient in q back to theta.
  Eigen::VectorXd pull(const Eigen::VectorXd& q, const Eigen::VectorXd& gq) const {
    double mean = 0.0;
    for (int c : support) mean += q(c) * gq(c);
    Eigen::VectorXd gt(support.size());
    for (std::size_t s = 0; s < support.size(); ++s) gt(s) = q(support[s]) * (gq(support[s]) - mean);
    return gt;
  }
};

struct StartOutcome {
  bool ok = false;
  double rate = kInf;
  Eigen::VectorXd q;
  double residual = kInf;
  int iterations = 0;
};

// Moves from Q toward P along the segment until g = 0 (g(P) > 0 > g(Q)).
Eigen::VectorXd segment_root(const CrossoverProblem& p, const Eigen::VectorXd& q) {
  double lo = 0.0, hi = 1.0;  // g > 0 at lo, g < 0 at hi
  Eigen::VectorXd best = q;
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (lo + hi);
    const Eigen::VectorXd qt = (1.0 - t) * p.reference + t * q;
    const double g = gap_and_grad(p, qt, nullptr);
    if (g > 0.0) {
      lo = t;
    } else {
      hi = t;
      best = qt;
    }
    if (hi - lo < 1e-17) break;
  }
  return best;
}

StartOutcome solve_from(const CrossoverProblem& p, const Simplex& sx, Eigen::VectorXd theta,
                        const RateOptions& opt) {
  StartOutcome out;
  double lambda = 0.0, mu = 10.0, prev = kInf;
  Eigen::VectorXd gq(sx.cells), gg(sx.cells);
  auto fg = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const Eigen::VectorXd q = sx.q(th);
    const double g = gap_and_grad(p, q, &gg);
    double f = kl(q, p.reference), coef;
    if (opt.inequality) {
      const double shifted = std::max(0.0, lambda + mu * g);
      f += (shifted * shifted - lambda * lambda) / (2.0 * mu);
      coef = shifted;
    } else {
      f += lambda * g + 0.5 * mu * g * g;
      coef = lambda + mu * g;
    }
    gq.setZero();
    for (int c : sx.support) gq(c) = std::log(q(c) / p.reference(c)) + 1.0 + coef * gg(c);
    grad = sx.pull(q, gq);
    return f;
  };
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    out.iterations += lbfgs(fg, theta, opt.max_inner);
    const double g = gap_and_grad(p, sx.q(theta), nullptr);
    if (!std::isfinite(g)) return out;
    const double viol = opt.inequality ? std::max(g, 0.0) : std::abs(g);
    if (viol <= 0.1 * opt.tol) break;
    if (opt.inequality) {
      lambda = std::max(0.0, lambda + mu * g);
    } else {
      lambda += mu * g;
    }
    if (viol > 0.25 * prev) mu = std::min(mu * 10.0, 1e12);
    prev = viol;
  }

  Eigen::VectorXd q = sx.q(theta);
  Eigen::VectorXd gt;
  double g = gap_and_grad(p, q, &gg);
  if (g >= 0.0) {
    // Nudge across the constraint along -grad g before projecting back.
    gq.setZero();
    for (int c : sx.support) gq(c) = gg(c);
    gt = sx.pull(q, gq);
    const double norm = gt.norm();
    if (!(norm > 0.0)) return out;
    bool crossed = false;
    for (double s = 1e-10; s < 1e3; s *= 2.0) {
      const Eigen::VectorXd qs = sx.q(theta - (s / norm) * gt);
      if (gap_and_grad(p, qs, nullptr) < 0.0) {
        q = qs;
        crossed = true;
        break;
      }
    }
    if (!crossed) return out;
  }
  q = segment_root(p, q);
  g = gap_and_grad(p, q, nullptr);
  out.residual = std::abs(g);
  if (out.residual > opt.tol) return out;
  out.ok = true;
  out.rate = kl(q, p.reference);
  out.q = std::move(q);
  return out;
}

}  // namespace

CrossoverProblem make_crossover_problem(const TreeModel& model, const Edge& e, double r_e,
                                        const Edge& e_prime, double r_e_prime) {
  if (e == e_prime) throw Error("crossover problem: edges must differ");
  std::vector<int> nodes{e.u, e.v, e_prime.u, e_prime.v};
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto local = [&](int x) {
    return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
  };
  CrossoverProblem p;
  p.reference = subset_joint(model, nodes);
  p.nodes = nodes;
  p.e = {local(e.u), local(e.v), r_e};
  p.e_prime = {local(e_prime.u), local(e_prime.v), r_e_prime};
  return p;
}

double weight_gap(const CrossoverProblem& problem, const Eigen::VectorXd& q) {
  return gap_and_grad(problem, q, nullptr);
}

bool crossover_empty(const CrossoverProblem& problem) {
  return std::abs(problem.e.offset - problem.e_prime.offset) > kLn2;
}

RateResult crossover_rate(const CrossoverProblem& problem, const RateOptions& opt) {
  const int k = endpoint_count(problem);
  if (k < 3 || k > 4) throw Error("crossover_rate: need 3 or 4 endpoint variables");
  if (problem.reference.size() != (1 << k)) throw Error("crossover_rate: reference has wrong size");
  if ((problem.reference.array() < 0.0).any() || std::abs(problem.reference.sum() - 1.0) > 1e-9)
    throw Error("crossover_rate: reference is not a distribution");
  for (const auto& f : {problem.e, problem.e_prime})
    if (f.a == f.b || f.a < 0 || f.b < 0 || f.a >= k || f.b >= k)
      throw Error("crossover_rate: bad edge endpoints");
  if (opt.starts < 1) throw Error("crossover_rate: need at least one start");

  RateResult r;
  const double g0 = weight_gap(problem, problem.reference);
  if (std::abs(g0) <= opt.tol || (opt.inequality && g0 < 0.0)) {
    r.rate = 0.0;
    r.minimizer = problem.reference;
    r.residual = opt.inequality ? std::max(g0, 0.0) : std::abs(g0);
    return r;
  }
  if (g0 < 0.0) throw Error("crossover_rate: w_e(P) must exceed w_e'(P)");
  if (crossover_empty(problem)) {
    r.infeasible = true;
    return r;
  }

  Simplex sx;
  sx.cells = 1 << k;
  for (int c = 0; c < sx.cells; ++c)
    if (problem.reference(c) > 0.0) sx.support.push_back(c);
  const auto m = static_cast<Eigen::Index>(sx.support.size());

  std::mt19937_64 rng(opt.seed);
  StartOutcome best;
  for (int s = 0; s < opt.starts; ++s) {
    Eigen::VectorXd theta(m);
    for (Eigen::Index i = 0; i < m; ++i)
      theta(i) = s == 0 ? std::log(problem.reference(sx.support[i]))
                        : std::log(-std::log(1.0 - uniform01(rng)) + 1e-300);
    StartOutcome o = solve_from(problem, sx, theta, opt);
    r.iterations += o.iterations;
    if (!o.ok) continue;
    ++r.starts_converged;
    if (o.rate < best.rate) best = std::move(o);
  }
  if (!best.ok) throw SolverError("crossover_rate: no start reached the constraint", kInf);
  r.rate = best.rate;
  r.minimizer = std::move(best.q);
  r.residual = best.residual;
  return r;
}

namespace {

std::optional<double> min_rate(const std::vector<PairRate>& pairs) {
  std::optional<double> k;
  for (const auto& pr : pairs)
    if (!pr.result.infeasible) k = k ? std::min(*k, pr.result.rate) : pr.result.rate;
  return k;
}

// Edges on the unique tree path between a and b.
EdgeList tree_path(int d, const EdgeList& tree, int a, int b) {
  const auto adj = adjacency(d, tree);
  std::vector<int> parent(static_cast<std::size_t>(d), -2);
  std::vector<int> q{a};
  parent[a] = -1;
  for (std::size_t h = 0; h < q.size(); ++h)
    for (int y : adj[q[h]])
      if (parent[y] == -2) {
        parent[y] = q[h];
        q.push_back(y);
      }
  EdgeList path;
  for (int x = b; parent[x] >= 0; x = parent[x]) path.emplace_back(x, parent[x]);
  return path;
}

}  // namespace

ExponentReport error_exponent_async(const TreeModel& true_model, const CostMatrix& costs,
                                    double gamma, const RateOptions& opt) {
  const int d = true_model.d();
  if (costs.d() != d) throw Error("error_exponent: cost matrix size mismatch");
  const WeightedCandidateGraph g(exact_pairwise_marginals(true_model), costs);
  ExponentReport rep;
  rep.ideal = async_learn(g, gamma);
  const auto& tree = rep.ideal.edges;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const Edge ep(i, j);
      if (std::binary_search(tree.begin(), tree.end(), ep)) continue;
      for (const Edge& e : tree_path(d, tree, i, j)) {
        PairRate pr;
        pr.e = e;
        pr.e_prime = ep;
        pr.offset_e = 2.0 * gamma * costs(e);
        pr.offset_e_prime = 2.0 * gamma * costs(ep);
        pr.result = crossover_rate(make_crossover_problem(true_model, e, pr.offset_e, ep, pr.offset_e_prime), opt);
        rep.pairs.push_back(std::move(pr));
      }
    }
  rep.exponent = min_rate(rep.pairs);
  return rep;
}

ExponentReport error_exponent_sync(const TreeModel& true_model, const CostMatrix& costs,
                                   double gamma, double beta, const RateOptions& opt) {
  const int d = true_model.d();
  if (costs.d() != d) throw Error("error_exponent: cost matrix size mismatch");
  const WeightedCandidateGraph g(exact_pairwise_marginals(true_model), costs);
  const SyncTrajectory tr = sync_trajectory(g, gamma, beta);
  ExponentReport rep;
  rep.ideal = tr.result;
  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    const SyncStep& st = tr.steps[t];
    const auto chosen = std::find_if(st.candidates.begin(), st.candidates.end(),
                                     [&](const SyncCandidate& c) { return c.edge == st.chosen; });
    for (const auto& c : st.candidates) {
      if (c.edge == st.chosen) continue;
      PairRate pr;
      pr.e = st.chosen;
      pr.e_prime = c.edge;
      pr.step = static_cast<int>(t) + 1;
      pr.offset_e = chosen->offset;
      pr.offset_e_prime = c.offset;
      pr.result = crossover_rate(make_crossover_problem(true_model, pr.e, pr.offset_e, pr.e_prime, pr.offset_e_prime), opt);
      rep.pairs.push_back(std::move(pr));
    }
  }
  rep.exponent = min_rate(rep.pairs);
  return rep;
}

double log_type_count(std::int64_t n, int cells) {
  if (n < 1) throw Error("log_type_count: n must be at least 1");
  if (cells < 1) throw Error("log_type_count: cells must be positive");
  const double top = static_cast<double>(n - 1 + cells);
  const double k = static_cast<double>(cells - 1);
  return std::lgamma(top + 1.0) - std::lgamma(k + 1.0) - std::lgamma(top - k + 1.0);
}

double log_finite_sample_bound(int d, std::int64_t n, double K, CostMode mode, int alphabet_size) {
  if (d < 2) throw Error("finite_sample_bound: d must be at least 2");
  if (n < 1) throw Error("finite_sample_bound: n must be at least 1");
  if (!(K >= 0.0)) throw Error("finite_sample_bound: K must be non-negative");
  if (alphabet_size < 2) throw Error("finite_sample_bound: alphabet size must be at least 2");
  const double dd = d;
  const double prefactor = mode == CostMode::Async ? (dd - 1) * (dd - 1) * (dd - 2) / 2.0
                                                   : (dd - 1) * dd * (dd + 1) / 6.0;
  if (prefactor == 0.0) return -kInf;
  const int cells = alphabet_size * alphabet_size * alphabet_size * alphabet_size;
  if (std::isinf(K)) return -kInf;
  return std::log(prefactor) + log_type_count(n, cells) - static_cast<double>(n) * K;
}

double finite_sample_bound(int d, std::int64_t n, double K, CostMode mode, int alphabet_size) {
  return std::exp(log_finite_sample_bound(d, n, K, mode, alphabet_size));
}

DecayFit empirical_decay_rate(const std::vector<ErrorPoint>& grid) {
  DecayFit fit;
  std::vector<double> xs, ys;
  std::int64_t largest_zero_n = 0;
  for (const auto& p : grid) {
    if (p.trials < 1 || p.errors < 0 || p.errors > p.trials) throw Error("empirical_decay_rate: bad grid point");
    if (p.errors > 0) {
      xs.push_back(static_cast<double>(p.n));
      ys.push_back(-std::log(static_cast<double>(p.errors) / static_cast<double>(p.trials)));
    } else if (p.n >= largest_zero_n) {
      largest_zero_n = p.n;
      fit.lower_bound = -std::log(std::min(1.0, 3.0 / static_cast<double>(p.trials))) / static_cast<double>(p.n);
    }
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 3) return fit;
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), fit.points), y(ys.data(), fit.points);
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  if (sxx == 0.0) return fit;
  fit.defined = true;
  fit.slope = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
  fit.intercept = ym - fit.slope * xm;
  const double sse = (y.array() - fit.intercept - fit.slope * x.array()).square().sum();
  const int df = fit.points - 2;
  fit.stderr_slope = std::sqrt(sse / df / sxx);
  const boost::math::students_t dist(df);
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - tq * fit.stderr_slope;
  fit.ci_high = fit.slope + tq * fit.stderr_slope;
  return fit;
}

}  // namespace cdg
