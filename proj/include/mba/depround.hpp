#pragma once

// Dependent rounding of a fractional bipartite matching: every vertex is
// matched with probability equal to its fractional degree, and matched events
// on the left side are negatively correlated.
//
// Weight-1 edges are locked and cycles cancelled deterministically (once per
// graph); the random part repeatedly takes a maximal path of the remaining
// forest and shifts weight between its two alternating matchings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/rational.hpp"
#include "mba/rng.hpp"

namespace mba {

struct BipartiteEdge {
  std::size_t left;
  std::size_t right;
  Rational weight;
};

class WeightedBipartiteGraph {
 public:
  WeightedBipartiteGraph() = default;
  WeightedBipartiteGraph(std::size_t num_left, std::size_t num_right) : nl_(num_left), nr_(num_right) {}

  std::size_t num_left() const { return nl_; }
  std::size_t num_right() const { return nr_; }
  std::size_t num_vertices() const { return nl_ + nr_; }
  const std::vector<BipartiteEdge>& edges() const { return edges_; }

  std::size_t add_edge(std::size_t left, std::size_t right, Rational weight) {
    edges_.push_back({left, right, std::move(weight)});
    return edges_.size() - 1;
  }

  Rational left_degree(std::size_t u) const {
    Rational s;
    for (const auto& e : edges_) {
      if (e.left == u) s += e.weight;
    }
    return s;
  }
  Rational right_degree(std::size_t v) const {
    Rational s;
    for (const auto& e : edges_) {
      if (e.right == v) s += e.weight;
    }
    return s;
  }
  /// Fractional degree of vertex k (left vertices first, then right).
  Rational degree(std::size_t k) const { return k < nl_ ? left_degree(k) : right_degree(k - nl_); }

  /// Throws PreconditionError unless 0 <= x_e <= 1, no parallel edges, and
  /// every fractional degree is at most 1.
  void validate() const {
    std::vector<Rational> deg(num_vertices());
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : edges_) {
      if (e.left >= nl_ || e.right >= nr_) throw PreconditionError("edge endpoint out of range");
      if (e.weight.sign() < 0 || e.weight > Rational(1)) throw PreconditionError("edge weight outside [0,1]");
      if (!seen.insert({e.left, e.right}).second) throw PreconditionError("parallel edges");
      deg[e.left] += e.weight;
      deg[nl_ + e.right] += e.weight;
    }
    for (std::size_t k = 0; k < deg.size(); ++k) {
      if (deg[k] > Rational(1)) {
        throw PreconditionError("graph is not normal: vertex " + std::to_string(k) + " has fractional degree " +
                                deg[k].str());
      }
    }
  }

 private:
  std::size_t nl_ = 0;
  std::size_t nr_ = 0;
  std::vector<BipartiteEdge> edges_;
};

/// Sorted edge indices.
using Matching = std::vector<std::size_t>;

class DependentRounder {
 public:
  explicit DependentRounder(WeightedBipartiteGraph graph) : g_(std::move(graph)) {
    g_.validate();
    const std::size_t nv = g_.num_vertices();
    adj_.assign(nv, {});
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      adj_[g_.edges()[k].left].push_back(k);
      adj_[g_.num_left() + g_.edges()[k].right].push_back(k);
    }
    State s = initial_state();
    cancel_cycles(s);
    base_ = std::move(s);
  }

  const WeightedBipartiteGraph& graph() const { return g_; }

  /// Edge weights after locking and cycle cancelling; the fractional support
  /// is a forest and vertex degrees equal the input degrees.
  const std::vector<Rational>& after_cycles() const { return base_.y; }
  const Matching& locked() const { return base_.matched; }

  Matching sample(CounterRng& rng) const {
    State s = base_;
    while (auto path = maximal_path(s)) {
      auto [alpha, beta] = shifts(s, *path);
      bool up = rng.bernoulli(beta / (alpha + beta));
      apply(s, *path, up ? alpha : -beta);
    }
    std::sort(s.matched.begin(), s.matched.end());
    return s.matched;
  }

  /// Exact distribution over output matchings, by following both branches of
  /// every random step.
  std::map<Matching, Rational> distribution() const {
    std::map<Matching, Rational> out;
    explore(base_, Rational(1), out);
    return out;
  }

 private:
  struct State {
    std::vector<Rational> y;
    std::vector<bool> live;  // 0 < y < 1
    Matching matched;
  };

  std::size_t other(std::size_t edge, std::size_t vertex) const {
    const auto& e = g_.edges()[edge];
    std::size_t l = e.left;
    std::size_t r = g_.num_left() + e.right;
    return vertex == l ? r : l;
  }

  State initial_state() const {
    State s;
    const auto& edges = g_.edges();
    s.y.resize(edges.size());
    s.live.assign(edges.size(), false);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      s.y[k] = edges[k].weight;
      if (s.y[k] == Rational(1)) {
        s.matched.push_back(k);
      } else if (s.y[k].sign() > 0) {
        s.live[k] = true;
      }
    }
    return s;
  }

  // Retires edges of `touched` that reached 0 or 1; zeros first so the
  // degree check on newly rounded edges only sees genuinely live neighbours.
  void settle(State& s, const std::vector<std::size_t>& touched) const {
    for (std::size_t k : touched) {
      if (s.y[k].is_zero()) s.live[k] = false;
    }
    for (std::size_t k : touched) {
      if (!s.live[k] || s.y[k] != Rational(1)) continue;
      s.live[k] = false;
      const auto& e = g_.edges()[k];
      for (std::size_t v : {e.left, g_.num_left() + e.right}) {
        for (std::size_t f : adj_[v]) {
          if (f != k && s.live[f]) throw InvariantError("rounded edge shares a vertex with a live edge");
        }
      }
      s.matched.push_back(k);
    }
  }

  // DFS for any cycle in the live support; returns its edges in order.
  std::optional<std::vector<std::size_t>> find_cycle(const State& s) const {
    const std::size_t nv = g_.num_vertices();
    std::vector<int> state(nv, 0);
    std::vector<std::size_t> parent_edge(nv, SIZE_MAX);
    std::vector<std::size_t> parent(nv, SIZE_MAX);
    for (std::size_t root = 0; root < nv; ++root) {
      if (state[root] != 0) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
      state[root] = 1;
      while (!stack.empty()) {
        auto& [v, pos] = stack.back();
        if (pos == adj_[v].size()) {
          state[v] = 2;
          stack.pop_back();
          continue;
        }
        std::size_t k = adj_[v][pos++];
        if (!s.live[k] || k == parent_edge[v]) continue;
        std::size_t w = other(k, v);
        if (state[w] == 1) {
          std::vector<std::size_t> cyc{k};
          for (std::size_t u = v; u != w; u = parent[u]) cyc.push_back(parent_edge[u]);
          return cyc;
        }
        if (state[w] == 0) {
          state[w] = 1;
          parent[w] = v;
          parent_edge[w] = k;
          stack.emplace_back(w, 0);
        }
      }
    }
    return std::nullopt;
  }

  void cancel_cycles(State& s) const {
    while (auto cyc = find_cycle(s)) {
      // Rotate so the minimum-weight edge (lowest index on ties) is first; it
      // and every second edge form M1, which loses alpha.
      std::size_t at = 0;
      for (std::size_t k = 1; k < cyc->size(); ++k) {
        const Rational& a = s.y[(*cyc)[k]];
        const Rational& b = s.y[(*cyc)[at]];
        if (a < b || (a == b && (*cyc)[k] < (*cyc)[at])) at = k;
      }
      std::rotate(cyc->begin(), cyc->begin() + static_cast<std::ptrdiff_t>(at), cyc->end());
      Rational alpha = s.y[cyc->front()];
      for (std::size_t k = 0; k < cyc->size(); ++k) {
        std::size_t e = (*cyc)[k];
        s.y[e] += k % 2 == 0 ? -alpha : alpha;
      }
      settle(s, *cyc);
    }
  }

  // Maximal path through the lowest-id vertex with a live edge, extended from
  // that vertex in both directions, always taking the lowest-index live edge.
  std::optional<std::vector<std::size_t>> maximal_path(const State& s) const {
    const std::size_t nv = g_.num_vertices();
    std::optional<std::size_t> start;
    for (std::size_t v = 0; v < nv && !start; ++v) {
      for (std::size_t k : adj_[v]) {
        if (s.live[k]) {
          start = v;
          break;
        }
      }
    }
    if (!start) return std::nullopt;
    auto walk = [&](std::size_t from, std::size_t banned) {
      std::vector<std::size_t> out;
      std::size_t v = from;
      std::size_t prev = banned;
      for (;;) {
        std::optional<std::size_t> next;
        for (std::size_t k : adj_[v]) {
          if (s.live[k] && k != prev) {
            next = k;
            break;
          }
        }
        if (!next) return out;
        out.push_back(*next);
        prev = *next;
        v = other(*next, v);
      }
    };
    std::vector<std::size_t> forward = walk(*start, SIZE_MAX);
    std::vector<std::size_t> backward = walk(*start, forward.front());
    std::vector<std::size_t> path(backward.rbegin(), backward.rend());
    path.insert(path.end(), forward.begin(), forward.end());
    return path;
  }

  // M1 = even positions of the path, M2 = odd positions.
  std::pair<Rational, Rational> shifts(const State& s, const std::vector<std::size_t>& path) const {
    std::optional<Rational> alpha, beta;
    auto lower = [](std::optional<Rational>& slot, const Rational& v) {
      if (!slot || v < *slot) slot = v;
    };
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Rational& y = s.y[path[k]];
      if (k % 2 == 0) {
        lower(alpha, Rational(1) - y);
        lower(beta, y);
      } else {
        lower(alpha, y);
        lower(beta, Rational(1) - y);
      }
    }
    return {*alpha, *beta};
  }

  // Adds `delta` to M1 and subtracts it from M2.
  void apply(State& s, const std::vector<std::size_t>& path, const Rational& delta) const {
    for (std::size_t k = 0; k < path.size(); ++k) s.y[path[k]] += k % 2 == 0 ? delta : -delta;
    settle(s, path);
  }

  void explore(const State& s, const Rational& prob, std::map<Matching, Rational>& out) const {
    auto path = maximal_path(s);
    if (!path) {
      Matching m = s.matched;
      std::sort(m.begin(), m.end());
      out[m] += prob;
      return;
    }
    auto [alpha, beta] = shifts(s, *path);
    Rational p_up = beta / (alpha + beta);
    State up = s;
    apply(up, *path, alpha);
    explore(up, prob * p_up, out);
    State down = s;
    apply(down, *path, -beta);
    explore(down, prob * (Rational(1) - p_up), out);
  }

  WeightedBipartiteGraph g_;
  std::vector<std::vector<std::size_t>> adj_;
  State base_;
};

/// Random normal bipartite graph with weights on a 1/12 grid; each vertex pair
/// is an edge with probability 1/2, weights drawn from the remaining degree.
inline WeightedBipartiteGraph random_normal_graph(std::size_t num_left, std::size_t num_right, std::uint64_t seed) {
  CounterRng rng = CounterRng::stream(seed, 0);
  WeightedBipartiteGraph g(num_left, num_right);
  std::vector<std::int64_t> left_room(num_left, 12), right_room(num_right, 12);
  for (std::size_t u = 0; u < num_left; ++u) {
    for (std::size_t v = 0; v < num_right; ++v) {
      if (rng.below(2) == 0) continue;
      std::int64_t room = std::min(left_room[u], right_room[v]);
      if (room == 0) continue;
      auto w = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room))) + 1;
      left_room[u] -= w;
      right_room[v] -= w;
      g.add_edge(u, v, Rational(w, 12));
    }
  }
  return g;
}

inline Matching sample_matching(const WeightedBipartiteGraph& graph, std::uint64_t seed) {
  DependentRounder rounder(graph);
  CounterRng rng = CounterRng::stream(seed, 0);
  return rounder.sample(rng);
}

/// Vertex k (left first, then right) is matched in m.
inline std::vector<bool> matched_vertices(const WeightedBipartiteGraph& g, const Matching& m) {
  std::vector<bool> out(g.num_vertices(), false);
  for (std::size_t k : m) {
    out[g.edges()[k].left] = true;
    out[g.num_left() + g.edges()[k].right] = true;
  }
  return out;
}

struct MarginalEstimate {
  std::vector<double> frequency;   // per vertex
  std::vector<Rational> expected;  // fractional degree per vertex
  std::size_t trials = 0;
};

/// Trial t uses stream (seed, t).
inline MarginalEstimate estimate_marginals(const WeightedBipartiteGraph& graph, std::size_t trials,
                                           std::uint64_t seed) {
  DependentRounder rounder(graph);
  MarginalEstimate out;
  out.trials = trials;
  std::vector<std::size_t> hits(graph.num_vertices(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = CounterRng::stream(seed, t);
    auto mv = matched_vertices(graph, rounder.sample(rng));
    for (std::size_t k = 0; k < mv.size(); ++k) hits[k] += mv[k] ? 1 : 0;
  }
  for (std::size_t k = 0; k < graph.num_vertices(); ++k) {
    out.frequency.push_back(static_cast<double>(hits[k]) / static_cast<double>(trials));
    out.expected.push_back(graph.degree(k));
  }
  return out;
}

struct CorrelationRow {
  std::vector<std::size_t> subset;  // left vertices
  double joint = 0.0;               // empirical Pr[all of S matched]
  double product = 0.0;             // Π_v x(v), exact marginals
  double empirical_product = 0.0;   // Π_v of empirical marginals
  double sigma = 0.0;               // binomial standard error of the joint under Pr = product
  bool violation = false;           // joint > product + 3 sigma
};

struct CorrelationReport {
  std::size_t trials = 0;
  std::vector<CorrelationRow> rows;
  std::size_t violations() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.violation; }));
  }
};

inline CorrelationReport check_negative_correlation(const WeightedBipartiteGraph& graph,
                                                    const std::vector<std::vector<std::size_t>>& subsets,
                                                    std::size_t trials, std::uint64_t seed) {
  if (trials < 1000) throw StatisticsError("negative-correlation check needs at least 1000 trials");
  for (const auto& s : subsets) {
    for (std::size_t v : s) {
      if (v >= graph.num_left()) throw PreconditionError("subset vertex is not a left vertex");
    }
  }
  DependentRounder rounder(graph);
  std::vector<std::size_t> joint(subsets.size(), 0);
  std::vector<std::size_t> single(graph.num_left(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = CounterRng::stream(seed, t);
    auto mv = matched_vertices(graph, rounder.sample(rng));
    for (std::size_t v = 0; v < graph.num_left(); ++v) single[v] += mv[v] ? 1 : 0;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
      bool all = std::all_of(subsets[k].begin(), subsets[k].end(), [&](std::size_t v) { return mv[v]; });
      joint[k] += all ? 1 : 0;
    }
  }
  CorrelationReport report;
  report.trials = trials;
  const double n = static_cast<double>(trials);
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    CorrelationRow row;
    row.subset = subsets[k];
    row.joint = static_cast<double>(joint[k]) / n;
    row.product = 1.0;
    row.empirical_product = 1.0;
    for (std::size_t v : subsets[k]) {
      row.product *= graph.left_degree(v).to_double();
      row.empirical_product *= static_cast<double>(single[v]) / n;
    }
    row.sigma = std::sqrt(row.product * (1.0 - row.product) / n);
    row.violation = row.joint > row.product + 3.0 * row.sigma;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace mba
