#pragma once

// Dinic max-flow over an arbitrary ordered capacity type (integers or exact
// rationals), plus feasibility for flows with lower bounds.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace mba {

template <class Cap>
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes = 0) : adj_(nodes) {}

  std::size_t add_node() {
    adj_.emplace_back();
    return adj_.size() - 1;
  }
  std::size_t num_nodes() const { return adj_.size(); }

  /// Returns the edge id; flow(id) reads the flow after run().
  std::size_t add_edge(std::size_t u, std::size_t v, Cap cap) {
    std::size_t id = edges_.size();
    edges_.push_back({v, cap, Cap{}});
    adj_[u].push_back(id);
    edges_.push_back({u, Cap{}, Cap{}});
    adj_[v].push_back(id + 1);
    return id;
  }

  const Cap& flow(std::size_t id) const { return edges_[id].flow; }
  const Cap& capacity(std::size_t id) const { return edges_[id].cap; }

  Cap run(std::size_t s, std::size_t t) {
    Cap total{};
    while (bfs(s, t)) {
      it_.assign(adj_.size(), 0);
      for (;;) {
        auto pushed = dfs(s, t, std::nullopt);
        if (!pushed || *pushed <= Cap{}) break;
        total += *pushed;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    Cap cap;
    Cap flow;
  };

  Cap residual(const Edge& e) const { return e.cap - e.flow; }

  bool bfs(std::size_t s, std::size_t t) {
    level_.assign(adj_.size(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t id : adj_[u]) {
        const Edge& e = edges_[id];
        if (level_[e.to] < 0 && residual(e) > Cap{}) {
          level_[e.to] = level_[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // `limit` empty means unbounded (the source has no cap of its own).
  std::optional<Cap> dfs(std::size_t u, std::size_t t, const std::optional<Cap>& limit) {
    if (u == t) return limit;
    for (std::size_t& k = it_[u]; k < adj_[u].size(); ++k) {
      std::size_t id = adj_[u][k];
      Edge& e = edges_[id];
      if (level_[e.to] != level_[u] + 1) continue;
      Cap r = residual(e);
      if (r <= Cap{}) continue;
      Cap lim = limit ? std::min(*limit, r) : r;
      auto got = dfs(e.to, t, lim);
      if (got && *got > Cap{}) {
        e.flow += *got;
        edges_[id ^ 1].flow -= *got;
        return got;
      }
    }
    return Cap{};
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

/// Circulation-style feasibility for s-t flows with lower and upper bounds.
template <class Cap>
class BoundedFlow {
 public:
  explicit BoundedFlow(std::size_t nodes) : n_(nodes), excess_(nodes) {}

  std::size_t add_edge(std::size_t u, std::size_t v, Cap lo, Cap hi) {
    edges_.push_back({u, v, lo, hi});
    excess_[v] += lo;
    excess_[u] -= lo;
    return edges_.size() - 1;
  }

  /// Finds a feasible s-t flow of any value; returns per-edge flows or
  /// nullopt when the bounds cannot be met.
  std::optional<std::vector<Cap>> feasible(std::size_t s, std::size_t t) {
    MaxFlow<Cap> net(n_ + 2);
    const std::size_t ss = n_;
    const std::size_t tt = n_ + 1;
    std::vector<std::size_t> ids;
    ids.reserve(edges_.size());
    Cap total_cap{};
    for (const auto& e : edges_) {
      ids.push_back(net.add_edge(e.u, e.v, e.hi - e.lo));
      total_cap += e.hi;
    }
    net.add_edge(t, s, total_cap + Cap(1));
    Cap demand{};
    for (std::size_t v = 0; v < n_; ++v) {
      if (excess_[v] > Cap{}) {
        net.add_edge(ss, v, excess_[v]);
        demand += excess_[v];
      } else if (excess_[v] < Cap{}) {
        net.add_edge(v, tt, -excess_[v]);
      }
    }
    if (net.run(ss, tt) != demand) return std::nullopt;
    std::vector<Cap> out(edges_.size());
    for (std::size_t k = 0; k < edges_.size(); ++k) out[k] = edges_[k].lo + net.flow(ids[k]);
    return out;
  }

 private:
  struct Edge {
    std::size_t u;
    std::size_t v;
    Cap lo;
    Cap hi;
  };
  std::size_t n_;
  std::vector<Cap> excess_;
  std::vector<Edge> edges_;
};

}  // namespace mba
