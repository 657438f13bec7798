#pragma once

// Graph MBA (every item priced for at most two players): configuration
// sampling with conflict resolution (primary assignment) and argmax
// placement of the leftovers (secondary assignment).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/instance.hpp"
#include "mba/rational.hpp"
#include "mba/relax.hpp"
#include "mba/rng.hpp"

namespace mba {

struct GraphParams {
  Rational delta{17, 125};

  Rational lambda() const { return delta * (Rational(1) - delta); }
  /// 1 - 2δ + 2δ² - 3/4: margin of almost-integral items over 3/4.
  Rational integral_margin() const { return Rational(1) - Rational(2) * delta + Rational(2) * delta * delta - Rational(3, 4); }
  /// δ²(1-δ)²: margin available to the remaining items.
  Rational fractional_margin() const { return lambda() * lambda(); }

  void validate() const {
    if (delta.sign() <= 0 || delta >= Rational(1, 2)) throw PreconditionError("delta must lie in (0, 1/2)");
  }
};

/// Grid search over δ = k/1000, k = 1..499, maximising
/// min{1 - 2δ + 2δ² - 3/4, δ²(1-δ)²}.
inline GraphParams tune_delta() {
  GraphParams best;
  std::optional<Rational> best_value;
  for (std::int64_t k = 1; k < 500; ++k) {
    GraphParams p{Rational(k, 1000)};
    Rational v = min(p.integral_margin(), p.fractional_margin());
    if (!best_value || v > *best_value) {
      best_value = v;
      best = p;
    }
  }
  if (best.integral_margin().sign() <= 0) throw InvariantError("tuned delta violates the 3/4 constraint");
  return best;
}

inline void require_graph(const Instance& inst) {
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    if (inst.item_support(j).size() > 2) {
      throw ClassificationError("item " + inst.item_id(j) + " is priced for more than two players");
    }
  }
}

struct GraphConfig {
  std::vector<std::size_t> items;         // sorted
  std::vector<Rational> contribution;     // p_ijC, aligned with items
  Rational weight;
};

struct ContributionTable {
  std::size_t num_players = 0;
  std::size_t num_items = 0;
  std::vector<std::vector<GraphConfig>> configs;  // per player; masses sum to 1
  std::vector<Rational> x;                        // n x m marginals after completion
  std::vector<Rational> val_ij;                   // n x m

  const Rational& marginal(std::size_t i, std::size_t j) const { return x[i * num_items + j]; }
  const Rational& val(std::size_t i, std::size_t j) const { return val_ij[i * num_items + j]; }
  Rational val_item(std::size_t j) const {
    Rational s;
    for (std::size_t i = 0; i < num_players; ++i) s += val(i, j);
    return s;
  }
  Rational total() const {
    Rational s;
    for (const auto& v : val_ij) s += v;
    return s;
  }
  /// Val_ij / x_ij; empty when x_ij = 0.
  std::optional<Rational> avg(std::size_t i, std::size_t j) const {
    if (marginal(i, j).is_zero()) return std::nullopt;
    return val(i, j) / marginal(i, j);
  }
};

struct ItemSplit {
  std::vector<std::size_t> almost_integral;  // I: max_i x_ij >= 1 - δ
  std::vector<std::size_t> rest;             // H
};

namespace detail {

// Fills every item's marginal up to 1 by adding it to configurations of its
// lowest-id support player that do not contain it yet (the empty padding
// configuration first), splitting a configuration when only part is needed.
inline void complete_items(const Instance& inst, std::vector<std::vector<GraphConfig>>& configs) {
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    const auto& sup = inst.item_support(j);
    Rational have;
    for (std::size_t i : sup) {
      for (const auto& c : configs[i]) {
        if (std::binary_search(c.items.begin(), c.items.end(), j)) have += c.weight;
      }
    }
    Rational need = Rational(1) - have;
    for (std::size_t i : sup) {
      if (need.sign() <= 0) break;
      auto& list = configs[i];
      std::vector<std::size_t> order(list.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_partition(order.begin(), order.end(), [&](std::size_t k) { return list[k].items.empty(); });
      std::vector<GraphConfig> added;
      for (std::size_t k : order) {
        if (need.sign() <= 0) break;
        GraphConfig& c = list[k];
        if (std::binary_search(c.items.begin(), c.items.end(), j)) continue;
        Rational take = min(need, c.weight);
        GraphConfig grown{c.items, {}, take};
        grown.items.insert(std::upper_bound(grown.items.begin(), grown.items.end(), j), j);
        c.weight -= take;
        need -= take;
        added.push_back(std::move(grown));
      }
      for (auto& g : added) list.push_back(std::move(g));
      std::erase_if(list, [](const GraphConfig& c) { return c.weight.is_zero(); });
    }
  }
}

}  // namespace detail

/// Contribution table of y after padding every player with the empty
/// configuration and completing every item's marginal to 1.
inline ContributionTable contributions(const Instance& inst, const ConfigurationSolution& y) {
  require_graph(inst);
  y.validate(inst);
  const std::size_t n = inst.num_players();
  const std::size_t m = inst.num_items();
  ContributionTable t;
  t.num_players = n;
  t.num_items = m;
  t.configs.assign(n, {});
  std::vector<Rational> mass(n);
  for (const auto& [key, w] : y.entries()) {
    t.configs[key.player].push_back({key.items, {}, w});
    mass[key.player] += w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mass[i] < Rational(1)) t.configs[i].push_back({{}, {}, Rational(1) - mass[i]});
  }
  detail::complete_items(inst, t.configs);
  t.x.assign(n * m, Rational());
  t.val_ij.assign(n * m, Rational());
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : t.configs[i]) {
      c.contribution.assign(c.items.size(), Rational());
      for (const auto& [j, f] : below_budget_fractions(inst, i, c.items)) {
        auto pos = static_cast<std::size_t>(std::lower_bound(c.items.begin(), c.items.end(), j) - c.items.begin());
        c.contribution[pos] = f * inst.price(i, j);
      }
      for (std::size_t k = 0; k < c.items.size(); ++k) {
        t.x[i * m + c.items[k]] += c.weight;
        t.val_ij[i * m + c.items[k]] += c.weight * c.contribution[k];
      }
    }
  }
  return t;
}

inline ItemSplit split_items(const ContributionTable& t, const GraphParams& params) {
  ItemSplit s;
  Rational threshold = Rational(1) - params.delta;
  for (std::size_t j = 0; j < t.num_items; ++j) {
    Rational top;
    for (std::size_t i = 0; i < t.num_players; ++i) top = max(top, t.marginal(i, j));
    (top >= threshold ? s.almost_integral : s.rest).push_back(j);
  }
  return s;
}

struct GraphRound {
  Assignment assignment;
  std::vector<std::size_t> chosen;                // configuration index per player
  std::vector<std::optional<std::size_t>> primary;  // primary owner per item
};

/// Pre-processed sampler for one configuration-LP solution.
class GraphRounder {
 public:
  GraphRounder(const Instance& inst, const ConfigurationSolution& y) : inst_(&inst), table_(contributions(inst, y)) {
    const std::size_t n = inst.num_players();
    cumulative_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rational acc;
      for (const auto& c : table_.configs[i]) {
        acc += c.weight;
        cumulative_[i].push_back(acc);
      }
    }
    secondary_.assign(inst.num_items(), std::nullopt);
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      for (std::size_t i : inst.item_support(j)) {
        if (!secondary_[j] || table_.val(i, j) > table_.val(*secondary_[j], j)) secondary_[j] = i;
      }
    }
  }

  const ContributionTable& table() const { return table_; }

  GraphRound round(CounterRng& rng) const {
    const std::size_t n = inst_->num_players();
    const std::size_t m = inst_->num_items();
    GraphRound out{Assignment(m), std::vector<std::size_t>(n), std::vector<std::optional<std::size_t>>(m)};
    std::vector<std::vector<std::size_t>> pickers(m);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t u = rng.next();
      const auto& cum = cumulative_[i];
      std::size_t k = 0;
      while (k + 1 < cum.size() && !CounterRng::below_threshold(u, cum[k])) ++k;
      out.chosen[i] = k;
      for (std::size_t j : table_.configs[i][k].items) pickers[j].push_back(i);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto& who = pickers[j];
      if (who.size() == 1) {
        out.primary[j] = who[0];
      } else if (who.size() == 2) {
        // Player who[0] keeps j with probability x_{who[1], j}.
        out.primary[j] = rng.bernoulli(table_.marginal(who[1], j)) ? who[0] : who[1];
      }
      if (out.primary[j]) {
        out.assignment.assign(j, *out.primary[j]);
      } else if (secondary_[j]) {
        out.assignment.assign(j, *secondary_[j]);
      }
    }
    return out;
  }

 private:
  const Instance* inst_;
  ContributionTable table_;
  std::vector<std::vector<Rational>> cumulative_;
  std::vector<std::optional<std::size_t>> secondary_;
};

inline Assignment round_graph(const Instance& inst, const ConfigurationSolution& y, const GraphParams& params,
                              std::uint64_t seed) {
  params.validate();
  GraphRounder r(inst, y);
  CounterRng rng = CounterRng::stream(seed, 0);
  return r.round(rng).assignment;
}

struct GraphResult {
  Assignment assignment;
  Rational value;
  Rational lp_value;
  Rational mean;  // over all trials
  std::size_t trials = 0;
  ItemSplit split;
};

/// Solves the configuration LP, rounds `trials` times (trial t uses stream
/// (seed, t)) and returns the best assignment, earliest on ties.
inline GraphResult solve_graph(const Instance& inst, std::uint64_t seed, const GraphParams& params = tune_delta(),
                               std::size_t trials = 64) {
  params.validate();
  require_graph(inst);
  if (trials == 0) throw PreconditionError("trials must be positive");
  ConfigurationSolution y = colgen_config_lp(inst);
  GraphRounder r(inst, y);
  GraphResult out;
  out.lp_value = config_frac_value(inst, y).total;
  out.split = split_items(r.table(), params);
  out.trials = trials;
  Rational sum;
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = CounterRng::stream(seed, t);
    Assignment a = r.round(rng).assignment;
    Rational v = assignment_value(inst, a);
    sum += v;
    if (t == 0 || v > out.value) {
      out.value = v;
      out.assignment = std::move(a);
    }
  }
  out.mean = sum / Rational(static_cast<std::int64_t>(trials));
  return out;
}

}  // namespace mba
