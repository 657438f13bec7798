#pragma once

// Assignment LP and configuration LP of an MBA instance, exact pricing for
// column generation, and the prefix projection from configurations to x.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/instance.hpp"
#include "mba/lp.hpp"
#include "mba/rational.hpp"

namespace mba {

// ---------------------------------------------------------------------------
// Assignment LP

/// Column (player, item); player == num_players() is the dummy player.
struct AssignmentLpModel {
  LinearProgram lp;
  std::vector<std::pair<std::size_t, std::size_t>> columns;
  std::size_t dummy = 0;
};

/// Builds the assignment LP over the selected players and items (all when the
/// masks are empty). Unselected items are left out of the model entirely.
inline AssignmentLpModel build_assignment_lp(const Instance& inst, const std::vector<bool>& players = {},
                                             const std::vector<bool>& items = {}) {
  const std::size_t n = inst.num_players();
  const std::size_t m = inst.num_items();
  auto player_on = [&](std::size_t i) { return players.empty() || players[i]; };
  auto item_on = [&](std::size_t j) { return items.empty() || items[j]; };
  AssignmentLpModel model;
  model.dummy = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!player_on(i)) continue;
    for (std::size_t j : inst.player_support(i)) {
      if (!item_on(j)) continue;
      model.columns.emplace_back(i, j);
      model.lp.objective.push_back(inst.price(i, j));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!item_on(j)) continue;
    model.columns.emplace_back(n, j);
    model.lp.objective.push_back(Rational());
  }
  const std::size_t cols = model.columns.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!player_on(i)) continue;
    std::vector<Rational> row(cols);
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      if (model.columns[c].first == i) {
        row[c] = inst.price(i, model.columns[c].second);
        any = true;
      }
    }
    if (any) model.lp.add_constraint(std::move(row), Relation::LessEq, inst.budget(i));
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!item_on(j)) continue;
    std::vector<Rational> row(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      if (model.columns[c].second == j) row[c] = Rational(1);
    }
    model.lp.add_constraint(std::move(row), Relation::Equal, Rational(1));
  }
  return model;
}

/// Optimal assignment-LP solution. Items outside `items` get dummy share 1.
inline FractionalAssignment solve_assignment_lp(const Instance& inst, const std::vector<bool>& players = {},
                                                const std::vector<bool>& items = {}) {
  AssignmentLpModel model = build_assignment_lp(inst, players, items);
  FractionalAssignment x(inst.num_players(), inst.num_items());
  for (std::size_t j = 0; j < inst.num_items(); ++j) x.set_dummy(j, Rational(1));
  if (model.columns.empty()) return x;
  auto sol = solve_exact(model.lp);
  if (sol.status != LpStatus::Optimal) throw InvariantError("assignment LP must be feasible and bounded");
  for (std::size_t c = 0; c < model.columns.size(); ++c) {
    auto [i, j] = model.columns[c];
    if (i == model.dummy) {
      x.set_dummy(j, sol.primal[c]);
    } else {
      x.set(i, j, sol.primal[c]);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Prefix projection

/// Items of `config` in non-increasing price order for `player`, ties by item id.
inline std::vector<std::size_t> price_sorted(const Instance& inst, std::size_t player,
                                             std::vector<std::size_t> config) {
  std::sort(config.begin(), config.end(),
            [&](std::size_t a, std::size_t b) { return inst.price_order(player, a, b); });
  return config;
}

/// Fraction of each item of `config` that lies below the budget when items are
/// taken in non-increasing price order: 1 while the running total stays within
/// the budget, (B - prefix)/p for the crossing item, 0 afterwards.
inline std::vector<std::pair<std::size_t, Rational>> below_budget_fractions(const Instance& inst,
                                                                           std::size_t player,
                                                                           const std::vector<std::size_t>& config) {
  std::vector<std::pair<std::size_t, Rational>> out;
  const Rational& budget = inst.budget(player);
  Rational prefix;
  bool crossed = false;
  for (std::size_t j : price_sorted(inst, player, config)) {
    const Rational& p = inst.price(player, j);
    if (crossed) {
      out.emplace_back(j, Rational());
    } else if (prefix + p <= budget) {
      out.emplace_back(j, Rational(1));
      prefix += p;
    } else {
      out.emplace_back(j, (budget - prefix) / p);
      crossed = true;
    }
  }
  return out;
}

inline FractionalAssignment project_to_assignment(const Instance& inst, const ConfigurationSolution& y) {
  y.validate(inst);
  FractionalAssignment x(inst.num_players(), inst.num_items());
  for (const auto& [key, w] : y.entries()) {
    for (const auto& [j, f] : below_budget_fractions(inst, key.player, key.items)) {
      if (!f.is_zero()) x.add(key.player, j, f * w);
    }
  }
  x.complete_with_dummy();
  return x;
}

// ---------------------------------------------------------------------------
// Configuration LP

struct PricedConfiguration {
  std::vector<std::size_t> items;
  Rational reduced_cost;
};

/// argmax_C w_i(C) - sum_{j in C} dual_j - player_dual, exactly, by
/// branch-and-bound over items with p_ij - dual_j > 0 (no other item can
/// raise the objective).
inline PricedConfiguration price_configuration(const Instance& inst, std::size_t player,
                                               const std::vector<Rational>& item_duals, const Rational& player_dual) {
  inst.check_player(player);
  if (item_duals.size() != inst.num_items()) throw ValidationError("item dual count does not match instance");
  if (player_dual.sign() < 0) throw PreconditionError("duals must be nonnegative");
  for (const auto& d : item_duals) {
    if (d.sign() < 0) throw PreconditionError("duals must be nonnegative");
  }
  struct Cand {
    std::size_t item;
    Rational price;
    Rational dual;
    Rational gain;
  };
  std::vector<Cand> cands;
  for (std::size_t j : inst.player_support(player)) {
    Rational gain = inst.price(player, j) - item_duals[j];
    if (gain.sign() > 0) cands.push_back({j, inst.price(player, j), item_duals[j], gain});
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    return inst.item_rank(a.item) < inst.item_rank(b.item);
  });
  std::vector<Rational> suffix(cands.size() + 1);
  for (std::size_t k = cands.size(); k-- > 0;) suffix[k] = suffix[k + 1] + cands[k].gain;

  const Rational& budget = inst.budget(player);
  Rational best_value;  // empty configuration
  std::vector<std::size_t> best_set;
  std::vector<std::size_t> current;

  auto recurse = [&](auto&& self, std::size_t k, const Rational& p_sum, const Rational& d_sum) -> void {
    Rational value = min(p_sum, budget) - d_sum;
    if (value > best_value) {
      best_value = value;
      best_set = current;
    }
    if (k == cands.size()) return;
    Rational bound = min(p_sum - d_sum + suffix[k], budget - d_sum);
    if (bound <= best_value) return;
    // Once the budget is reached further items only add duals.
    if (p_sum >= budget) return;
    current.push_back(cands[k].item);
    self(self, k + 1, p_sum + cands[k].price, d_sum + cands[k].dual);
    current.pop_back();
    self(self, k + 1, p_sum, d_sum);
  };
  recurse(recurse, 0, Rational(), Rational());
  std::sort(best_set.begin(), best_set.end());
  return {std::move(best_set), best_value - player_dual};
}

namespace detail {

struct ConfigColumn {
  std::size_t player;
  std::vector<std::size_t> items;
  Rational value;
};

struct MasterResult {
  std::vector<Rational> weights;
  std::vector<Rational> player_duals;
  std::vector<Rational> item_duals;
  Rational objective;
};

inline MasterResult solve_config_master(const Instance& inst, const std::vector<ConfigColumn>& cols) {
  const std::size_t n = inst.num_players();
  const std::size_t m = inst.num_items();
  LinearProgram lp;
  lp.objective.reserve(cols.size());
  for (const auto& c : cols) lp.objective.push_back(c.value);
  std::vector<std::vector<Rational>> prow(n, std::vector<Rational>(cols.size()));
  std::vector<std::vector<Rational>> irow(m, std::vector<Rational>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    prow[cols[k].player][k] = Rational(1);
    for (std::size_t j : cols[k].items) irow[j][k] = Rational(1);
  }
  for (auto& r : prow) lp.add_constraint(std::move(r), Relation::LessEq, Rational(1));
  for (auto& r : irow) lp.add_constraint(std::move(r), Relation::LessEq, Rational(1));
  auto sol = solve_exact(lp);
  if (sol.status != LpStatus::Optimal) throw InvariantError("configuration master must be feasible and bounded");
  MasterResult out;
  out.weights = std::move(sol.primal);
  out.player_duals.assign(sol.dual.begin(), sol.dual.begin() + static_cast<std::ptrdiff_t>(n));
  out.item_duals.assign(sol.dual.begin() + static_cast<std::ptrdiff_t>(n), sol.dual.end());
  out.objective = sol.objective;
  return out;
}

inline ConfigurationSolution to_solution(const std::vector<ConfigColumn>& cols, const std::vector<Rational>& w) {
  ConfigurationSolution y;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (w[k].sign() > 0 && !cols[k].items.empty()) y.add(cols[k].player, cols[k].items, w[k]);
  }
  return y;
}

/// Non-dominated configurations of one player: subsets of the player's
/// support, skipping over-budget sets that stay at or above the budget after
/// dropping their cheapest item (same value, more items).
inline void enumerate_player_configs(const Instance& inst, std::size_t player, std::vector<ConfigColumn>& out) {
  std::vector<std::size_t> sup = price_sorted(inst, player, inst.player_support(player));
  const Rational& budget = inst.budget(player);
  std::vector<std::size_t> current;
  // Items are visited in non-increasing price order, so the last item added is
  // the cheapest of the set.
  auto recurse = [&](auto&& self, std::size_t k, const Rational& sum) -> void {
    if (k == sup.size()) {
      if (!current.empty()) {
        std::vector<std::size_t> items = current;
        std::sort(items.begin(), items.end());
        out.push_back({player, std::move(items), min(sum, budget)});
      }
      return;
    }
    self(self, k + 1, sum);
    if (sum >= budget) return;  // adding more keeps the set dominated
    current.push_back(sup[k]);
    self(self, k + 1, sum + inst.price(player, sup[k]));
    current.pop_back();
  };
  recurse(recurse, 0, Rational());
}

}  // namespace detail

/// Exact configuration-LP optimum over every configuration of every player.
/// Dominated configurations (those containing an item that can be dropped
/// without lowering w_i) are left out; they never change the optimum.
inline ConfigurationSolution enumerate_config_lp(const Instance& inst, std::size_t max_items = 16) {
  if (inst.num_items() > max_items) {
    throw SizeError("configuration enumeration limited to " + std::to_string(max_items) + " items (instance has " +
                    std::to_string(inst.num_items()) + "); use column generation");
  }
  std::vector<detail::ConfigColumn> pool;
  for (std::size_t i = 0; i < inst.num_players(); ++i) detail::enumerate_player_configs(inst, i, pool);
  constexpr std::size_t kDirectLimit = 3000;
  if (pool.size() <= kDirectLimit) {
    auto res = detail::solve_config_master(inst, pool);
    return detail::to_solution(pool, res.weights);
  }
  // Large pools: delayed column generation, pricing by scanning the pool.
  std::vector<detail::ConfigColumn> active;
  std::vector<bool> in_master(pool.size(), false);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (pool[k].items.size() == 1) {
      active.push_back(pool[k]);
      in_master[k] = true;
    }
  }
  for (;;) {
    auto res = detail::solve_config_master(inst, active);
    std::vector<std::optional<std::pair<Rational, std::size_t>>> best(inst.num_players());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (in_master[k]) continue;
      Rational rc = pool[k].value - res.player_duals[pool[k].player];
      for (std::size_t j : pool[k].items) rc -= res.item_duals[j];
      auto& b = best[pool[k].player];
      if (rc.sign() > 0 && (!b || rc > b->first)) b = std::make_pair(rc, k);
    }
    bool added = false;
    for (const auto& b : best) {
      if (!b) continue;
      active.push_back(pool[b->second]);
      in_master[b->second] = true;
      added = true;
    }
    if (!added) return detail::to_solution(active, res.weights);
  }
}

struct ColgenOptions {
  Rational tolerance;                   // add a column only if its reduced cost exceeds this
  std::optional<std::size_t> max_iter;  // default 10 * n * m
};

/// Restricted master over singletons and empty configurations, extended with
/// the best-priced configuration of every player until no reduced cost is
/// positive. With tolerance 0 the result is an exact optimum.
inline ConfigurationSolution colgen_config_lp(const Instance& inst, const ColgenOptions& opts = {}) {
  const std::size_t n = inst.num_players();
  const std::size_t cap = opts.max_iter.value_or(std::max<std::size_t>(1, 10 * n * inst.num_items()));
  std::vector<detail::ConfigColumn> cols;
  std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    cols.push_back({i, {}, Rational()});
    seen.insert({i, {}});
    for (std::size_t j : inst.player_support(i)) {
      cols.push_back({i, {j}, inst.price(i, j)});
      seen.insert({i, {j}});
    }
  }
  for (std::size_t iter = 0; iter < cap; ++iter) {
    auto res = detail::solve_config_master(inst, cols);
    bool added = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto priced = price_configuration(inst, i, res.item_duals, res.player_duals[i]);
      if (priced.reduced_cost <= opts.tolerance) continue;
      if (!seen.insert({i, priced.items}).second) {
        throw InvariantError("pricing returned a column already in the master");
      }
      Rational value = config_value(inst, i, priced.items);
      cols.push_back({i, std::move(priced.items), std::move(value)});
      added = true;
    }
    if (!added) return detail::to_solution(cols, res.weights);
  }
  throw ConvergenceError("column generation exceeded " + std::to_string(cap) + " iterations");
}

}  // namespace mba
