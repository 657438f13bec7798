#pragma once

// Instance model for Maximum Budgeted Allocation and the solution types shared
// by every algorithm: integral assignments, assignment-LP solutions and
// configuration-LP solutions, together with their valuations.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/rational.hpp"

namespace mba {

struct Player {
  std::string id;
  Rational budget;
};

/// Immutable MBA instance. Prices are stored densely (unset = 0); the per-item
/// and per-player supports list the pairs with a positive price.
class Instance {
 public:
  Instance() = default;

  std::size_t num_players() const { return players_.size(); }
  std::size_t num_items() const { return items_.size(); }

  const Player& player(std::size_t i) const { return players_.at(i); }
  const std::string& player_id(std::size_t i) const { return players_.at(i).id; }
  const Rational& budget(std::size_t i) const { return players_[i].budget; }
  const std::string& item_id(std::size_t j) const { return items_.at(j); }
  const Rational& price(std::size_t i, std::size_t j) const { return prices_[i * items_.size() + j]; }

  /// Players with a positive price for item j, ascending.
  const std::vector<std::size_t>& item_support(std::size_t j) const { return item_support_[j]; }
  /// Items with a positive price for player i, ascending.
  const std::vector<std::size_t>& player_support(std::size_t i) const { return player_support_[i]; }

  /// Position of item j in the lexicographic order of item ids; used to break
  /// price ties deterministically.
  std::size_t item_rank(std::size_t j) const { return item_rank_[j]; }

  std::optional<std::size_t> find_player(const std::string& id) const {
    auto it = player_index_.find(id);
    if (it == player_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_item(const std::string& id) const {
    auto it = item_index_.find(id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_player(const std::string& id) const {
    auto i = find_player(id);
    if (!i) throw ValidationError("unknown player id: " + id);
    return *i;
  }
  std::size_t require_item(const std::string& id) const {
    auto j = find_item(id);
    if (!j) throw ValidationError("unknown item id: " + id);
    return *j;
  }

  void check_player(std::size_t i) const {
    if (i >= players_.size()) throw ValidationError("player index out of range: " + std::to_string(i));
  }
  void check_item(std::size_t j) const {
    if (j >= items_.size()) throw ValidationError("item index out of range: " + std::to_string(j));
  }

  /// True when item a precedes item b for player i in non-increasing price
  /// order (ties by item id).
  bool price_order(std::size_t i, std::size_t a, std::size_t b) const {
    const Rational& pa = price(i, a);
    const Rational& pb = price(i, b);
    if (pa != pb) return pa > pb;
    return item_rank_[a] < item_rank_[b];
  }

 private:
  friend class InstanceBuilder;

  std::vector<Player> players_;
  std::vector<std::string> items_;
  std::vector<Rational> prices_;
  std::vector<std::vector<std::size_t>> item_support_;
  std::vector<std::vector<std::size_t>> player_support_;
  std::vector<std::size_t> item_rank_;
  std::unordered_map<std::string, std::size_t> player_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
};

/// Incremental construction with validation deferred to build().
class InstanceBuilder {
 public:
  std::size_t add_player(std::string id, Rational budget) {
    players_.push_back({std::move(id), std::move(budget)});
    return players_.size() - 1;
  }
  std::size_t add_item(std::string id) {
    items_.push_back(std::move(id));
    return items_.size() - 1;
  }
  void set_price(std::size_t player, std::size_t item, Rational price) {
    prices_.push_back({player, item, std::move(price)});
  }

  /// Validates ids, indices and signs. Prices above the player's budget are
  /// clamped to the budget; a message is appended to `warnings` for each.
  Instance build(std::vector<std::string>* warnings = nullptr) const {
    Instance inst;
    inst.players_ = players_;
    inst.items_ = items_;
    const std::size_t n = players_.size();
    const std::size_t m = items_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (players_[i].budget.sign() < 0) throw ValidationError("negative budget for player " + players_[i].id);
      if (!inst.player_index_.emplace(players_[i].id, i).second) {
        throw ValidationError("duplicate player id: " + players_[i].id);
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!inst.item_index_.emplace(items_[j], j).second) throw ValidationError("duplicate item id: " + items_[j]);
    }
    inst.prices_.assign(n * m, Rational());
    std::vector<bool> seen(n * m, false);
    for (const auto& entry : prices_) {
      if (entry.player >= n) throw ValidationError("price references unknown player index");
      if (entry.item >= m) throw ValidationError("price references unknown item index");
      std::size_t k = entry.player * m + entry.item;
      if (seen[k]) {
        throw ValidationError("duplicate price for (" + players_[entry.player].id + ", " + items_[entry.item] + ")");
      }
      seen[k] = true;
      if (entry.price.sign() < 0) {
        throw ValidationError("negative price for (" + players_[entry.player].id + ", " + items_[entry.item] + ")");
      }
      Rational p = entry.price;
      const Rational& b = players_[entry.player].budget;
      if (p > b) {
        if (warnings) {
          warnings->push_back("price " + p.str() + " for (" + players_[entry.player].id + ", " + items_[entry.item] +
                              ") exceeds budget " + b.str() + "; clamped");
        }
        p = b;
      }
      inst.prices_[k] = std::move(p);
    }
    inst.item_support_.assign(m, {});
    inst.player_support_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (inst.prices_[i * m + j].sign() > 0) {
          inst.item_support_[j].push_back(i);
          inst.player_support_[i].push_back(j);
        }
      }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items_[a] < items_[b]; });
    inst.item_rank_.assign(m, 0);
    for (std::size_t r = 0; r < m; ++r) inst.item_rank_[order[r]] = r;
    return inst;
  }

 private:
  struct PriceEntry {
    std::size_t player;
    std::size_t item;
    Rational price;
  };
  std::vector<Player> players_;
  std::vector<std::string> items_;
  std::vector<PriceEntry> prices_;
};

/// Integral allocation: each item is owned by at most one player.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t num_items) : owner_(num_items) {}

  std::size_t num_items() const { return owner_.size(); }
  const std::optional<std::size_t>& owner(std::size_t item) const { return owner_.at(item); }
  void assign(std::size_t item, std::size_t player) { owner_.at(item) = player; }
  void unassign(std::size_t item) { owner_.at(item).reset(); }

  /// Items owned by `player`, ascending.
  std::vector<std::size_t> items_of(std::size_t player) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < owner_.size(); ++j) {
      if (owner_[j] == player) out.push_back(j);
    }
    return out;
  }

  void validate(const Instance& inst) const {
    if (owner_.size() != inst.num_items()) throw ValidationError("assignment size does not match instance");
    for (const auto& o : owner_) {
      if (o && *o >= inst.num_players()) throw ValidationError("assignment references unknown player");
    }
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<std::optional<std::size_t>> owner_;
};

/// Assignment-LP solution x over real players plus the dummy player, which
/// absorbs whatever part of an item the real players do not take.
class FractionalAssignment {
 public:
  FractionalAssignment() = default;
  FractionalAssignment(std::size_t num_players, std::size_t num_items)
      : n_(num_players), m_(num_items), x_(num_players * num_items), dummy_(num_items) {}

  std::size_t num_players() const { return n_; }
  std::size_t num_items() const { return m_; }

  const Rational& at(std::size_t i, std::size_t j) const { return x_[i * m_ + j]; }
  void set(std::size_t i, std::size_t j, Rational v) { x_[i * m_ + j] = std::move(v); }
  void add(std::size_t i, std::size_t j, const Rational& v) { x_[i * m_ + j] += v; }

  const Rational& dummy(std::size_t j) const { return dummy_[j]; }
  void set_dummy(std::size_t j, Rational v) { dummy_[j] = std::move(v); }

  /// Sum over real players.
  Rational item_total(std::size_t j) const {
    Rational s;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, j);
    return s;
  }
  Rational player_mass(std::size_t i) const {
    Rational s;
    for (std::size_t j = 0; j < m_; ++j) s += at(i, j);
    return s;
  }

  /// Sets the dummy share of each item to 1 - (real share).
  void complete_with_dummy() {
    for (std::size_t j = 0; j < m_; ++j) dummy_[j] = Rational(1) - item_total(j);
  }

  /// 0 <= x <= 1, per-item real share <= 1 and dummy share consistent when set.
  void validate(const Instance& inst) const {
    if (n_ != inst.num_players() || m_ != inst.num_items()) {
      throw ValidationError("fractional assignment dimensions do not match instance");
    }
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) {
        const Rational& v = at(i, j);
        if (v.sign() < 0 || v > Rational(1)) throw ValidationError("x out of [0,1]");
      }
      Rational total = item_total(j);
      if (total > Rational(1)) throw ValidationError("item " + inst.item_id(j) + " assigned more than once");
      if (dummy_[j].sign() < 0 || total + dummy_[j] > Rational(1)) {
        throw ValidationError("dummy share inconsistent for item " + inst.item_id(j));
      }
    }
  }

  friend bool operator==(const FractionalAssignment&, const FractionalAssignment&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<Rational> x_;
  std::vector<Rational> dummy_;
};

/// Key of a configuration column: a player and a sorted item set.
struct ConfigKey {
  std::size_t player = 0;
  std::vector<std::size_t> items;

  friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
  friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
};

/// Configuration-LP solution y: sparse map (player, item set) -> weight.
class ConfigurationSolution {
 public:
  using Map = std::map<ConfigKey, Rational>;

  /// Adds `weight` to the configuration (player, items); items need not be
  /// sorted. Zero-weight entries are dropped.
  void add(std::size_t player, std::vector<std::size_t> items, const Rational& weight) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    ConfigKey key{player, std::move(items)};
    auto it = weights_.find(key);
    if (it == weights_.end()) {
      if (!weight.is_zero()) weights_.emplace(std::move(key), weight);
      return;
    }
    it->second += weight;
    if (it->second.is_zero()) weights_.erase(it);
  }

  Rational weight(std::size_t player, std::vector<std::size_t> items) const {
    std::sort(items.begin(), items.end());
    auto it = weights_.find(ConfigKey{player, std::move(items)});
    return it == weights_.end() ? Rational() : it->second;
  }

  const Map& entries() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  Rational player_mass(std::size_t player) const {
    Rational s;
    for (const auto& [key, w] : weights_) {
      if (key.player == player) s += w;
    }
    return s;
  }

  Rational item_mass(std::size_t item) const {
    Rational s;
    for (const auto& [key, w] : weights_) {
      if (std::binary_search(key.items.begin(), key.items.end(), item)) s += w;
    }
    return s;
  }

  /// x_ij = total weight of player i's configurations containing j.
  FractionalAssignment marginals(std::size_t num_players, std::size_t num_items) const {
    FractionalAssignment x(num_players, num_items);
    for (const auto& [key, w] : weights_) {
      for (std::size_t j : key.items) x.add(key.player, j, w);
    }
    x.complete_with_dummy();
    return x;
  }

  void validate(const Instance& inst) const {
    std::vector<Rational> pmass(inst.num_players());
    std::vector<Rational> imass(inst.num_items());
    for (const auto& [key, w] : weights_) {
      inst.check_player(key.player);
      if (w.sign() < 0) throw ValidationError("negative configuration weight");
      for (std::size_t j : key.items) {
        inst.check_item(j);
        imass[j] += w;
      }
      pmass[key.player] += w;
    }
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      if (pmass[i] > Rational(1)) throw ValidationError("player " + inst.player_id(i) + " has configuration mass > 1");
    }
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      if (imass[j] > Rational(1)) throw ValidationError("item " + inst.item_id(j) + " has configuration mass > 1");
    }
  }

  friend bool operator==(const ConfigurationSolution&, const ConfigurationSolution&) = default;

 private:
  Map weights_;
};

struct InstanceClass {
  bool is_graph = false;
  bool is_restricted = false;
  bool is_uniform_budget = false;
};

struct FracValue {
  std::vector<Rational> per_player;
  Rational total;
};

// ---------------------------------------------------------------------------
// Valuations

/// w_i(C) = min(sum of prices, budget).
inline Rational config_value(const Instance& inst, std::size_t player, std::span<const std::size_t> items) {
  inst.check_player(player);
  Rational sum;
  for (std::size_t j : items) {
    inst.check_item(j);
    sum += inst.price(player, j);
  }
  return min(sum, inst.budget(player));
}

inline Rational config_value(const Instance& inst, const std::string& player, const std::vector<std::string>& items) {
  std::vector<std::size_t> idx;
  idx.reserve(items.size());
  for (const auto& id : items) idx.push_back(inst.require_item(id));
  return config_value(inst, inst.require_player(player), idx);
}

inline std::vector<Rational> player_values(const Instance& inst, const Assignment& a) {
  a.validate(inst);
  std::vector<Rational> load(inst.num_players());
  for (std::size_t j = 0; j < a.num_items(); ++j) {
    if (a.owner(j)) load[*a.owner(j)] += inst.price(*a.owner(j), j);
  }
  for (std::size_t i = 0; i < load.size(); ++i) load[i] = min(load[i], inst.budget(i));
  return load;
}

inline Rational assignment_value(const Instance& inst, const Assignment& a) {
  Rational total;
  for (const auto& v : player_values(inst, a)) total += v;
  return total;
}

/// Val_i(x) = sum_j x_ij p_ij, no budget cap.
inline FracValue frac_value(const Instance& inst, const FractionalAssignment& x) {
  FracValue out;
  out.per_player.assign(inst.num_players(), Rational());
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    for (std::size_t j : inst.player_support(i)) out.per_player[i] += x.at(i, j) * inst.price(i, j);
    out.total += out.per_player[i];
  }
  return out;
}

/// Val_i(y) = sum_C w_i(C) y_iC.
inline FracValue config_frac_value(const Instance& inst, const ConfigurationSolution& y) {
  FracValue out;
  out.per_player.assign(inst.num_players(), Rational());
  for (const auto& [key, w] : y.entries()) {
    out.per_player.at(key.player) += config_value(inst, key.player, key.items) * w;
  }
  for (const auto& v : out.per_player) out.total += v;
  return out;
}

// ---------------------------------------------------------------------------
// Classification

inline InstanceClass classify(const Instance& inst) {
  InstanceClass c;
  c.is_graph = true;
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    if (inst.item_support(j).size() > 2) c.is_graph = false;
  }
  c.is_uniform_budget = true;
  for (std::size_t i = 1; i < inst.num_players(); ++i) {
    if (inst.budget(i) != inst.budget(0)) c.is_uniform_budget = false;
  }
  bool common_prices = true;
  for (std::size_t j = 0; j < inst.num_items() && common_prices; ++j) {
    const auto& sup = inst.item_support(j);
    for (std::size_t k = 1; k < sup.size(); ++k) {
      if (inst.price(sup[k], j) != inst.price(sup[0], j)) {
        common_prices = false;
        break;
      }
    }
  }
  c.is_restricted = c.is_uniform_budget && common_prices;
  return c;
}

/// Common price p_j of an item in a restricted instance (0 if unsupported).
inline Rational restricted_price(const Instance& inst, std::size_t j) {
  const auto& sup = inst.item_support(j);
  return sup.empty() ? Rational() : inst.price(sup.front(), j);
}

/// Throws unless the instance is restricted with every budget equal to 1.
inline void require_unit_restricted(const Instance& inst) {
  if (!classify(inst).is_restricted) throw ClassificationError("instance is not restricted MBA");
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    if (inst.budget(i) != Rational(1)) {
      throw PreconditionError("restricted instance must have budgets scaled to 1");
    }
  }
}

/// Big items {j : p_j >= 1 - beta} of a unit-budget restricted instance.
inline std::vector<bool> big_items(const Instance& inst, const Rational& beta) {
  require_unit_restricted(inst);
  if (beta.sign() <= 0 || beta > Rational(1, 3)) throw PreconditionError("beta must lie in (0, 1/3]");
  std::vector<bool> big(inst.num_items(), false);
  Rational threshold = Rational(1) - beta;
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    big[j] = !inst.item_support(j).empty() && restricted_price(inst, j) >= threshold;
  }
  return big;
}

}  // namespace mba
