#pragma once

// Exact optimum by branch-and-bound, and instance generators: the (p, q)
// integrality-gap family, the Max-2-Lin(2) reduction, random families and a
// synthetic well-structured restricted family.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/flow.hpp"
#include "mba/instance.hpp"
#include "mba/rational.hpp"
#include "mba/rng.hpp"

namespace mba {

// ---------------------------------------------------------------------------
// Exact optimum

struct ExactLimits {
  std::uint64_t node_budget = 10'000'000;
};

struct ExactResult {
  Assignment assignment;
  Rational value;
  std::uint64_t nodes = 0;
};

namespace detail {

/// Items with identical price vectors are interchangeable; the search
/// distributes each type's copies over its support players in nondecreasing
/// option order, so symmetric permutations are visited once.
struct ItemType {
  std::vector<std::size_t> items;
  std::vector<std::size_t> options;  // support players, best price first
  Rational best_price;
};

inline std::vector<ItemType> item_types(const Instance& inst) {
  std::map<std::vector<Rational>, std::size_t> index;
  std::vector<ItemType> types;
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    if (inst.item_support(j).empty()) continue;
    std::vector<Rational> column(inst.num_players());
    for (std::size_t i : inst.item_support(j)) column[i] = inst.price(i, j);
    auto [it, fresh] = index.emplace(std::move(column), types.size());
    if (fresh) {
      ItemType t;
      t.options = inst.item_support(j);
      std::stable_sort(t.options.begin(), t.options.end(),
                       [&](std::size_t a, std::size_t b) { return inst.price(a, j) > inst.price(b, j); });
      t.best_price = inst.price(t.options.front(), j);
      types.push_back(std::move(t));
    }
    types[it->second].items.push_back(j);
  }
  std::stable_sort(types.begin(), types.end(),
                   [](const ItemType& a, const ItemType& b) { return a.best_price > b.best_price; });
  return types;
}

/// Branch-and-bound over item types. N is std::int64_t (all quantities scaled
/// by a common denominator) or Rational.
template <class N>
class ExactSearch {
 public:
  ExactSearch(const Instance& inst, std::vector<ItemType> types, std::vector<std::vector<N>> price, std::vector<N> budget,
              std::uint64_t node_budget)
      : inst_(inst),
        types_(std::move(types)),
        price_(std::move(price)),
        budget_(std::move(budget)),
        node_budget_(node_budget),
        load_(inst.num_players(), N{}),
        choice_(types_.size()) {
    suffix_best_.assign(types_.size() + 1, N{});
    for (std::size_t t = types_.size(); t-- > 0;) {
      suffix_best_[t] = suffix_best_[t + 1] + price_[t][types_[t].options.front()] * N(static_cast<std::int64_t>(types_[t].items.size()));
    }
    for (std::size_t t = 0; t < types_.size(); ++t) choice_[t].resize(types_[t].items.size());
  }

  /// Seeds the incumbent with a greedy assignment (largest marginal gain).
  void greedy() {
    std::vector<N> load(inst_.num_players(), N{});
    for (std::size_t t = 0; t < types_.size(); ++t) {
      for (std::size_t c = 0; c < types_[t].items.size(); ++c) {
        std::size_t best = 0;
        N best_gain{};
        for (std::size_t o = 0; o < types_[t].options.size(); ++o) {
          std::size_t i = types_[t].options[o];
          N gain = std::min(price_[t][i], pos(budget_[i] - load[i]));
          if (o == 0 || gain > best_gain) {
            best = o;
            best_gain = gain;
          }
        }
        choice_[t][c] = best;
        load[types_[t].options[best]] += price_[t][types_[t].options[best]];
      }
    }
    // Keep the copies of one type in nondecreasing option order so the greedy
    // choice is also a point of the symmetry-reduced search space.
    for (auto& ch : choice_) std::sort(ch.begin(), ch.end());
    best_value_ = N{};
    for (std::size_t i = 0; i < load.size(); ++i) best_value_ += std::min(load[i], budget_[i]);
    best_choice_ = choice_;
  }

  void run() {
    value_ = N{};
    recurse(0, 0, 0);
  }

  std::uint64_t nodes() const { return nodes_; }
  const N& best_value() const { return best_value_; }

  Assignment best_assignment() const {
    Assignment a(inst_.num_items());
    for (std::size_t t = 0; t < types_.size(); ++t) {
      for (std::size_t c = 0; c < types_[t].items.size(); ++c) {
        a.assign(types_[t].items[c], types_[t].options[best_choice_[t][c]]);
      }
    }
    return a;
  }

 private:
  static N pos(const N& v) { return v > N{} ? v : N{}; }

  // Upper bound on the value still obtainable from copy `copy` of type `t`
  // onward: a flow from item types through players to the sink, with type
  // capacity count * best price, edge capacity count * p_ij and player
  // capacity equal to the residual budget.
  N flow_bound(std::size_t t, std::size_t copy) {
    const std::size_t n = inst_.num_players();
    MaxFlow<N> net(2 + n);
    const std::size_t s = n;
    const std::size_t sink = n + 1;
    for (std::size_t i = 0; i < n; ++i) {
      N r = pos(budget_[i] - load_[i]);
      if (r > N{}) net.add_edge(i, sink, r);
    }
    for (std::size_t u = t; u < types_.size(); ++u) {
      std::size_t count = types_[u].items.size() - (u == t ? copy : 0);
      if (count == 0) continue;
      std::size_t node = net.add_node();
      N cnt(static_cast<std::int64_t>(count));
      net.add_edge(s, node, cnt * price_[u][types_[u].options.front()]);
      for (std::size_t i : types_[u].options) {
        if (budget_[i] > load_[i]) net.add_edge(node, i, cnt * price_[u][i]);
      }
    }
    return net.run(s, sink);
  }

  void recurse(std::size_t t, std::size_t copy, std::size_t min_option) {
    if (++nodes_ > node_budget_) {
      throw SizeError("exact search exceeded node budget of " + std::to_string(node_budget_));
    }
    while (t < types_.size() && copy == types_[t].items.size()) {
      ++t;
      copy = 0;
      min_option = 0;
    }
    if (t == types_.size()) {
      if (value_ > best_value_) {
        best_value_ = value_;
        best_choice_ = choice_;
      }
      return;
    }
    // Cheap bound, then the flow bound.
    N residual{};
    for (std::size_t i = 0; i < load_.size(); ++i) residual += pos(budget_[i] - load_[i]);
    N remaining = suffix_best_[t + 1] +
                  price_[t][types_[t].options.front()] * N(static_cast<std::int64_t>(types_[t].items.size() - copy));
    if (value_ + std::min(residual, remaining) <= best_value_) return;
    if (value_ + flow_bound(t, copy) <= best_value_) return;

    // Saturated players gain nothing from further items, so they are all
    // equivalent; only the first one is explored.
    const ItemType& ty = types_[t];
    bool saturated_seen = false;
    for (std::size_t o = min_option; o < ty.options.size(); ++o) {
      std::size_t i = ty.options[o];
      if (load_[i] >= budget_[i]) {
        if (saturated_seen) continue;
        saturated_seen = true;
      }
      N before = std::min(load_[i], budget_[i]);
      load_[i] += price_[t][i];
      N gain = std::min(load_[i], budget_[i]) - before;
      value_ += gain;
      choice_[t][copy] = o;
      recurse(t, copy + 1, o);
      value_ -= gain;
      load_[i] -= price_[t][i];
    }
  }

  const Instance& inst_;
  std::vector<ItemType> types_;
  std::vector<std::vector<N>> price_;  // [type][player]
  std::vector<N> budget_;
  std::uint64_t node_budget_;
  std::vector<N> load_;
  N value_{};
  std::vector<std::vector<std::size_t>> choice_;
  std::vector<N> suffix_best_;
  N best_value_{};
  std::vector<std::vector<std::size_t>> best_choice_;
  std::uint64_t nodes_ = 0;
};

/// Common denominator L such that every price and budget times L is an
/// integer and all totals stay far from int64 overflow; nullopt otherwise.
inline std::optional<std::int64_t> integer_scale(const Instance& inst) {
  mpz_class l = 1;
  mpq_class total = 0;
  auto absorb = [&](const Rational& r) {
    mpz_class d = r.denominator();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
    total += r.to_mpq();
  };
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    absorb(inst.budget(i));
    for (std::size_t j : inst.player_support(i)) absorb(inst.price(i, j));
  }
  mpq_class scaled = total * mpq_class(l) * (inst.num_items() + 2);
  if (!l.fits_slong_p() || scaled > mpq_class(mpz_class(1) << 60)) return std::nullopt;
  return static_cast<std::int64_t>(l.get_si());
}

template <class N, class Conv>
ExactResult run_exact(const Instance& inst, std::vector<ItemType> types, std::uint64_t node_budget, Conv conv) {
  std::vector<std::vector<N>> price(types.size(), std::vector<N>(inst.num_players(), N{}));
  for (std::size_t t = 0; t < types.size(); ++t) {
    std::size_t j = types[t].items.front();
    for (std::size_t i : types[t].options) price[t][i] = conv(inst.price(i, j));
  }
  std::vector<N> budget(inst.num_players());
  for (std::size_t i = 0; i < inst.num_players(); ++i) budget[i] = conv(inst.budget(i));
  ExactSearch<N> search(inst, std::move(types), std::move(price), std::move(budget), node_budget);
  search.greedy();
  search.run();
  ExactResult out;
  out.assignment = search.best_assignment();
  out.value = assignment_value(inst, out.assignment);
  out.nodes = search.nodes();
  return out;
}

}  // namespace detail

/// Optimal integral assignment. Every item with a positive price somewhere is
/// given to one of its support players (never worse than leaving it out).
/// Throws SizeError when the search exceeds the node budget.
inline ExactResult exact_opt(const Instance& inst, const ExactLimits& limits = {}) {
  auto types = detail::item_types(inst);
  if (auto scale = detail::integer_scale(inst)) {
    const std::int64_t l = *scale;
    return detail::run_exact<std::int64_t>(inst, std::move(types), limits.node_budget, [l](const Rational& r) {
      mpq_class v = r.to_mpq() * l;
      return static_cast<std::int64_t>(v.get_num().get_si());
    });
  }
  return detail::run_exact<Rational>(inst, std::move(types), limits.node_budget, [](const Rational& r) { return r; });
}

// ---------------------------------------------------------------------------
// Integrality-gap family

struct GapFamily {
  Instance instance;
  ConfigurationSolution certificate;  // configuration-LP solution of value p + q
};

/// q players b_i with budget 1, q players s_i with budget p/q; p items c_j
/// priced 1 for every b_i; q items o_i_k priced 1/q for b_i and s_i.
inline GapFamily gen_gap_with_certificate(std::int64_t p, std::int64_t q) {
  if (p < 1 || q <= p) throw PreconditionError("gap family requires 1 <= p < q");
  InstanceBuilder b;
  std::vector<std::size_t> big(q), small(q);
  for (std::int64_t i = 0; i < q; ++i) big[i] = b.add_player("b" + std::to_string(i + 1), Rational(1));
  for (std::int64_t i = 0; i < q; ++i) small[i] = b.add_player("s" + std::to_string(i + 1), Rational(p, q));
  std::vector<std::size_t> common(p);
  for (std::int64_t j = 0; j < p; ++j) {
    common[j] = b.add_item("c" + std::to_string(j + 1));
    for (std::int64_t i = 0; i < q; ++i) b.set_price(big[i], common[j], Rational(1));
  }
  std::vector<std::vector<std::size_t>> own(q);
  for (std::int64_t i = 0; i < q; ++i) {
    for (std::int64_t k = 0; k < q; ++k) {
      std::size_t j = b.add_item("o" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
      own[i].push_back(j);
      b.set_price(big[i], j, Rational(1, q));
      b.set_price(small[i], j, Rational(1, q));
    }
  }
  GapFamily out{b.build(), {}};
  for (std::int64_t i = 0; i < q; ++i) {
    out.certificate.add(big[i], own[i], Rational(q - p, q));
    for (std::int64_t j = 0; j < p; ++j) out.certificate.add(big[i], {common[j]}, Rational(1, q));
    // s_i takes every cyclic window of p consecutive own items with weight 1/q.
    for (std::int64_t k = 0; k < q; ++k) {
      std::vector<std::size_t> window;
      for (std::int64_t t = 0; t < p; ++t) window.push_back(own[i][(k + t) % q]);
      out.certificate.add(small[i], window, Rational(1, q));
    }
  }
  return out;
}

inline Instance gen_gap(std::int64_t p, std::int64_t q) { return gen_gap_with_certificate(p, q).instance; }

/// Integral optimum p(1 + p/q) + q - p of the gap family.
inline Rational gap_integral_value(std::int64_t p, std::int64_t q) {
  return Rational(p) * (Rational(1) + Rational(p, q)) + Rational(q - p);
}

/// I(p, q) = (p^2 + q^2) / (q^2 + pq).
inline Rational gap_ratio(std::int64_t p, std::int64_t q) { return Rational(p * p + q * q, q * q + p * q); }

// ---------------------------------------------------------------------------
// Max-2-Lin(2)

struct TwoLinEquation {
  std::size_t x;
  std::size_t y;
  int b;
};

struct TwoLinSystem {
  std::vector<std::string> variables;
  std::vector<TwoLinEquation> equations;

  std::size_t variable(const std::string& name) {
    auto it = std::find(variables.begin(), variables.end(), name);
    if (it != variables.end()) return static_cast<std::size_t>(it - variables.begin());
    variables.push_back(name);
    return variables.size() - 1;
  }

  void add(const std::string& x, const std::string& y, int b) {
    if (x == y) throw ValidationError("equation uses the same variable twice: " + x);
    if (b != 0 && b != 1) throw ValidationError("right-hand side must be 0 or 1");
    std::size_t a = variable(x);
    std::size_t c = variable(y);
    equations.push_back({a, c, b});
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(variables.size(), 0);
    for (const auto& e : equations) {
      ++d[e.x];
      ++d[e.y];
    }
    return d;
  }

  bool is_regular() const {
    auto d = degrees();
    return std::adjacent_find(d.begin(), d.end(), std::not_equal_to<>()) == d.end();
  }

  /// One equation "x+y=b" per line; blank lines and '#' comments are ignored.
  static TwoLinSystem parse(std::istream& in) {
    TwoLinSystem sys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::string s;
      for (char ch : line) {
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
      }
      if (s.empty()) continue;
      auto plus = s.find('+');
      auto eq = s.find('=');
      if (plus == std::string::npos || eq == std::string::npos || plus > eq || plus == 0 || eq == plus + 1 ||
          eq + 2 != s.size() || (s[eq + 1] != '0' && s[eq + 1] != '1')) {
        throw ValidationError("line " + std::to_string(lineno) + ": expected x+y=b");
      }
      sys.add(s.substr(0, plus), s.substr(plus + 1, eq - plus - 1), s[eq + 1] - '0');
    }
    return sys;
  }

  static TwoLinSystem parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }
};

struct MaxSatResult {
  std::vector<int> assignment;
  std::size_t satisfied = 0;
  Rational fraction;
};

inline MaxSatResult max_sat_2lin(const TwoLinSystem& sys) {
  const std::size_t v = sys.variables.size();
  if (v > 24) throw SizeError("max_sat_2lin is limited to 24 variables");
  if (sys.equations.empty()) throw PreconditionError("system has no equations");
  MaxSatResult best;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << v); ++mask) {
    std::size_t sat = 0;
    for (const auto& e : sys.equations) {
      int s = static_cast<int>(((mask >> e.x) ^ (mask >> e.y)) & 1U);
      if (s == e.b) ++sat;
    }
    if (mask == 0 || sat > best.satisfied) {
      best.satisfied = sat;
      best.assignment.assign(v, 0);
      for (std::size_t k = 0; k < v; ++k) best.assignment[k] = static_cast<int>((mask >> k) & 1U);
    }
  }
  best.fraction = Rational(static_cast<std::int64_t>(best.satisfied), static_cast<std::int64_t>(sys.equations.size()));
  return best;
}

/// Players <x:0>, <x:1> with budget deg(x) sharing an item of price deg(x);
/// per equation, one unit item for each of the two violating assignments,
/// priced for the two literal players it names.
inline Instance gen_2lin(const TwoLinSystem& sys) {
  auto deg = sys.degrees();
  InstanceBuilder b;
  std::vector<std::array<std::size_t, 2>> lit(sys.variables.size());
  for (std::size_t v = 0; v < sys.variables.size(); ++v) {
    if (deg[v] == 0) throw ValidationError("variable without equations: " + sys.variables[v]);
    Rational d(static_cast<std::int64_t>(deg[v]));
    for (int a = 0; a < 2; ++a) lit[v][a] = b.add_player(sys.variables[v] + ":" + std::to_string(a), d);
    std::size_t item = b.add_item(sys.variables[v]);
    b.set_price(lit[v][0], item, d);
    b.set_price(lit[v][1], item, d);
  }
  for (std::size_t k = 0; k < sys.equations.size(); ++k) {
    const auto& e = sys.equations[k];
    for (int a1 = 0; a1 < 2; ++a1) {
      int a2 = (a1 + e.b + 1) % 2;  // a1 + a2 != b
      std::size_t item = b.add_item("e" + std::to_string(k + 1) + "<" + sys.variables[e.x] + ":" +
                                    std::to_string(a1) + "," + sys.variables[e.y] + ":" + std::to_string(a2) + ">");
      b.set_price(lit[e.x][a1], item, Rational(1));
      b.set_price(lit[e.y][a2], item, Rational(1));
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// Random families

enum class Family { General, Restricted, Graph };

struct PriceProfile {
  enum class Kind { Uniform, Bimodal } kind = Kind::Uniform;
  Rational beta = Rational(1, 3);      // bimodal: big items priced in [1 - beta, 1] of the budget
  Rational big_share = Rational(1, 2);  // bimodal: probability that an item is big
};

inline const char* to_string(Family f) {
  switch (f) {
    case Family::General: return "general";
    case Family::Restricted: return "restricted";
    case Family::Graph: return "graph";
  }
  return "?";
}

namespace detail {

inline std::string padded(char prefix, std::size_t k, std::size_t count) {
  std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  std::ostringstream os;
  os << prefix << std::setw(static_cast<int>(width)) << std::setfill('0') << k;
  return os.str();
}

// Price as a fraction of the budget, on a grid of denominator 24.
inline Rational draw_fraction(CounterRng& rng, const PriceProfile& profile, bool& big) {
  constexpr std::int64_t kDen = 24;
  if (profile.kind == PriceProfile::Kind::Uniform) {
    big = false;
    return Rational(1 + static_cast<std::int64_t>(rng.below(kDen)), kDen);
  }
  big = rng.bernoulli(profile.big_share);
  Rational lo = Rational(1) - profile.beta;
  if (big) {
    // Uniform on the grid points of [1 - beta, 1].
    std::int64_t first = static_cast<std::int64_t>(mpz_class(ceil(lo * Rational(kDen))).get_si());
    std::int64_t count = kDen - first + 1;
    return Rational(first + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(count))), kDen);
  }
  // Strictly below 1 - beta, on a finer grid so small thresholds still leave room.
  Rational cap = lo * Rational(kDen);
  std::int64_t last = static_cast<std::int64_t>(mpz_class(ceil(cap)).get_si()) - 1;
  if (last < 1) return lo / Rational(2);
  return Rational(1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(last))), kDen);
}

}  // namespace detail

/// Deterministic given the seed. Restricted instances have unit budgets and a
/// common price per item; graph instances price each item for one or two
/// players. `big_flags` (optional) receives the profile's big/small draw.
inline Instance gen_random(Family family, std::size_t n, std::size_t m, std::uint64_t seed,
                           const PriceProfile& profile = {}, std::vector<bool>* big_flags = nullptr) {
  if (n < 1 || m < 1) throw PreconditionError("gen_random requires n, m >= 1");
  CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(family) * 0x100000000ULL + n * 0x10000ULL + m);
  InstanceBuilder b;
  std::vector<Rational> budgets(n);
  for (std::size_t i = 0; i < n; ++i) {
    budgets[i] = family == Family::Restricted ? Rational(1) : Rational(1 + static_cast<std::int64_t>(rng.below(3)));
    b.add_player(detail::padded('p', i, n), budgets[i]);
  }
  if (big_flags) big_flags->assign(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t item = b.add_item(detail::padded('j', j, m));
    std::vector<std::size_t> support;
    if (family == Family::Graph) {
      std::size_t first = static_cast<std::size_t>(rng.below(n));
      support.push_back(first);
      if (n > 1 && rng.below(4) != 0) {
        std::size_t second = static_cast<std::size_t>(rng.below(n - 1));
        if (second >= first) ++second;
        support.push_back(second);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.below(5) < 3) support.push_back(i);
      }
      if (support.empty()) support.push_back(static_cast<std::size_t>(rng.below(n)));
    }
    bool big = false;
    if (family == Family::Restricted) {
      Rational p = detail::draw_fraction(rng, profile, big);
      for (std::size_t i : support) b.set_price(i, item, p);
    } else {
      for (std::size_t i : support) {
        bool this_big = false;
        Rational f = detail::draw_fraction(rng, profile, this_big);
        big = big || this_big;
        b.set_price(i, item, f * budgets[i]);
      }
    }
    if (big_flags) (*big_flags)[j] = big;
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// Synthetic well-structured restricted instances

struct WellStructuredFamily {
  Instance instance;
  ConfigurationSolution y;
};

/// Ring of n >= 3 unit-budget players. Big item g_k (price 1) is shared by
/// players k and k+1; each player holds {g_{k-1}} and {g_k} with weight 1/4
/// each, so every player's big mass is exactly 1/2. Small items t_k_0, t_k_1
/// (prices below 1/2) are shared by players k and k+1; player k's small
/// configuration {t_k_0, t_{k-1}_1} has weight 1/2.
inline WellStructuredFamily gen_well_structured(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw PreconditionError("well-structured ring needs at least 3 players");
  CounterRng rng = CounterRng::stream(seed, 0x5757ULL + n);
  InstanceBuilder b;
  for (std::size_t k = 0; k < n; ++k) b.add_player(detail::padded('p', k, n), Rational(1));
  std::vector<std::size_t> big(n), t0(n), t1(n);
  for (std::size_t k = 0; k < n; ++k) {
    big[k] = b.add_item(detail::padded('g', k, n));
    b.set_price(k, big[k], Rational(1));
    b.set_price((k + 1) % n, big[k], Rational(1));
  }
  for (std::size_t k = 0; k < n; ++k) {
    t0[k] = b.add_item(detail::padded('t', k, n) + "_0");
    t1[k] = b.add_item(detail::padded('t', k, n) + "_1");
    Rational p0(1 + static_cast<std::int64_t>(rng.below(11)), 24);
    Rational p1(1 + static_cast<std::int64_t>(rng.below(11)), 24);
    for (std::size_t i : {k, (k + 1) % n}) {
      b.set_price(i, t0[k], p0);
      b.set_price(i, t1[k], p1);
    }
  }
  WellStructuredFamily out{b.build(), {}};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t prev = (k + n - 1) % n;
    out.y.add(k, {big[prev]}, Rational(1, 4));
    out.y.add(k, {big[k]}, Rational(1, 4));
    out.y.add(k, {t0[k], t1[prev]}, Rational(1, 2));
  }
  return out;
}

}  // namespace mba
