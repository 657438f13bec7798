#pragma once

// Bucket rounding of an assignment-LP solution: per-player buckets of unit
// mass filled in non-increasing price order, a convex decomposition of the
// bucket/item fractions into complete matchings, and sampling or picking the
// best matching.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mba/errors.hpp"
#include "mba/flow.hpp"
#include "mba/instance.hpp"
#include "mba/rational.hpp"
#include "mba/rng.hpp"

namespace mba {

struct BucketEntry {
  std::size_t item;
  Rational fraction;
};

/// Player index num_players() denotes the dummy player.
struct Bucket {
  std::size_t player;
  std::size_t index;  // position among the player's buckets
  std::vector<BucketEntry> entries;

  Rational mass() const {
    Rational s;
    for (const auto& e : entries) s += e.fraction;
    return s;
  }
};

struct BucketSystem {
  std::size_t num_players = 0;  // real players; the dummy is num_players
  std::size_t num_items = 0;
  std::vector<Bucket> buckets;
  std::vector<std::vector<std::size_t>> player_buckets;  // num_players + 1 lists of bucket ids

  bool is_dummy(std::size_t player) const { return player == num_players; }
};

struct MatchingTerm {
  Rational weight;
  std::vector<std::size_t> bucket_of_item;  // bucket id per item
};

using MatchingDecomposition = std::vector<MatchingTerm>;

namespace detail {

inline void require_complete(const Instance& inst, const FractionalAssignment& x) {
  if (x.num_players() != inst.num_players() || x.num_items() != inst.num_items()) {
    throw PreconditionError("fractional assignment dimensions do not match instance");
  }
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    if (x.item_total(j) + x.dummy(j) != Rational(1)) {
      throw PreconditionError("item " + inst.item_id(j) + " is not fully assigned (dummy included)");
    }
    if (x.dummy(j).sign() < 0) throw PreconditionError("negative dummy share for item " + inst.item_id(j));
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      if (x.at(i, j).sign() < 0) throw PreconditionError("negative x value");
    }
  }
}

}  // namespace detail

/// Greedy prefix-sum split of each player's items (non-increasing price, ties
/// by item id) into buckets of mass 1; the last bucket may be partial.
inline BucketSystem build_buckets(const Instance& inst, const FractionalAssignment& x) {
  detail::require_complete(inst, x);
  const std::size_t n = inst.num_players();
  BucketSystem sys;
  sys.num_players = n;
  sys.num_items = inst.num_items();
  sys.player_buckets.assign(n + 1, {});
  for (std::size_t i = 0; i <= n; ++i) {
    std::vector<std::size_t> items;
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      const Rational& v = i == n ? x.dummy(j) : x.at(i, j);
      if (v.sign() > 0) items.push_back(j);
    }
    if (i < n) {
      std::sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) { return inst.price_order(i, a, b); });
    } else {
      std::sort(items.begin(), items.end(),
                [&](std::size_t a, std::size_t b) { return inst.item_rank(a) < inst.item_rank(b); });
    }
    Rational room;  // space left in the open bucket
    for (std::size_t j : items) {
      Rational left = i == n ? x.dummy(j) : x.at(i, j);
      while (left.sign() > 0) {
        if (room.is_zero()) {
          sys.player_buckets[i].push_back(sys.buckets.size());
          sys.buckets.push_back({i, sys.player_buckets[i].size() - 1, {}});
          room = Rational(1);
        }
        Rational take = min(left, room);
        sys.buckets.back().entries.push_back({j, take});
        left -= take;
        room -= take;
      }
    }
  }
  return sys;
}

/// Writes Σ_k γ_k M_k = x′ with complete matchings M_k. The remaining mass t
/// starts at 1; each step finds a matching that covers every item and every
/// bucket of degree t, removes γ of it and lowers t by γ, where γ is the
/// largest step keeping every edge nonnegative and every bucket degree <= t.
inline MatchingDecomposition decompose(const BucketSystem& sys) {
  const std::size_t m = sys.num_items;
  const std::size_t nb = sys.buckets.size();
  struct Edge {
    std::size_t item;
    std::size_t bucket;
    Rational weight;
  };
  std::vector<Edge> edges;
  std::vector<Rational> degree(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    for (const auto& e : sys.buckets[b].entries) {
      edges.push_back({e.item, b, e.fraction});
      degree[b] += e.fraction;
    }
  }
  Rational t(1);
  MatchingDecomposition out;
  const std::size_t step_cap = edges.size() + nb + 2;
  while (t.sign() > 0) {
    if (out.size() > step_cap) throw InvariantError("bucket decomposition did not terminate");
    // Nodes: items 0..m-1, buckets m..m+nb-1, source, sink.
    const std::size_t src = m + nb;
    const std::size_t snk = src + 1;
    BoundedFlow<std::int64_t> flow(snk + 1);
    for (std::size_t j = 0; j < m; ++j) flow.add_edge(src, j, 1, 1);
    std::vector<std::pair<std::size_t, std::size_t>> used;  // (edge index, flow id)
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edges[k].weight.sign() > 0) used.emplace_back(k, flow.add_edge(edges[k].item, m + edges[k].bucket, 0, 1));
    }
    for (std::size_t b = 0; b < nb; ++b) {
      std::int64_t lo = degree[b] == t ? 1 : 0;
      flow.add_edge(m + b, snk, lo, 1);
    }
    auto f = flow.feasible(src, snk);
    if (!f) throw InvariantError("no matching covers all items and tight buckets");
    MatchingTerm term;
    term.bucket_of_item.assign(m, nb);
    std::vector<bool> matched(nb, false);
    std::optional<Rational> gamma;
    auto lower = [&](const Rational& v) {
      if (!gamma || v < *gamma) gamma = v;
    };
    for (auto [k, id] : used) {
      if ((*f)[id] != 1) continue;
      term.bucket_of_item[edges[k].item] = edges[k].bucket;
      matched[edges[k].bucket] = true;
      lower(edges[k].weight);
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (term.bucket_of_item[j] == nb) throw InvariantError("matching leaves an item uncovered");
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (!matched[b]) lower(t - degree[b]);
    }
    if (!gamma) gamma = t;  // no items and no buckets
    lower(t);
    for (auto [k, id] : used) {
      if ((*f)[id] != 1) continue;
      edges[k].weight -= *gamma;
      degree[edges[k].bucket] -= *gamma;
    }
    t -= *gamma;
    term.weight = *gamma;
    out.push_back(std::move(term));
  }
  return out;
}

/// Assignment given by one matching; items in dummy buckets stay unassigned.
inline Assignment matching_assignment(const BucketSystem& sys, const MatchingTerm& term) {
  Assignment a(sys.num_items);
  for (std::size_t j = 0; j < sys.num_items; ++j) {
    std::size_t b = term.bucket_of_item[j];
    if (b < sys.buckets.size() && !sys.is_dummy(sys.buckets[b].player)) a.assign(j, sys.buckets[b].player);
  }
  return a;
}

struct BucketRoundMode {
  enum class Kind { Sample, Best } kind = Kind::Best;
  std::uint64_t seed = 0;

  static BucketRoundMode sample(std::uint64_t seed) { return {Kind::Sample, seed}; }
  static BucketRoundMode best() { return {Kind::Best, 0}; }
};

/// Picks one matching of the decomposition with probability γ_k (sample) or
/// the matching of largest value (best; ties to the earliest term).
inline Assignment round_bucket(const Instance& inst, const FractionalAssignment& x, const BucketRoundMode& mode,
                               CounterRng* rng = nullptr) {
  BucketSystem sys = build_buckets(inst, x);
  MatchingDecomposition dec = decompose(sys);
  if (mode.kind == BucketRoundMode::Kind::Sample) {
    std::vector<Rational> w;
    w.reserve(dec.size());
    for (const auto& term : dec) w.push_back(term.weight);
    CounterRng local = CounterRng::stream(mode.seed, 0);
    CounterRng& r = rng ? *rng : local;
    return matching_assignment(sys, dec[r.pick(w)]);
  }
  std::optional<Assignment> best;
  Rational best_value;
  for (const auto& term : dec) {
    Assignment a = matching_assignment(sys, term);
    Rational v = assignment_value(inst, a);
    if (!best || v > best_value) {
      best = std::move(a);
      best_value = v;
    }
  }
  return best ? *best : Assignment(inst.num_items());
}

// ---------------------------------------------------------------------------
// Diagnostics

struct BucketStats {
  Rational a;          // Σ x′ p over the bucket
  Rational r;          // average price of the items priced above α·a
  Rational q;          // average price of the remaining items
  Rational above_mass; // x′ mass of the items priced above α·a
};

struct PlayerDiagnostics {
  std::size_t player = 0;
  Rational val;
  std::optional<Rational> alpha;  // B_i / Val_i; empty means +infinity (Val_i = 0)
  std::vector<BucketStats> buckets;
  Rational bound;     // Val_i (1 - r_1 / (4 B_i))
  Rational measured;  // Σ_k γ_k min(B_i, value of player i under M_k)
};

struct BucketDiagnostics {
  std::vector<PlayerDiagnostics> players;
  Rational val_total;
  Rational expected_total;
};

inline BucketDiagnostics diagnostics(const Instance& inst, const FractionalAssignment& x) {
  BucketSystem sys = build_buckets(inst, x);
  MatchingDecomposition dec = decompose(sys);
  BucketDiagnostics out;
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    PlayerDiagnostics d;
    d.player = i;
    for (std::size_t j : inst.player_support(i)) d.val += x.at(i, j) * inst.price(i, j);
    if (d.val.sign() > 0) d.alpha = inst.budget(i) / d.val;
    for (std::size_t b : sys.player_buckets[i]) {
      BucketStats s;
      for (const auto& e : sys.buckets[b].entries) s.a += e.fraction * inst.price(i, e.item);
      Rational above_value;
      if (d.alpha) {
        Rational threshold = *d.alpha * s.a;
        for (const auto& e : sys.buckets[b].entries) {
          const Rational& p = inst.price(i, e.item);
          if (p > threshold) {
            s.above_mass += e.fraction;
            above_value += e.fraction * p;
          }
        }
      }
      if (s.above_mass.is_zero()) {
        s.r = s.a;
        s.q = s.a;
      } else {
        s.r = above_value / s.above_mass;
        s.q = s.above_mass < Rational(1) ? (s.a - above_value) / (Rational(1) - s.above_mass) : s.a;
      }
      d.buckets.push_back(s);
    }
    if (!d.alpha) {
      d.bound = d.val;
    } else {
      Rational r1 = d.buckets.empty() ? Rational() : d.buckets.front().r;
      d.bound = d.val * (Rational(1) - r1 / (Rational(4) * inst.budget(i)));
    }
    for (const auto& term : dec) {
      Rational load;
      for (std::size_t j = 0; j < inst.num_items(); ++j) {
        std::size_t b = term.bucket_of_item[j];
        if (sys.buckets[b].player == i) load += inst.price(i, j);
      }
      d.measured += term.weight * min(load, inst.budget(i));
    }
    out.val_total += d.val;
    out.expected_total += d.measured;
    out.players.push_back(std::move(d));
  }
  return out;
}

/// CSV rows: player,alpha,a1,r1,bound,measured (exact rationals; "inf" for an
/// infinite alpha).
inline void write_diagnostics_csv(std::ostream& os, const Instance& inst, const BucketDiagnostics& diag) {
  os << "player,alpha,a1,r1,bound,measured\n";
  for (const auto& d : diag.players) {
    Rational a1 = d.buckets.empty() ? Rational() : d.buckets.front().a;
    Rational r1 = d.buckets.empty() ? Rational() : d.buckets.front().r;
    os << inst.player_id(d.player) << ',' << (d.alpha ? d.alpha->str() : std::string("inf")) << ',' << a1.str()
       << ',' << r1.str() << ',' << d.bound.str() << ',' << d.measured.str() << '\n';
  }
}

}  // namespace mba
