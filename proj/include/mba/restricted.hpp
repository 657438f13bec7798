#pragma once

// Restricted MBA with unit budgets: well-structuredness of a configuration-LP
// solution, normalisation and projection onto the assignment LP, and the two
// rounding paths (bucket rounding for non-well-structured solutions, big-item
// matching plus small-item bucket rounding for well-structured ones).

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mba/buckets.hpp"
#include "mba/depround.hpp"
#include "mba/errors.hpp"
#include "mba/instance.hpp"
#include "mba/rational.hpp"
#include "mba/relax.hpp"
#include "mba/rng.hpp"

namespace mba {

struct RestrictedParams {
  Rational epsilon{3, 200};
  Rational delta{1, 100};
  Rational beta{1, 400};

  void validate() const {
    if (epsilon.sign() <= 0 || epsilon >= Rational(1)) throw PreconditionError("epsilon must lie in (0,1)");
    if (delta.sign() <= 0 || delta >= Rational(1)) throw PreconditionError("delta must lie in (0,1)");
    if (beta < delta / Rational(4)) throw PreconditionError("beta must be at least delta/4");
    if (beta > Rational(1, 3)) throw PreconditionError("beta must be at most 1/3");
  }

  Rational band_low() const { return (Rational(1) - delta) / Rational(2); }
  Rational band_high() const { return (Rational(1) + delta) / Rational(2); }

  /// Expected-value factor of the non-well-structured path.
  Rational non_well_structured_factor() const {
    return (Rational(3) + epsilon * delta * delta / Rational(64)) / Rational(4);
  }
  /// Expected-value factor of the well-structured path.
  Rational well_structured_factor() const {
    Rational s = Rational(1) - delta;
    return s * s * (Rational(1) - beta - epsilon) * Rational(25, 32);
  }
};

struct StructureReport {
  std::vector<Rational> big_mass;  // Σ_C |B ∩ C| y_iC
  std::vector<Rational> value;     // Val_i(y)
  std::vector<Rational> weight;    // Val_i(y) / Val(y)
  std::vector<bool> outlier;       // big mass outside [(1-δ)/2, (1+δ)/2]
  Rational total_value;
  Rational outlier_fraction;       // weighted
  bool is_well_structured = false;
};

inline StructureReport structure_report(const Instance& inst, const ConfigurationSolution& y,
                                        const RestrictedParams& params) {
  params.validate();
  std::vector<bool> big = big_items(inst, params.beta);
  y.validate(inst);
  const std::size_t n = inst.num_players();
  StructureReport r;
  r.big_mass.assign(n, Rational());
  r.value.assign(n, Rational());
  r.weight.assign(n, Rational());
  r.outlier.assign(n, false);
  for (const auto& [key, w] : y.entries()) {
    auto nb = std::count_if(key.items.begin(), key.items.end(), [&](std::size_t j) { return big[j]; });
    r.big_mass[key.player] += Rational(static_cast<std::int64_t>(nb)) * w;
    r.value[key.player] += config_value(inst, key.player, key.items) * w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.total_value += r.value[i];
    r.outlier[i] = r.big_mass[i] < params.band_low() || r.big_mass[i] > params.band_high();
  }
  if (r.total_value.sign() > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      r.weight[i] = r.value[i] / r.total_value;
      if (r.outlier[i]) r.outlier_fraction += r.weight[i];
    }
  }
  r.is_well_structured = r.outlier_fraction <= params.epsilon;
  return r;
}

namespace detail {

struct Piece {
  std::vector<std::size_t> items;
  Rational weight;
};

inline std::size_t count_big(const std::vector<std::size_t>& items, const std::vector<bool>& big) {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [&](std::size_t j) { return big[j]; }));
}

inline Rational price_sum(const Instance& inst, std::size_t player, const std::vector<std::size_t>& items) {
  Rational s;
  for (std::size_t j : items) s += inst.price(player, j);
  return s;
}

// Player i's configurations, padded with the empty configuration up to mass 1.
inline std::vector<Piece> player_pieces(const ConfigurationSolution& y, std::size_t player) {
  std::vector<Piece> out;
  Rational mass;
  for (const auto& [key, w] : y.entries()) {
    if (key.player != player) continue;
    out.push_back({key.items, w});
    mass += w;
  }
  if (mass < Rational(1)) out.push_back({{}, Rational(1) - mass});
  return out;
}

// At most two big items per configuration (the two of highest price), then no
// player keeps both a two-big and a no-big configuration: the second big item
// moves into the no-big configuration, whose small items move back in
// decreasing price order until the donor reaches profit 1.
inline std::vector<Piece> normalize_player(const Instance& inst, std::size_t player, std::vector<Piece> pieces,
                                           const std::vector<bool>& big) {
  for (auto& pc : pieces) {
    if (count_big(pc.items, big) <= 2) continue;
    std::vector<std::size_t> kept;
    std::size_t bigs = 0;
    for (std::size_t j : price_sorted(inst, player, pc.items)) {
      if (big[j] && ++bigs > 2) continue;
      kept.push_back(j);
    }
    std::sort(kept.begin(), kept.end());
    pc.items = std::move(kept);
  }
  std::vector<std::size_t> two, none;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    std::size_t nb = count_big(pieces[k].items, big);
    if (nb == 2) two.push_back(k);
    if (nb == 0) none.push_back(k);
  }
  std::vector<Piece> created;
  for (std::size_t c : two) {
    for (std::size_t c2 : none) {
      if (pieces[c].weight.is_zero()) break;
      if (pieces[c2].weight.is_zero()) continue;
      Rational w = min(pieces[c].weight, pieces[c2].weight);
      std::vector<std::size_t> donor;
      std::optional<std::size_t> second;
      std::size_t seen = 0;
      for (std::size_t j : price_sorted(inst, player, pieces[c].items)) {
        if (big[j] && ++seen == 2) {
          second = j;
        } else {
          donor.push_back(j);
        }
      }
      std::vector<std::size_t> receiver;
      std::vector<std::size_t> smalls = price_sorted(inst, player, pieces[c2].items);
      std::size_t k = 0;
      Rational donor_sum = price_sum(inst, player, donor);
      while (donor_sum < Rational(1) && k < smalls.size()) {
        donor.push_back(smalls[k]);
        donor_sum += inst.price(player, smalls[k]);
        ++k;
      }
      receiver.assign(smalls.begin() + static_cast<std::ptrdiff_t>(k), smalls.end());
      receiver.push_back(*second);
      pieces[c].weight -= w;
      pieces[c2].weight -= w;
      created.push_back({std::move(donor), w});
      created.push_back({std::move(receiver), w});
    }
  }
  std::vector<Piece> out;
  for (auto& pc : pieces) {
    if (!pc.weight.is_zero()) out.push_back(std::move(pc));
  }
  for (auto& pc : created) out.push_back(std::move(pc));
  return out;
}

}  // namespace detail

/// Steps (a) and (b) of the normalisation: no configuration with more than two
/// big items and no player holding both a two-big and a no-big configuration.
/// Big-item mass per player is unchanged and Val_i never decreases.
inline ConfigurationSolution normalize_configurations(const Instance& inst, const ConfigurationSolution& y,
                                                      const Rational& beta) {
  std::vector<bool> big = big_items(inst, beta);
  y.validate(inst);
  ConfigurationSolution out;
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    for (auto& pc : detail::normalize_player(inst, i, detail::player_pieces(y, i), big)) {
      if (!pc.items.empty()) out.add(i, std::move(pc.items), pc.weight);
    }
  }
  return out;
}

/// Normalisation followed by the prefix projection.
inline FractionalAssignment normalize_and_project(const Instance& inst, const ConfigurationSolution& y,
                                                  const RestrictedParams& params) {
  params.validate();
  return project_to_assignment(inst, normalize_configurations(inst, y, params.beta));
}

inline Assignment round_non_well_structured(const Instance& inst, const ConfigurationSolution& y,
                                           const RestrictedParams& params, const BucketRoundMode& mode) {
  return round_bucket(inst, normalize_and_project(inst, y, params), mode);
}

struct YPrime {
  ConfigurationSolution y;
  std::vector<bool> dropped;
};

/// Drops outlier players, leaves every big item alone in its configuration
/// (the highest-priced one when two remain) and caps each player's
/// small-configuration mass at 1/2 by scaling.
inline YPrime build_y_prime(const Instance& inst, const ConfigurationSolution& y, const RestrictedParams& params) {
  StructureReport report = structure_report(inst, y, params);
  std::vector<bool> big = big_items(inst, params.beta);
  ConfigurationSolution norm = normalize_configurations(inst, y, params.beta);
  YPrime out;
  out.dropped = report.outlier;
  std::vector<std::vector<detail::Piece>> small(inst.num_players());
  for (const auto& [key, w] : norm.entries()) {
    if (out.dropped[key.player]) continue;
    std::optional<std::size_t> top;
    for (std::size_t j : price_sorted(inst, key.player, key.items)) {
      if (big[j]) {
        top = j;
        break;
      }
    }
    if (top) {
      out.y.add(key.player, {*top}, w);
    } else {
      small[key.player].push_back({key.items, w});
    }
  }
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    Rational mass;
    for (const auto& pc : small[i]) mass += pc.weight;
    Rational scale = mass > Rational(1, 2) ? Rational(1, 2) / mass : Rational(1);
    for (const auto& pc : small[i]) out.y.add(i, pc.items, pc.weight * scale);
  }
  return out;
}

/// Two-phase rounding of a well-structured solution. The big-item matching
/// distribution is prepared once; phase-2 results are cached per set T of
/// players left without a big item.
class WellStructuredRounder {
 public:
  WellStructuredRounder(const Instance& inst, const ConfigurationSolution& y, const RestrictedParams& params)
      : inst_(&inst), big_(big_items(inst, params.beta)) {
    YPrime yp = build_y_prime(inst, y, params);
    y_prime_ = std::move(yp.y);
    dropped_ = std::move(yp.dropped);
    x_prime_ = project_to_assignment(inst, y_prime_);
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      if (big_[j]) big_list_.push_back(j);
    }
    WeightedBipartiteGraph g(inst.num_players(), big_list_.size());
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      for (std::size_t b = 0; b < big_list_.size(); ++b) {
        const Rational& w = x_prime_.at(i, big_list_[b]);
        if (w.sign() > 0) g.add_edge(i, b, w);
      }
    }
    rounder_.emplace(std::move(g));
  }

  const ConfigurationSolution& y_prime() const { return y_prime_; }
  const FractionalAssignment& x_prime() const { return x_prime_; }
  const std::vector<bool>& dropped() const { return dropped_; }
  const std::vector<std::size_t>& big_list() const { return big_list_; }
  const DependentRounder& rounder() const { return *rounder_; }

  /// Phase 1: big item assigned to each player, if any.
  std::vector<std::optional<std::size_t>> phase_one(CounterRng& rng) const {
    std::vector<std::optional<std::size_t>> out(inst_->num_players());
    const auto& edges = rounder_->graph().edges();
    for (std::size_t e : rounder_->sample(rng)) out[edges[e].left] = big_list_[edges[e].right];
    return out;
  }

  /// Players that receive small items in phase 2.
  std::vector<bool> remaining_players(const std::vector<std::optional<std::size_t>>& phase1) const {
    std::vector<bool> t(inst_->num_players());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = !phase1[i] && !dropped_[i];
    return t;
  }

  /// Optimal assignment LP of the small items over players `t`.
  FractionalAssignment phase_two_lp(const std::vector<bool>& t) const {
    std::vector<bool> small(big_.size());
    for (std::size_t j = 0; j < small.size(); ++j) small[j] = !big_[j];
    return solve_assignment_lp(*inst_, t, small);
  }

  Assignment round(CounterRng& rng) {
    auto phase1 = phase_one(rng);
    std::vector<bool> t = remaining_players(phase1);
    auto it = memo_.find(t);
    if (it == memo_.end()) {
      it = memo_.emplace(t, round_bucket(*inst_, phase_two_lp(t), BucketRoundMode::best())).first;
    }
    Assignment out = it->second;
    for (std::size_t i = 0; i < phase1.size(); ++i) {
      if (phase1[i]) out.assign(*phase1[i], i);
    }
    return out;
  }

 private:
  const Instance* inst_;
  std::vector<bool> big_;
  ConfigurationSolution y_prime_;
  std::vector<bool> dropped_;
  FractionalAssignment x_prime_{0, 0};
  std::vector<std::size_t> big_list_;
  std::optional<DependentRounder> rounder_;
  std::map<std::vector<bool>, Assignment> memo_;
};

inline Assignment round_well_structured(const Instance& inst, const ConfigurationSolution& y,
                                       const RestrictedParams& params, std::uint64_t seed) {
  WellStructuredRounder r(inst, y, params);
  CounterRng rng = CounterRng::stream(seed, 0);
  return r.round(rng);
}

struct RestrictedResult {
  Assignment assignment{0};
  Rational value;
  Rational lp_value;
  StructureReport report;
  std::string branch;  // "well-structured", "non-well-structured" or "both"
};

/// Solves the configuration LP and rounds along the branch chosen by the
/// structure report. Within 10% of the epsilon threshold both branches run and
/// the better outcome is kept (ties go to the non-well-structured one). Each
/// of `trials` repetitions draws from stream (seed, t); the best is returned.
inline RestrictedResult solve_restricted(const Instance& inst, std::uint64_t seed, const RestrictedParams& params,
                                         const BucketRoundMode::Kind mode = BucketRoundMode::Kind::Sample,
                                         std::size_t trials = 1) {
  params.validate();
  require_unit_restricted(inst);
  if (trials == 0) throw PreconditionError("trials must be positive");
  ConfigurationSolution y = colgen_config_lp(inst);
  RestrictedResult out;
  out.lp_value = config_frac_value(inst, y).total;
  out.report = structure_report(inst, y, params);
  Rational gap = abs(out.report.outlier_fraction - params.epsilon);
  bool near = gap <= params.epsilon / Rational(10);
  bool use_non = near || !out.report.is_well_structured;
  bool use_ws = near || out.report.is_well_structured;
  out.branch = near ? "both" : (use_ws ? "well-structured" : "non-well-structured");
  std::optional<FractionalAssignment> x;
  if (use_non) x = normalize_and_project(inst, y, params);
  std::optional<WellStructuredRounder> ws;
  if (use_ws) ws.emplace(inst, y, params);
  std::optional<Rational> best;
  auto offer = [&](Assignment a) {
    Rational v = assignment_value(inst, a);
    if (!best || v > *best) {
      best = v;
      out.assignment = std::move(a);
    }
  };
  for (std::size_t t = 0; t < trials; ++t) {
    if (use_non && (mode == BucketRoundMode::Kind::Sample || t == 0)) {
      CounterRng rng = CounterRng::stream(seed, t);
      offer(round_bucket(inst, *x, BucketRoundMode{mode, seed}, &rng));
    }
    if (use_ws) {
      CounterRng rng = CounterRng::stream(seed, t);
      offer(ws->round(rng));
    }
  }
  out.value = *best;
  return out;
}

struct TunedParams {
  RestrictedParams params;
  Rational guarantee;  // min of the two factors
  Rational c;          // guarantee - 3/4
  bool beta_at_lower_bound = false;
};

/// Grid search over δ = k/200 (k = 1..100) and ε = l/200 (l = 1..199) with
/// β = δ/4, maximising the smaller of the two branch guarantees.
inline TunedParams tune_parameters() {
  TunedParams best;
  bool have = false;
  for (std::int64_t k = 1; k <= 100; ++k) {
    for (std::int64_t l = 1; l < 200; ++l) {
      RestrictedParams p;
      p.delta = Rational(k, 200);
      p.epsilon = Rational(l, 200);
      p.beta = p.delta / Rational(4);
      Rational g = min(p.non_well_structured_factor(), p.well_structured_factor());
      if (!have || g > best.guarantee) {
        best.params = p;
        best.guarantee = g;
        have = true;
      }
    }
  }
  best.c = best.guarantee - Rational(3, 4);
  best.beta_at_lower_bound = best.params.beta == best.params.delta / Rational(4);
  return best;
}

}  // namespace mba
