#include <gtest/gtest.h>

#include <cmath>

#include "mba/oracle_gen.hpp"
#include "mba/restricted.hpp"

using mba::ConfigurationSolution;
using mba::Instance;
using mba::InstanceBuilder;
using mba::Rational;
using mba::RestrictedParams;

namespace {

RestrictedParams wide_params() {
  RestrictedParams p;
  p.beta = Rational(1, 3);
  p.delta = Rational(1, 5);
  p.epsilon = Rational(1, 2);
  return p;
}

mba::PriceProfile bimodal() {
  mba::PriceProfile prof;
  prof.kind = mba::PriceProfile::Kind::Bimodal;
  prof.beta = Rational(1, 3);
  return prof;
}

Instance restricted(std::size_t n, std::size_t m, std::uint64_t seed) {
  return mba::gen_random(mba::Family::Restricted, n, m, seed, bimodal());
}

// One unit-budget player; items A (9/10), B (4/5) big at beta = 1/3, s1 (2/5), s2 (3/10).
Instance move_example() {
  InstanceBuilder b;
  b.add_player("p", Rational(1));
  for (auto [id, p] : {std::pair{"A", Rational(9, 10)}, std::pair{"B", Rational(4, 5)},
                       std::pair{"s1", Rational(2, 5)}, std::pair{"s2", Rational(3, 10)}}) {
    b.set_price(0, b.add_item(id), p);
  }
  return b.build();
}

std::vector<Rational> per_player_value(const Instance& inst, const ConfigurationSolution& y) {
  return mba::config_frac_value(inst, y).per_player;
}

Rational big_mass(const ConfigurationSolution& y, std::size_t player, const std::vector<bool>& big) {
  Rational s;
  for (const auto& [key, w] : y.entries()) {
    if (key.player != player) continue;
    for (std::size_t j : key.items) {
      if (big[j]) s += w;
    }
  }
  return s;
}

bool in_band(const Rational& v, const RestrictedParams& p) { return v >= p.band_low() && v <= p.band_high(); }

}  // namespace

TEST(Params, ValidationRules) {
  RestrictedParams p;
  EXPECT_NO_THROW(p.validate());
  p.beta = p.delta / Rational(8);
  EXPECT_THROW(p.validate(), mba::PreconditionError);
  p = RestrictedParams{};
  p.epsilon = Rational(1);
  EXPECT_THROW(p.validate(), mba::PreconditionError);
  p = RestrictedParams{};
  p.beta = Rational(1, 2);
  EXPECT_THROW(p.validate(), mba::PreconditionError);
}

TEST(Params, TunedGuaranteesExceedThreeQuarters) {
  auto t = mba::tune_parameters();
  EXPECT_GT(t.params.non_well_structured_factor(), Rational(3, 4));
  EXPECT_GT(t.params.well_structured_factor(), Rational(3, 4));
  EXPECT_GT(t.c, Rational(0));
  EXPECT_TRUE(t.beta_at_lower_bound);
  RestrictedParams d;
  EXPECT_EQ(d.epsilon, t.params.epsilon);
  EXPECT_EQ(d.delta, t.params.delta);
  EXPECT_EQ(d.beta, t.params.beta);
}

TEST(Structure, RingIsWellStructured) {
  auto fam = mba::gen_well_structured(5, 1);
  auto r = mba::structure_report(fam.instance, fam.y, RestrictedParams{});
  for (const auto& m : r.big_mass) EXPECT_EQ(m, Rational(1, 2));
  EXPECT_EQ(r.outlier_fraction, Rational(0));
  EXPECT_TRUE(r.is_well_structured);
  Rational total;
  for (const auto& w : r.weight) total += w;
  EXPECT_EQ(total, Rational(1));
}

TEST(Structure, AllSmallIsNotWellStructured) {
  Instance inst = move_example();
  ConfigurationSolution y;
  y.add(0, {2, 3}, Rational(1));
  auto r = mba::structure_report(inst, y, wide_params());
  EXPECT_EQ(r.outlier_fraction, Rational(1));
  EXPECT_FALSE(r.is_well_structured);
}

TEST(Structure, MixedWeightsByValue) {
  InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  std::size_t g = b.add_item("g");
  std::size_t s = b.add_item("s");
  b.set_price(0, g, Rational(1));
  b.set_price(1, g, Rational(1));
  b.set_price(0, s, Rational(1, 4));
  b.set_price(1, s, Rational(1, 4));
  Instance inst = b.build();
  ConfigurationSolution y;
  y.add(0, {g}, Rational(1, 2));  // big mass 1/2, value 1/2
  y.add(1, {s}, Rational(1));     // big mass 0, value 1/4
  auto r = mba::structure_report(inst, y, wide_params());
  EXPECT_EQ(r.big_mass[0], Rational(1, 2));
  EXPECT_EQ(r.big_mass[1], Rational(0));
  EXPECT_EQ(r.outlier_fraction, Rational(1, 3));
  EXPECT_TRUE(r.is_well_structured);
  RestrictedParams tight = wide_params();
  tight.epsilon = Rational(1, 4);
  EXPECT_FALSE(mba::structure_report(inst, y, tight).is_well_structured);
}

TEST(Structure, RejectsNonRestricted) {
  auto inst = mba::gen_random(mba::Family::General, 3, 4, 2);
  ConfigurationSolution y;
  EXPECT_ANY_THROW(mba::structure_report(inst, y, RestrictedParams{}));
  InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  std::size_t j = b.add_item("j");
  b.set_price(0, j, Rational(1, 2));
  b.set_price(1, j, Rational(1, 3));
  EXPECT_THROW(mba::structure_report(b.build(), y, RestrictedParams{}), mba::ClassificationError);
}

TEST(Normalize, SecondBigItemMovesIntoSmallConfiguration) {
  Instance inst = move_example();
  ConfigurationSolution y;
  y.add(0, {0, 1}, Rational(1, 2));
  y.add(0, {2, 3}, Rational(1, 2));
  auto n = mba::normalize_configurations(inst, y, Rational(1, 3));
  ConfigurationSolution want;
  want.add(0, {0, 2}, Rational(1, 2));
  want.add(0, {1, 3}, Rational(1, 2));
  EXPECT_EQ(n, want);
  EXPECT_EQ(mba::config_frac_value(inst, y).total, Rational(17, 20));
  EXPECT_EQ(mba::config_frac_value(inst, n).total, Rational(1));
}

TEST(Normalize, UnequalWeightsSplit) {
  Instance inst = move_example();
  ConfigurationSolution y;
  y.add(0, {0, 1}, Rational(1, 3));
  y.add(0, {2, 3}, Rational(1, 2));
  auto n = mba::normalize_configurations(inst, y, Rational(1, 3));
  EXPECT_EQ(n.weight(0, {0, 2}), Rational(1, 3));
  EXPECT_EQ(n.weight(0, {1, 3}), Rational(1, 3));
  // The rest of {s1,s2} and the 1/6 empty padding stay behind.
  EXPECT_EQ(n.weight(0, {2, 3}), Rational(1, 6));
  EXPECT_EQ(n.size(), 3u);
}

TEST(Normalize, TruncatesToTwoBigItems) {
  InstanceBuilder b;
  b.add_player("p", Rational(1));
  for (int k = 0; k < 3; ++k) b.set_price(0, b.add_item("g" + std::to_string(k)), Rational(9 - k, 10));
  Instance inst = b.build();
  ConfigurationSolution y;
  y.add(0, {0, 1, 2}, Rational(1));
  auto n = mba::normalize_configurations(inst, y, Rational(1, 3));
  ConfigurationSolution want;
  want.add(0, {0, 1}, Rational(1));
  EXPECT_EQ(n, want);
}

TEST(Normalize, NoMovesMeansProjectionOnly) {
  auto fam = mba::gen_well_structured(4, 3);
  auto x = mba::normalize_and_project(fam.instance, fam.y, RestrictedParams{});
  EXPECT_EQ(x, mba::project_to_assignment(fam.instance, fam.y));
}

TEST(Normalize, PropertiesOnRandomInstances) {
  const RestrictedParams params = wide_params();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = restricted(2 + seed % 3, 3 + seed % 4, seed);
    std::vector<bool> big = mba::big_items(inst, params.beta);
    auto y = mba::enumerate_config_lp(inst);
    auto n = mba::normalize_configurations(inst, y, params.beta);
    n.validate(inst);
    auto vy = per_player_value(inst, y);
    auto vn = per_player_value(inst, n);
    auto x = mba::project_to_assignment(inst, n);
    auto vx = mba::frac_value(inst, x).per_player;
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      EXPECT_EQ(vn[i], vy[i]) << seed;
      EXPECT_EQ(vx[i], vy[i]) << seed;
      Rational before = big_mass(y, i, big);
      EXPECT_EQ(big_mass(n, i, big), before) << seed;
      bool has_two = false, has_none = n.player_mass(i) < Rational(1);
      for (const auto& [key, w] : n.entries()) {
        if (key.player != i) continue;
        auto nb = mba::detail::count_big(key.items, big);
        EXPECT_LE(nb, 2u);
        has_two = has_two || nb == 2;
        has_none = has_none || nb == 0;
      }
      EXPECT_FALSE(has_two && has_none) << seed;
      Rational xb;
      for (std::size_t j = 0; j < inst.num_items(); ++j) {
        if (big[j]) xb += x.at(i, j);
      }
      if (before <= Rational(1)) {
        EXPECT_EQ(xb, before) << seed;
      } else {
        EXPECT_GT(xb, Rational(1)) << seed;
      }
      EXPECT_EQ(in_band(before, params), in_band(xb, params)) << seed;
    }
  }
}

TEST(Normalize, ValueNeverDecreasesOnArbitrarySolutions) {
  const RestrictedParams params = wide_params();
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Instance inst = restricted(2, 5, 1000 + seed);
    mba::CounterRng rng = mba::CounterRng::stream(seed, 1);
    ConfigurationSolution y;
    std::vector<Rational> item_left(inst.num_items(), Rational(1));
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      Rational room(1);
      for (int c = 0; c < 3; ++c) {
        std::vector<std::size_t> items;
        for (std::size_t j : inst.player_support(i)) {
          if (rng.below(2)) items.push_back(j);
        }
        Rational w = min(room, Rational(1 + static_cast<std::int64_t>(rng.below(4)), 8));
        for (std::size_t j : items) w = min(w, item_left[j]);
        if (w.is_zero() || items.empty()) continue;
        for (std::size_t j : items) item_left[j] -= w;
        room -= w;
        y.add(i, items, w);
      }
    }
    auto n = mba::normalize_configurations(inst, y, params.beta);
    n.validate(inst);
    auto vy = per_player_value(inst, y);
    auto vn = per_player_value(inst, n);
    for (std::size_t i = 0; i < inst.num_players(); ++i) EXPECT_GE(vn[i], vy[i]) << seed;
  }
}

TEST(YPrime, IdentityOnTargetForm) {
  auto fam = mba::gen_well_structured(5, 4);
  auto yp = mba::build_y_prime(fam.instance, fam.y, RestrictedParams{});
  EXPECT_EQ(yp.y, fam.y);
  for (bool d : yp.dropped) EXPECT_FALSE(d);
}

TEST(YPrime, ScalesSmallMassToHalf) {
  InstanceBuilder b;
  b.add_player("p", Rational(1));
  std::size_t g = b.add_item("g");
  std::size_t s = b.add_item("s");
  std::size_t t = b.add_item("t");
  b.set_price(0, g, Rational(1));
  b.set_price(0, s, Rational(1, 4));
  b.set_price(0, t, Rational(1, 5));
  Instance inst = b.build();
  ConfigurationSolution y;
  y.add(0, {g}, Rational(2, 5));
  y.add(0, {s}, Rational(2, 5));
  y.add(0, {t}, Rational(1, 5));
  RestrictedParams p = wide_params();
  auto yp = mba::build_y_prime(inst, y, p);
  Rational f = Rational(1, 2) / Rational(3, 5);
  EXPECT_EQ(yp.y.weight(0, {g}), Rational(2, 5));
  EXPECT_EQ(yp.y.weight(0, {s}), Rational(2, 5) * f);
  EXPECT_EQ(yp.y.weight(0, {t}), Rational(1, 5) * f);
}

TEST(YPrime, DropsOutliersAndStripsSmallsFromBigConfigurations) {
  InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  std::size_t g = b.add_item("g");
  std::size_t s = b.add_item("s");
  std::size_t h = b.add_item("h");
  for (std::size_t i : {0u, 1u}) {
    b.set_price(i, g, Rational(4, 5));
    b.set_price(i, s, Rational(1, 10));
    b.set_price(i, h, Rational(1, 2));
  }
  Instance inst = b.build();
  ConfigurationSolution y;
  y.add(0, {g, s}, Rational(1, 2));
  y.add(0, {h}, Rational(1, 2));
  y.add(1, {s}, Rational(1, 2));
  auto yp = mba::build_y_prime(inst, y, wide_params());
  EXPECT_FALSE(yp.dropped[0]);
  EXPECT_TRUE(yp.dropped[1]);
  ConfigurationSolution want;
  want.add(0, {g}, Rational(1, 2));
  want.add(0, {h}, Rational(1, 2));
  EXPECT_EQ(yp.y, want);
}

TEST(YPrime, InvariantsAndValueBound) {
  const RestrictedParams params = wide_params();
  std::size_t checked = 0;
  auto check = [&](const Instance& inst, const ConfigurationSolution& y, const std::string& tag) {
    auto rep = mba::structure_report(inst, y, params);
    std::vector<bool> big = mba::big_items(inst, params.beta);
    auto yp = mba::build_y_prime(inst, y, params);
    yp.y.validate(inst);
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      Rational small_mass, bm;
      for (const auto& [key, w] : yp.y.entries()) {
        if (key.player != i) continue;
        auto nb = mba::detail::count_big(key.items, big);
        EXPECT_TRUE(nb == 0 || (nb == 1 && key.items.size() == 1)) << tag;
        (nb == 0 ? small_mass : bm) += w;
      }
      EXPECT_LE(small_mass, Rational(1, 2)) << tag;
      if (yp.dropped[i]) {
        EXPECT_EQ(yp.y.player_mass(i), Rational(0)) << tag;
      } else {
        EXPECT_TRUE(in_band(bm, params)) << tag;
      }
    }
    if (rep.is_well_structured) {
      ++checked;
      Rational bound = (Rational(1) - params.beta - params.epsilon) * (Rational(1) - params.delta);
      EXPECT_GE(mba::config_frac_value(inst, yp.y).total, bound * rep.total_value) << tag;
    }
  };
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    Instance inst = restricted(2 + seed % 4, 3 + seed % 5, 2000 + seed);
    check(inst, mba::enumerate_config_lp(inst), "random " + std::to_string(seed));
  }
  // Rings where player 0 either carries a small item inside a big
  // configuration or loses one big configuration and becomes an outlier.
  for (std::size_t n = 3; n <= 7; ++n) {
    auto fam = mba::gen_well_structured(n, n);
    const Instance& inst = fam.instance;
    check(inst, fam.y, "ring");
    std::size_t g_prev = n - 1;
    std::size_t g0 = 0;
    ConfigurationSolution mixed, outlier;
    for (const auto& [key, w] : fam.y.entries()) {
      if (key.player != 0) {
        mixed.add(key.player, key.items, w);
        outlier.add(key.player, key.items, w);
        continue;
      }
      if (key.items == std::vector<std::size_t>{g_prev}) {
        mixed.add(0, {g_prev, n}, w);  // item n is t_0_0
        outlier.add(0, key.items, w);
      } else if (key.items == std::vector<std::size_t>{g0}) {
        mixed.add(0, key.items, w);
      } else {
        std::vector<std::size_t> rest;
        for (std::size_t j : key.items) {
          if (j != n) rest.push_back(j);
        }
        mixed.add(0, rest, w);
        outlier.add(0, key.items, w);
      }
    }
    check(inst, mixed, "mixed ring");
    check(inst, outlier, "outlier ring");
    EXPECT_TRUE(mba::build_y_prime(inst, outlier, params).dropped[0]);
  }
  EXPECT_GE(checked, 15u);
}

TEST(WellStructured, BigItemsGoOnlyToTheirLpPlayers) {
  InstanceBuilder b;
  b.add_player("a", Rational(1));
  b.add_player("b", Rational(1));
  b.set_price(0, b.add_item("g"), Rational(1));
  b.set_price(1, b.add_item("h"), Rational(1));
  Instance inst = b.build();
  ConfigurationSolution y;
  y.add(0, {0}, Rational(1, 2));
  y.add(1, {1}, Rational(1, 2));
  mba::WellStructuredRounder r(inst, y, RestrictedParams{});
  for (std::uint64_t t = 0; t < 200; ++t) {
    auto rng = mba::CounterRng::stream(5, t);
    auto a = r.round(rng);
    a.validate(inst);
    for (std::size_t j = 0; j < 2; ++j) {
      if (a.owner(j)) {
        EXPECT_EQ(*a.owner(j), j);
      }
    }
  }
  // x' puts 1/2 on each big edge, so each big item is placed half the time.
  auto est = mba::estimate_marginals(r.rounder().graph(), 4000, 8);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(est.frequency[k], 0.5, 0.05);
}

TEST(WellStructured, PhaseOneMarginalsAndMeanOnRing) {
  RestrictedParams params;
  auto fam = mba::gen_well_structured(5, 6);
  const Instance& inst = fam.instance;
  mba::WellStructuredRounder r(inst, fam.y, params);
  const std::size_t trials = 10000;
  std::vector<double> hits(inst.num_items(), 0.0);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = mba::CounterRng::stream(17, t);
    auto a = r.round(rng);
    a.validate(inst);
    for (std::size_t j : r.big_list()) hits[j] += a.owner(j) ? 1.0 : 0.0;
    double v = mba::assignment_value(inst, a).to_double();
    sum += v;
    sumsq += v * v;
  }
  for (std::size_t j : r.big_list()) {
    double p = r.x_prime().item_total(j).to_double();
    double sigma = std::sqrt(p * (1 - p) / trials);
    EXPECT_NEAR(hits[j] / trials, p, 3 * sigma + 1e-12) << j;
  }
  double mean = sum / trials;
  double se = std::sqrt(std::max(0.0, sumsq / trials - mean * mean) / trials);
  double val = mba::config_frac_value(inst, fam.y).total.to_double();
  EXPECT_GE(mean, params.well_structured_factor().to_double() * val - 3 * se);
}

TEST(WellStructured, PhaseTwoLpAgainstSmallItemMass) {
  // E_T[Val(x2)] >= (1 - δ)(3/4) Σ_{j small} p_j Σ_i x'_ij.
  RestrictedParams params;
  auto fam = mba::gen_well_structured(6, 9);
  const Instance& inst = fam.instance;
  mba::WellStructuredRounder r(inst, fam.y, params);
  std::vector<bool> big = mba::big_items(inst, params.beta);
  Rational rhs;
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    if (!big[j]) rhs += mba::restricted_price(inst, j) * r.x_prime().item_total(j);
  }
  rhs *= (Rational(1) - params.delta) * Rational(3, 4);
  const std::size_t trials = 2000;
  std::map<std::vector<bool>, double> cache;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = mba::CounterRng::stream(23, t);
    auto tset = r.remaining_players(r.phase_one(rng));
    auto it = cache.find(tset);
    if (it == cache.end()) {
      it = cache.emplace(tset, mba::frac_value(inst, r.phase_two_lp(tset)).total.to_double()).first;
    }
    sum += it->second;
    sumsq += it->second * it->second;
  }
  double mean = sum / trials;
  double se = std::sqrt(std::max(0.0, sumsq / trials - mean * mean) / trials);
  EXPECT_GE(mean, rhs.to_double() - 3 * se);
}

TEST(NonWellStructured, BestModeMeetsThreeQuartersOfProjection) {
  const RestrictedParams params = wide_params();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = restricted(2 + seed % 3, 3 + seed % 5, 3000 + seed);
    auto y = mba::enumerate_config_lp(inst);
    auto x = mba::normalize_and_project(inst, y, params);
    auto a = mba::round_non_well_structured(inst, y, params, mba::BucketRoundMode::best());
    a.validate(inst);
    EXPECT_GE(mba::assignment_value(inst, a), Rational(3, 4) * mba::frac_value(inst, x).total) << seed;
  }
}

TEST(Solve, SinglePlayerIsOptimal) {
  InstanceBuilder b;
  b.add_player("p", Rational(1));
  b.set_price(0, b.add_item("a"), Rational(1, 2));
  b.set_price(0, b.add_item("b"), Rational(1, 3));
  Instance inst = b.build();
  auto res = mba::solve_restricted(inst, 0, RestrictedParams{});
  EXPECT_EQ(res.value, Rational(5, 6));
  EXPECT_EQ(res.value, mba::exact_opt(inst).value);
}

TEST(Solve, FeasibleAndBelowOptimum) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Instance inst = restricted(2 + seed % 3, 3 + seed % 4, 4000 + seed);
    auto res = mba::solve_restricted(inst, seed, RestrictedParams{});
    res.assignment.validate(inst);
    EXPECT_EQ(res.value, mba::assignment_value(inst, res.assignment));
    EXPECT_LE(res.value, mba::exact_opt(inst).value) << seed;
    EXPECT_FALSE(res.branch.empty());
  }
  auto fam = mba::gen_well_structured(4, 2);
  auto res = mba::solve_restricted(fam.instance, 1, RestrictedParams{});
  res.assignment.validate(fam.instance);
  EXPECT_EQ(mba::solve_restricted(fam.instance, 1, RestrictedParams{}).assignment, res.assignment);
}

TEST(Solve, RejectsNonRestricted) {
  auto inst = mba::gen_random(mba::Family::General, 3, 3, 5);
  EXPECT_ANY_THROW(mba::solve_restricted(inst, 0, RestrictedParams{}));
}
