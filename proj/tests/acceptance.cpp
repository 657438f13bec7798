// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
//   acceptance <path-to-mba-binary>
//
// Seeds are fixed constants; statistical checks use 3 standard errors.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mba/buckets.hpp"
#include "mba/depround.hpp"
#include "mba/graphmba.hpp"
#include "mba/json_io.hpp"
#include "mba/oracle_gen.hpp"
#include "mba/relax.hpp"
#include "mba/restricted.hpp"

namespace {

using mba::Instance;
using mba::Rational;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

int g_failed = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << title;
  if (!o.detail.empty()) std::cout << "  [" << o.detail << "]";
  std::cout << '\n';
  for (const auto& f : o.failures) std::cout << "      " << f << '\n';
  if (!o.pass) ++g_failed;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome gap_family() {
  Outcome o;
  auto t0 = Clock::now();
  Instance small = mba::gen_gap(2, 3);
  Rational lp = mba::config_frac_value(small, mba::enumerate_config_lp(small)).total;
  Rational lp_cg = mba::config_frac_value(small, mba::colgen_config_lp(small)).total;
  Rational opt = mba::exact_opt(small).value;
  double t_small = seconds_since(t0);
  o.require(lp == Rational(5), "(2,3) configuration LP " + lp.str());
  o.require(lp_cg == Rational(5), "(2,3) column generation " + lp_cg.str());
  o.require(opt == Rational(13, 3), "(2,3) exact " + opt.str());
  o.require(opt / lp == Rational(13, 15), "(2,3) ratio " + (opt / lp).str());
  o.require(t_small < 10.0, "(2,3) runtime " + fmt(t_small) + " s");

  t0 = Clock::now();
  Instance big = mba::gen_gap(5, 12);
  Rational lp_big = mba::config_frac_value(big, mba::colgen_config_lp(big)).total;
  Rational opt_big = mba::exact_opt(big).value;
  double t_big = seconds_since(t0);
  Rational ratio = opt_big / lp_big;
  double target = 2 * (std::sqrt(2.0) - 1);
  o.require(ratio == Rational(169, 204), "(5,12) ratio " + ratio.str());
  o.require(std::abs(ratio.to_double() - target) <= 6e-4, "(5,12) distance to 2(sqrt2-1)");
  o.require(t_big < 10.0, "(5,12) runtime " + fmt(t_big) + " s");
  o.detail = "(2,3): LP " + lp.str() + ", OPT " + opt.str() + ", ratio " + (opt / lp).str() + "; (5,12): ratio " +
             ratio.str() + " = " + ratio.to_decimal(6) + "; times " + fmt(t_small, 3) + " s, " + fmt(t_big, 3) + " s";
  return o;
}

// Mixed corpus for criteria 2, 3 and 9: n <= 5, m <= 8.
std::vector<Instance> mixed_corpus() {
  std::vector<Instance> out;
  const mba::Family families[] = {mba::Family::General, mba::Family::Restricted, mba::Family::Graph};
  mba::PriceProfile bimodal;
  bimodal.kind = mba::PriceProfile::Kind::Bimodal;
  bimodal.beta = Rational(1, 3);
  for (std::size_t k = 0; k < 210; ++k) {
    mba::Family f = families[k % 3];
    std::size_t n = 2 + (k / 3) % 4;
    std::size_t m = 3 + (k / 12) % 6;
    mba::PriceProfile prof = (k / 6) % 2 == 1 && f == mba::Family::Restricted ? bimodal : mba::PriceProfile{};
    out.push_back(mba::gen_random(f, n, m, 1000 + k, prof));
  }
  out.push_back(mba::gen_gap(2, 3));
  return out;
}

struct CorpusResults {
  Outcome bucket;
  Outcome player;
  Outcome sandwich;
};

CorpusResults corpus_checks(const std::vector<Instance>& corpus) {
  CorpusResults r;
  std::size_t players = 0;
  Rational worst_bucket(2);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const Instance& inst = corpus[k];
    const std::string tag = "instance " + std::to_string(k);
    auto x = mba::solve_assignment_lp(inst);
    Rational alp = mba::frac_value(inst, x).total;
    Rational opt = mba::exact_opt(inst).value;

    auto a = mba::round_bucket(inst, x, mba::BucketRoundMode::best());
    a.validate(inst);
    Rational v = mba::assignment_value(inst, a);
    r.bucket.require(v >= Rational(3, 4) * alp, tag + ": bucket " + v.str() + " < 3/4 * " + alp.str());
    r.bucket.require(v <= opt, tag + ": bucket " + v.str() + " > OPT " + opt.str());
    if (alp.sign() > 0) worst_bucket = mba::min(worst_bucket, v / alp);

    for (const auto& d : mba::diagnostics(inst, x).players) {
      ++players;
      r.player.require(d.measured >= d.bound, tag + " player " + std::to_string(d.player) + ": " + d.measured.str() +
                                                  " < " + d.bound.str());
    }

    auto y = mba::colgen_config_lp(inst);
    auto cfg = mba::config_frac_value(inst, y);
    Rational exact_cfg = mba::config_frac_value(inst, mba::enumerate_config_lp(inst)).total;
    r.sandwich.require(opt <= cfg.total && cfg.total <= alp,
                       tag + ": " + opt.str() + " <= " + cfg.total.str() + " <= " + alp.str());
    r.sandwich.require(exact_cfg == cfg.total, tag + ": enumeration " + exact_cfg.str() + " vs " + cfg.total.str());
    auto per = mba::frac_value(inst, mba::project_to_assignment(inst, y)).per_player;
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      r.sandwich.require(per[i] == cfg.per_player[i], tag + ": projection changes player " + std::to_string(i));
    }
  }
  r.bucket.detail = std::to_string(corpus.size()) + " instances, worst bucket/assignment-LP ratio " +
                    worst_bucket.to_decimal(6);
  r.player.detail = std::to_string(players) + " players";
  r.sandwich.detail = std::to_string(corpus.size()) + " instances";
  return r;
}

// ---------------------------------------------------------------------------

std::vector<mba::WeightedBipartiteGraph> depround_corpus() {
  std::vector<mba::WeightedBipartiteGraph> out;
  for (std::uint64_t s = 0; s < 20; ++s) out.push_back(mba::random_normal_graph(3 + s % 4, 3 + (s / 4) % 4, 500 + s));
  return out;
}

constexpr std::size_t kDepTrials = 100000;

Outcome depround_marginals(const std::vector<mba::WeightedBipartiteGraph>& graphs) {
  Outcome o;
  std::size_t vertices = 0;
  double worst_z = 0.0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    auto est = mba::estimate_marginals(graphs[g], kDepTrials, 7000 + g);
    for (std::size_t v = 0; v < est.frequency.size(); ++v) {
      ++vertices;
      double p = est.expected[v].to_double();
      double f = est.frequency[v];
      double se = std::sqrt(p * (1 - p) / kDepTrials);
      double diff = std::abs(f - p);
      if (se > 0) worst_z = std::max(worst_z, diff / se);
      bool ok = diff <= 3 * se + 1e-12 && diff <= 0.01;
      o.require(ok, "graph " + std::to_string(g) + " vertex " + std::to_string(v) + ": " + fmt(f) + " vs " + fmt(p) +
                        " (" + fmt(diff / std::max(se, 1e-300), 3) + " se)");
    }
  }
  o.detail = std::to_string(graphs.size()) + " graphs, " + std::to_string(vertices) + " vertices, " +
             std::to_string(kDepTrials) + " samples each, max |z| " + fmt(worst_z, 3);
  return o;
}

Outcome depround_correlation(const std::vector<mba::WeightedBipartiteGraph>& graphs) {
  Outcome o;
  std::size_t pairs = 0, triples = 0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const std::size_t nl = graphs[g].num_left();
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t a = 0; a < nl; ++a) {
      for (std::size_t b = a + 1; b < nl; ++b) subsets.push_back({a, b});
    }
    pairs += subsets.size();
    std::vector<std::vector<std::size_t>> all_triples;
    for (std::size_t a = 0; a < nl; ++a) {
      for (std::size_t b = a + 1; b < nl; ++b) {
        for (std::size_t c = b + 1; c < nl; ++c) all_triples.push_back({a, b, c});
      }
    }
    // Up to 50 distinct triples, drawn by a partial shuffle.
    mba::CounterRng pick = mba::CounterRng::stream(9100 + g, 0);
    std::size_t want = std::min<std::size_t>(50, all_triples.size());
    for (std::size_t k = 0; k < want; ++k) {
      std::size_t r = k + static_cast<std::size_t>(pick.below(all_triples.size() - k));
      std::swap(all_triples[k], all_triples[r]);
      subsets.push_back(all_triples[k]);
    }
    triples += want;
    auto rep = mba::check_negative_correlation(graphs[g], subsets, kDepTrials, 8000 + g);
    for (const auto& row : rep.rows) {
      std::string s;
      for (std::size_t v : row.subset) s += (s.empty() ? "" : ",") + std::to_string(v);
      o.require(!row.violation, "graph " + std::to_string(g) + " {" + s + "}: joint " + fmt(row.joint) +
                                    " > product " + fmt(row.product) + " + 3*" + fmt(row.sigma));
    }
  }
  o.detail = std::to_string(pairs) + " pairs, " + std::to_string(triples) + " triples, " +
             std::to_string(kDepTrials) + " samples each";
  return o;
}

// ---------------------------------------------------------------------------

// Unit budgets, each item priced for two random players from a coarse grid.
Instance tight_graph(std::uint64_t seed) {
  mba::CounterRng rng = mba::CounterRng::stream(seed, 0);
  const Rational grid[] = {Rational(1, 3), Rational(1, 2), Rational(2, 3), Rational(3, 4), Rational(1)};
  std::size_t n = 3 + static_cast<std::size_t>(rng.below(3));
  std::size_t m = n + static_cast<std::size_t>(rng.below(std::min<std::size_t>(10, 2 * n) - n + 1));
  mba::InstanceBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.add_player("p" + std::to_string(i), Rational(1));
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t j = b.add_item("j" + std::to_string(k));
    std::size_t u = static_cast<std::size_t>(rng.below(n));
    std::size_t v = (u + 1 + static_cast<std::size_t>(rng.below(n - 1))) % n;
    b.set_price(u, j, grid[rng.below(5)]);
    b.set_price(v, j, grid[rng.below(5)]);
  }
  return b.build();
}

bool has_fractional_entry(const mba::ConfigurationSolution& y) {
  for (const auto& [key, w] : y.entries()) {
    if (w != Rational(1)) return true;
  }
  return false;
}

// Ten random-family instances plus the first ten tight instances (in seed
// order) whose column-generation optimum is fractional.
std::vector<Instance> graph_corpus() {
  std::vector<Instance> out;
  for (std::uint64_t s = 0; s < 10; ++s) out.push_back(mba::gen_random(mba::Family::Graph, 2 + s % 5, 4 + s % 7, 600 + s));
  for (std::uint64_t s = 0; out.size() < 20 && s < 5000; ++s) {
    Instance inst = tight_graph(6100 + s);
    if (has_fractional_entry(mba::colgen_config_lp(inst))) out.push_back(std::move(inst));
  }
  return out;
}

Outcome graph_expectation() {
  Outcome o;
  mba::GraphParams params = mba::tune_delta();
  Rational margin = mba::min(params.integral_margin(), params.fractional_margin());
  o.require(margin.sign() > 0, "tuned margin " + margin.str());
  const std::size_t trials = 10000;
  double worst = 1e9;
  std::size_t fractional = 0;
  auto corpus = graph_corpus();
  o.require(corpus.size() >= 20, "only " + std::to_string(corpus.size()) + " graph instances");
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const Instance& inst = corpus[s];
    auto y = mba::colgen_config_lp(inst);
    if (has_fractional_entry(y)) ++fractional;
    double lp = mba::config_frac_value(inst, y).total.to_double();
    mba::GraphRounder r(inst, y);
    double sum = 0, sumsq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      mba::CounterRng rng = mba::CounterRng::stream(s, t);
      double v = mba::assignment_value(inst, r.round(rng).assignment).to_double();
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / trials;
    double se = std::sqrt(std::max(0.0, sumsq / trials - mean * mean) / trials);
    if (lp > 0) worst = std::min(worst, mean / lp);
    o.require(mean >= 0.75 * lp - 3 * se, "instance " + std::to_string(s) + ": mean " + fmt(mean) + " vs LP " + fmt(lp));
  }
  o.detail = std::to_string(corpus.size()) + " instances (" + std::to_string(fractional) +
             " with fractional LP), 10000 trials, worst mean/LP " + fmt(worst, 4) + ", delta " + params.delta.str() +
             ", margin " + margin.to_decimal(8);
  return o;
}

// ---------------------------------------------------------------------------

Outcome restricted_pipeline() {
  Outcome o;
  mba::RestrictedParams params;
  const std::size_t trials = 10000;
  std::size_t marginals = 0;
  double worst_ratio = 1e9;
  for (std::size_t n = 3; n <= 7; ++n) {
    auto fam = mba::gen_well_structured(n, 40 + n);
    const Instance& inst = fam.instance;
    const std::string tag = "ring " + std::to_string(n);
    auto rep = mba::structure_report(inst, fam.y, params);
    o.require(rep.is_well_structured, tag + " not well-structured");
    mba::WellStructuredRounder r(inst, fam.y, params);
    std::vector<std::size_t> item_hits(inst.num_items(), 0), player_hits(inst.num_players(), 0);
    double sum = 0, sumsq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      mba::CounterRng rng = mba::CounterRng::stream(70 + n, t);
      auto phase1 = r.phase_one(rng);
      for (std::size_t i = 0; i < phase1.size(); ++i) {
        if (!phase1[i]) continue;
        ++item_hits[*phase1[i]];
        ++player_hits[i];
      }
      mba::CounterRng again = mba::CounterRng::stream(70 + n, t);
      double v = mba::assignment_value(inst, r.round(again)).to_double();
      sum += v;
      sumsq += v * v;
    }
    auto within = [&](double p, std::size_t hits, const std::string& what) {
      ++marginals;
      double f = static_cast<double>(hits) / trials;
      double se = std::sqrt(p * (1 - p) / trials);
      o.require(std::abs(f - p) <= 3 * se + 1e-12, tag + " " + what + ": " + fmt(f) + " vs " + fmt(p));
    };
    for (std::size_t j : r.big_list()) within(r.x_prime().item_total(j).to_double(), item_hits[j], inst.item_id(j));
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      Rational deg;
      for (std::size_t j : r.big_list()) deg += r.x_prime().at(i, j);
      within(deg.to_double(), player_hits[i], inst.player_id(i));
    }
    double mean = sum / trials;
    double se = std::sqrt(std::max(0.0, sumsq / trials - mean * mean) / trials);
    double val = mba::config_frac_value(inst, fam.y).total.to_double();
    double bound = params.well_structured_factor().to_double() * val;
    worst_ratio = std::min(worst_ratio, mean / val);
    o.require(mean >= bound - 3 * se, tag + ": mean " + fmt(mean) + " < " + fmt(bound) + " - 3*" + fmt(se));
  }

  std::size_t non_ws = 0;
  mba::PriceProfile bimodal;
  bimodal.kind = mba::PriceProfile::Kind::Bimodal;
  bimodal.beta = params.beta;
  for (std::uint64_t s = 0; s < 60; ++s) {
    Instance inst = mba::gen_random(mba::Family::Restricted, 2 + s % 4, 3 + s % 6, 3500 + s,
                                    s % 2 ? bimodal : mba::PriceProfile{});
    auto y = mba::colgen_config_lp(inst);
    if (mba::structure_report(inst, y, params).is_well_structured) continue;
    ++non_ws;
    auto x = mba::normalize_and_project(inst, y, params);
    auto a = mba::round_non_well_structured(inst, y, params, mba::BucketRoundMode::best());
    a.validate(inst);
    Rational v = mba::assignment_value(inst, a);
    Rational px = mba::frac_value(inst, x).total;
    o.require(v >= Rational(3, 4) * px, "non-well-structured " + std::to_string(s) + ": " + v.str() + " < 3/4 * " +
                                            px.str());
  }
  o.require(non_ws >= 20, "only " + std::to_string(non_ws) + " non-well-structured instances");
  o.detail = "5 rings, " + std::to_string(marginals) + " item and player big-item marginals, worst mean/Val(y) " +
             fmt(worst_ratio, 4) + " vs factor " + params.well_structured_factor().to_decimal(4) + "; " +
             std::to_string(non_ws) + " non-well-structured instances";
  return o;
}

// ---------------------------------------------------------------------------

Outcome hardness_identity() {
  Outcome o;
  // Regular multigraph topologies on <= 4 variables with <= 4 equations.
  using Edge = std::pair<char, char>;
  const std::vector<std::vector<Edge>> topologies = {
      {{'a', 'b'}},
      {{'a', 'b'}, {'a', 'b'}},
      {{'a', 'b'}, {'a', 'b'}, {'a', 'b'}},
      {{'a', 'b'}, {'a', 'b'}, {'a', 'b'}, {'a', 'b'}},
      {{'a', 'b'}, {'c', 'd'}},
      {{'a', 'b'}, {'b', 'c'}, {'c', 'a'}},
      {{'a', 'b'}, {'b', 'c'}, {'c', 'd'}, {'d', 'a'}},
      {{'a', 'b'}, {'a', 'b'}, {'c', 'd'}, {'c', 'd'}},
  };
  std::size_t systems = 0;
  for (const auto& topo : topologies) {
    for (std::uint32_t pattern = 0; pattern < (1U << topo.size()); ++pattern) {
      std::string text;
      for (std::size_t k = 0; k < topo.size(); ++k) {
        text += std::string(1, topo[k].first) + "+" + std::string(1, topo[k].second) + "=" +
                std::to_string((pattern >> k) & 1U) + "\n";
      }
      auto sys = mba::TwoLinSystem::parse(text);
      o.require(sys.is_regular(), "topology not regular");
      Rational sum_deg;
      for (auto d : sys.degrees()) sum_deg += Rational(static_cast<std::int64_t>(d));
      Rational m(static_cast<std::int64_t>(sys.equations.size()));
      Rational expect = sum_deg + m * (Rational(1) + mba::max_sat_2lin(sys).fraction);
      Rational got = mba::exact_opt(mba::gen_2lin(sys)).value;
      ++systems;
      std::string flat = text;
      for (char& c : flat) {
        if (c == '\n') c = ';';
      }
      o.require(got == expect, flat + ": " + got.str() + " vs " + expect.str());
    }
  }
  o.detail = std::to_string(topologies.size()) + " topologies, " + std::to_string(systems) + " systems";
  return o;
}

// ---------------------------------------------------------------------------

struct Run {
  int status = -1;
  std::string out;
};

Run run_command(const std::string& cmd) {
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  r.status = pclose(pipe);
  return r;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome determinism(const std::string& cli) {
  Outcome o;
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("mba_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const Instance& inst) {
    fs::path p = dir / name;
    std::ofstream(p) << mba::instance_to_json(inst).dump(2) << '\n';
    return quote(p.string());
  };
  std::string gap = write("gap.json", mba::gen_gap(2, 3));
  std::string general = write("general.json", mba::gen_random(mba::Family::General, 4, 7, 11));
  std::string graph = write("graph.json", mba::gen_random(mba::Family::Graph, 5, 8, 12));
  std::string ring = write("ring.json", mba::gen_well_structured(5, 3).instance);
  std::string restricted = write("restricted.json", mba::gen_random(mba::Family::Restricted, 4, 7, 13));
  const std::string b = quote(cli);
  const std::vector<std::string> commands = {
      b + " gen --family gap --p 2 --q 3",
      b + " gen --family 2lin --equations 'x+y=1;y+z=0;z+x=1'",
      b + " gen --family random --kind graph --n 5 --m 9 --seed 4",
      "MBA_SEED=9 " + b + " gen --family random --kind restricted --n 4 --m 7",
      b + " solve --relaxation assignment " + general,
      b + " solve --relaxation config-exact " + gap,
      b + " solve --relaxation config-colgen " + graph,
      b + " exact " + general,
      b + " round --alg bucket --mode sample --seed 5 --trials 20 " + general,
      b + " round --alg bucket --mode best " + gap,
      b + " round --alg graph --seed 6 --trials 50 " + graph,
      b + " round --alg restricted --seed 7 --trials 10 " + ring,
      b + " round --alg restricted --mode best --seed 8 " + restricted,
      "MBA_SEED=3 " + b + " round --alg graph --trials 20 " + graph,
      b + " verify " + graph,
      b + " diagnose " + general,
      b + " bench --count 6 --seed 2",
      b + " bench --family gap --max-p 2 --max-q 4",
      b + " gen --family gap --p 2 --q 3 | " + b + " solve --relaxation config-exact",
  };
  for (const auto& cmd : commands) {
    Run first = run_command(cmd + " 2>&1");
    Run second = run_command(cmd + " 2>&1");
    o.require(first.status == 0, cmd + ": exit status " + std::to_string(first.status));
    o.require(!first.out.empty() && first.out == second.out, cmd + ": output differs between runs");
  }
  fs::remove_all(dir);
  o.detail = std::to_string(commands.size()) + " invocations run twice";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <path-to-mba-binary>\n";
    return 2;
  }
  report(1, "gap-family exactness", gap_family());
  auto corpus = mixed_corpus();
  auto cr = corpus_checks(corpus);
  report(2, "bucket rounding >= 3/4 assignment LP and <= OPT", cr.bucket);
  report(3, "per-player bucket bound", cr.player);
  auto graphs = depround_corpus();
  report(4, "dependent rounding marginals", depround_marginals(graphs));
  report(5, "dependent rounding negative correlation", depround_correlation(graphs));
  report(6, "graph rounding expectation >= 3/4 configuration LP", graph_expectation());
  report(7, "restricted pipeline", restricted_pipeline());
  report(8, "Max-2-Lin reduction identity", hardness_identity());
  report(9, "LP sandwich and projection", cr.sandwich);
  report(10, "CLI determinism", determinism(argv[1]));
  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << '\n';
  return g_failed == 0 ? 0 : 1;
}
