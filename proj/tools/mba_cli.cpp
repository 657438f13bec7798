// mba: command-line front end for the budgeted-allocation library.
//
//   mba solve   --relaxation {assignment|config-exact|config-colgen} [instance]
//   mba round   --alg {bucket|restricted|graph} --mode {sample|best} --seed N --trials T [instance]
//   mba exact   [instance]
//   mba gen     --family {gap|2lin|random|ring} ...
//   mba verify  [instance]
//   mba bench   --family {random|gap} ... (CSV)
//   mba diagnose [instance] (CSV)
//
// Instances are read from the given path or stdin ("-"). Errors print a JSON
// object {"error":{"kind","message"}} on stdout and exit 1; usage errors exit 2.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mba/buckets.hpp"
#include "mba/graphmba.hpp"
#include "mba/json_io.hpp"
#include "mba/oracle_gen.hpp"
#include "mba/relax.hpp"
#include "mba/restricted.hpp"

namespace {

using mba::Instance;
using mba::Json;
using mba::Rational;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kDecimals = 12;

void put_number(Json& obj, const std::string& key, const Rational& v) {
  obj[key] = v.str();
  obj[key + "_decimal"] = v.to_decimal(kDecimals);
}

Rational parse_flag(const std::string& text, const char* name) {
  try {
    return Rational::parse(text);
  } catch (const std::exception&) {
    throw UsageError(std::string("--") + name + " expects a rational number, got '" + text + "'");
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MBA_SEED")) {
    std::string s(env);
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno != 0 || s.front() == '-') throw UsageError("MBA_SEED must be an unsigned integer");
    return v;
  }
  return 0;
}

Instance load_instance(const std::string& path, std::vector<std::string>& warnings) {
  if (path == "-") return mba::read_instance(std::cin, &warnings);
  std::ifstream in(path);
  if (!in) throw mba::ValidationError("cannot open instance file '" + path + "'");
  return mba::read_instance(in, &warnings);
}

void attach_warnings(Json& out, const std::vector<std::string>& warnings) {
  if (warnings.empty()) return;
  out["warnings"] = warnings;
}

void emit(const Json& doc) { std::cout << doc.dump(2) << '\n'; }

Rational ratio_or_zero(const Rational& num, const Rational& den) { return den.is_zero() ? Rational() : num / den; }

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string input = "-";
  std::string relaxation = "assignment";
};

void run_solve(const SolveArgs& a) {
  std::vector<std::string> warnings;
  Instance inst = load_instance(a.input, warnings);
  Json out;
  out["command"] = "solve";
  out["relaxation"] = a.relaxation;
  if (a.relaxation == "assignment") {
    auto x = mba::solve_assignment_lp(inst);
    put_number(out, "value", mba::frac_value(inst, x).total);
    out["solution"] = mba::fractional_to_json(inst, x);
  } else {
    auto y = a.relaxation == "config-exact" ? mba::enumerate_config_lp(inst) : mba::colgen_config_lp(inst);
    put_number(out, "value", mba::config_frac_value(inst, y).total);
    out["solution"] = mba::configuration_to_json(inst, y);
  }
  attach_warnings(out, warnings);
  emit(out);
}

// ---------------------------------------------------------------------------
// round

struct RoundArgs {
  std::string input = "-";
  std::string alg = "bucket";
  std::string mode = "sample";
  std::optional<std::uint64_t> seed;
  std::size_t trials = 1;
  std::optional<std::string> delta, epsilon, beta;
};

void run_round(const RoundArgs& a) {
  std::uint64_t seed = resolve_seed(a.seed);
  std::vector<std::string> warnings;
  Instance inst = load_instance(a.input, warnings);
  auto kind = a.mode == "best" ? mba::BucketRoundMode::Kind::Best : mba::BucketRoundMode::Kind::Sample;
  Json out;
  out["command"] = "round";
  out["algorithm"] = a.alg;
  out["mode"] = a.mode;
  out["seed"] = seed;
  out["trials"] = a.trials;
  mba::Assignment assignment;
  Rational lp;
  if (a.alg == "bucket") {
    auto x = mba::solve_assignment_lp(inst);
    lp = mba::frac_value(inst, x).total;
    out["relaxation"] = "assignment";
    if (kind == mba::BucketRoundMode::Kind::Best) {
      assignment = mba::round_bucket(inst, x, mba::BucketRoundMode::best());
    } else {
      std::optional<Rational> best;
      Rational sum;
      for (std::size_t t = 0; t < a.trials; ++t) {
        mba::CounterRng rng = mba::CounterRng::stream(seed, t);
        auto cand = mba::round_bucket(inst, x, mba::BucketRoundMode::sample(seed), &rng);
        Rational v = mba::assignment_value(inst, cand);
        sum += v;
        if (!best || v > *best) {
          best = v;
          assignment = std::move(cand);
        }
      }
      put_number(out, "mean", sum / Rational(static_cast<std::int64_t>(a.trials)));
    }
  } else if (a.alg == "restricted") {
    mba::RestrictedParams params;
    if (a.epsilon) params.epsilon = parse_flag(*a.epsilon, "epsilon");
    if (a.delta) params.delta = parse_flag(*a.delta, "delta");
    if (a.beta) params.beta = parse_flag(*a.beta, "beta");
    auto res = mba::solve_restricted(inst, seed, params, kind, a.trials);
    lp = res.lp_value;
    assignment = res.assignment;
    out["relaxation"] = "config";
    out["branch"] = res.branch;
    put_number(out, "outlier_fraction", res.report.outlier_fraction);
    out["params"] = Json{{"epsilon", params.epsilon.str()}, {"delta", params.delta.str()}, {"beta", params.beta.str()}};
  } else {
    mba::GraphParams params = mba::tune_delta();
    if (a.delta) params.delta = parse_flag(*a.delta, "delta");
    auto res = mba::solve_graph(inst, seed, params, a.trials);
    lp = res.lp_value;
    assignment = res.assignment;
    out["relaxation"] = "config";
    put_number(out, "mean", res.mean);
    out["params"] = Json{{"delta", params.delta.str()}};
    out["almost_integral_items"] = res.split.almost_integral.size();
  }
  Rational value = mba::assignment_value(inst, assignment);
  put_number(out, "lp_value", lp);
  put_number(out, "value", value);
  put_number(out, "ratio", ratio_or_zero(value, lp));
  out["assignment"] = mba::assignment_to_json(inst, assignment);
  attach_warnings(out, warnings);
  emit(out);
}

// ---------------------------------------------------------------------------
// exact

struct ExactArgs {
  std::string input = "-";
  std::uint64_t node_budget = mba::ExactLimits{}.node_budget;
};

void run_exact(const ExactArgs& a) {
  std::vector<std::string> warnings;
  Instance inst = load_instance(a.input, warnings);
  auto res = mba::exact_opt(inst, mba::ExactLimits{a.node_budget});
  Json out;
  out["command"] = "exact";
  put_number(out, "value", res.value);
  out["nodes"] = res.nodes;
  out["assignment"] = mba::assignment_to_json(inst, res.assignment);
  attach_warnings(out, warnings);
  emit(out);
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string family = "gap";
  std::int64_t p = 2, q = 3;
  std::optional<std::string> system_path, equations;
  std::string kind = "general";
  std::size_t n = 3, m = 5;
  std::optional<std::uint64_t> seed;
  std::string profile = "uniform";
  std::string beta = "1/3";
  std::string big_share = "1/2";
};

mba::Family parse_family(const std::string& kind) {
  if (kind == "general") return mba::Family::General;
  if (kind == "restricted") return mba::Family::Restricted;
  return mba::Family::Graph;
}

void run_gen(const GenArgs& a) {
  Instance inst;
  if (a.family == "gap") {
    inst = mba::gen_gap(a.p, a.q);
  } else if (a.family == "2lin") {
    mba::TwoLinSystem sys;
    if (a.equations) {
      std::string text = *a.equations;
      for (char& c : text) {
        if (c == ';') c = '\n';
      }
      sys = mba::TwoLinSystem::parse(text);
    } else if (a.system_path) {
      std::ifstream in(*a.system_path);
      if (!in) throw mba::ValidationError("cannot open system file '" + *a.system_path + "'");
      sys = mba::TwoLinSystem::parse(in);
    } else {
      sys = mba::TwoLinSystem::parse(std::cin);
    }
    inst = mba::gen_2lin(sys);
  } else if (a.family == "random") {
    mba::PriceProfile prof;
    if (a.profile == "bimodal") {
      prof.kind = mba::PriceProfile::Kind::Bimodal;
      prof.beta = parse_flag(a.beta, "beta");
      prof.big_share = parse_flag(a.big_share, "big-share");
    }
    inst = mba::gen_random(parse_family(a.kind), a.n, a.m, resolve_seed(a.seed), prof);
  } else {
    inst = mba::gen_well_structured(a.n, resolve_seed(a.seed)).instance;
  }
  emit(mba::instance_to_json(inst));
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string input = "-";
  std::uint64_t node_budget = mba::ExactLimits{}.node_budget;
};

struct CheckList {
  Json checks = Json::array();
  bool ok = true;

  void add(const std::string& name, bool pass, const std::string& detail = {}) {
    Json c{{"name", name}, {"status", pass ? "pass" : "fail"}};
    if (!detail.empty()) c["detail"] = detail;
    checks.push_back(std::move(c));
    ok = ok && pass;
  }
  void skip(const std::string& name, const std::string& why) {
    checks.push_back(Json{{"name", name}, {"status", "skipped"}, {"detail", why}});
  }
};

int run_verify(const VerifyArgs& a) {
  std::vector<std::string> warnings;
  Instance inst = load_instance(a.input, warnings);
  CheckList list;
  auto x = mba::solve_assignment_lp(inst);
  x.validate(inst);
  Rational assign_lp = mba::frac_value(inst, x).total;
  auto y = mba::colgen_config_lp(inst);
  y.validate(inst);
  auto cfg = mba::config_frac_value(inst, y);
  std::optional<Rational> exact;
  try {
    exact = mba::exact_opt(inst, mba::ExactLimits{a.node_budget}).value;
  } catch (const mba::SizeError& e) {
    list.skip("exact_optimum", e.what());
  }

  list.add("config_below_assignment", cfg.total <= assign_lp, cfg.total.str() + " <= " + assign_lp.str());
  if (exact) list.add("exact_below_config", *exact <= cfg.total, exact->str() + " <= " + cfg.total.str());

  auto xp = mba::project_to_assignment(inst, y);
  auto vx = mba::frac_value(inst, xp).per_player;
  bool same = true;
  for (std::size_t i = 0; i < inst.num_players(); ++i) same = same && vx[i] == cfg.per_player[i];
  list.add("projection_preserves_player_values", same);

  auto sys = mba::build_buckets(inst, x);
  auto dec = mba::decompose(sys);
  Rational total_weight;
  std::vector<Rational> rebuilt(inst.num_players() * inst.num_items());
  for (const auto& term : dec) {
    total_weight += term.weight;
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      std::size_t owner = sys.buckets[term.bucket_of_item[j]].player;
      if (owner < inst.num_players()) rebuilt[owner * inst.num_items() + j] += term.weight;
    }
  }
  bool marg = total_weight == Rational(1);
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    for (std::size_t j = 0; j < inst.num_items(); ++j) marg = marg && rebuilt[i * inst.num_items() + j] == x.at(i, j);
  }
  list.add("bucket_decomposition_marginals", marg);

  auto best = mba::round_bucket(inst, x, mba::BucketRoundMode::best());
  best.validate(inst);
  Rational best_value = mba::assignment_value(inst, best);
  list.add("bucket_three_quarters", best_value >= Rational(3, 4) * assign_lp,
           best_value.str() + " >= 3/4 * " + assign_lp.str());
  if (exact) list.add("bucket_below_exact", best_value <= *exact);

  auto diag = mba::diagnostics(inst, x);
  bool bounded = true;
  for (const auto& d : diag.players) bounded = bounded && d.measured >= d.bound;
  list.add("bucket_player_bound", bounded);

  auto cls = mba::classify(inst);
  bool unit = cls.is_restricted && inst.num_players() > 0 && inst.budget(0) == Rational(1);
  if (unit) {
    auto xr = mba::normalize_and_project(inst, y, mba::RestrictedParams{});
    auto vr = mba::frac_value(inst, xr).per_player;
    bool keep = true;
    for (std::size_t i = 0; i < inst.num_players(); ++i) keep = keep && vr[i] == cfg.per_player[i];
    list.add("restricted_projection_preserves_values", keep);
  } else {
    list.skip("restricted_projection_preserves_values", "not a unit-budget restricted instance");
  }
  if (cls.is_graph) {
    auto table = mba::contributions(inst, y);
    bool ok = table.total() >= cfg.total;
    for (std::size_t j = 0; j < inst.num_items(); ++j) {
      if (inst.item_support(j).empty()) continue;
      Rational s;
      for (std::size_t i = 0; i < inst.num_players(); ++i) s += table.marginal(i, j);
      ok = ok && s == Rational(1);
    }
    list.add("graph_contributions", ok);
  } else {
    list.skip("graph_contributions", "not a graph instance");
  }

  Json out;
  out["command"] = "verify";
  out["ok"] = list.ok;
  out["checks"] = list.checks;
  Json ratios;
  put_number(ratios, "config_over_assignment", ratio_or_zero(cfg.total, assign_lp));
  if (exact) put_number(ratios, "exact_over_config", ratio_or_zero(*exact, cfg.total));
  put_number(ratios, "bucket_over_assignment", ratio_or_zero(best_value, assign_lp));
  out["ratios"] = ratios;
  attach_warnings(out, warnings);
  emit(out);
  return list.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string family = "random";
  std::size_t count = 12;
  std::size_t max_n = 4, max_m = 7;
  std::int64_t max_p = 3, max_q = 6;
  std::optional<std::uint64_t> seed;
  std::size_t trials = 16;
  bool timing = false;
  std::uint64_t node_budget = mba::ExactLimits{}.node_budget;
};

struct BenchCase {
  std::string name;
  std::string family;
  Instance instance;
};

std::string csv_field(const std::optional<Rational>& v) { return v ? v->str() : std::string(); }
std::string csv_ratio(const std::optional<Rational>& num, const std::optional<Rational>& den) {
  if (!num || !den || den->is_zero()) return {};
  return (*num / *den).to_decimal(kDecimals);
}

void run_bench(const BenchArgs& a) {
  std::uint64_t seed = resolve_seed(a.seed);
  std::vector<BenchCase> cases;
  if (a.family == "gap") {
    for (std::int64_t q = 2; q <= a.max_q; ++q) {
      for (std::int64_t p = 1; p < q && p <= a.max_p; ++p) {
        cases.push_back({"gap-" + std::to_string(p) + "-" + std::to_string(q), "gap", mba::gen_gap(p, q)});
      }
    }
  } else {
    if (a.max_n < 2 || a.max_m < 2) throw UsageError("--max-n and --max-m must be at least 2");
    const mba::Family kinds[] = {mba::Family::General, mba::Family::Restricted, mba::Family::Graph};
    for (std::size_t k = 0; k < a.count; ++k) {
      mba::Family f = kinds[k % 3];
      std::size_t n = 2 + k % (a.max_n - 1);
      std::size_t m = 2 + (k * 5) % (a.max_m - 1);
      std::ostringstream name;
      name << "random-" << mba::to_string(f) << '-' << k;
      cases.push_back({name.str(), mba::to_string(f), mba::gen_random(f, n, m, seed + k)});
    }
  }
  std::cout << "instance,family,players,items,assignment_lp,config_lp,exact_opt,bucket_best,bucket_ratio,"
               "family_alg,family_value,family_ratio,exact_ratio,wall_ms\n";
  for (const auto& c : cases) {
    auto start = std::chrono::steady_clock::now();
    const Instance& inst = c.instance;
    auto x = mba::solve_assignment_lp(inst);
    Rational alp = mba::frac_value(inst, x).total;
    auto y = mba::colgen_config_lp(inst);
    Rational clp = mba::config_frac_value(inst, y).total;
    std::optional<Rational> exact;
    try {
      exact = mba::exact_opt(inst, mba::ExactLimits{a.node_budget}).value;
    } catch (const mba::SizeError&) {
    }
    Rational bucket = mba::assignment_value(inst, mba::round_bucket(inst, x, mba::BucketRoundMode::best()));
    std::string alg;
    std::optional<Rational> fam_value;
    auto cls = mba::classify(inst);
    if (cls.is_restricted && inst.budget(0) == Rational(1)) {
      alg = "restricted";
      fam_value = mba::solve_restricted(inst, seed, mba::RestrictedParams{}, mba::BucketRoundMode::Kind::Sample,
                                        a.trials).value;
    } else if (cls.is_graph) {
      alg = "graph";
      fam_value = mba::solve_graph(inst, seed, mba::tune_delta(), a.trials).value;
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cout << c.name << ',' << c.family << ',' << inst.num_players() << ',' << inst.num_items() << ','
              << alp.str() << ',' << clp.str() << ',' << csv_field(exact) << ',' << bucket.str() << ','
              << csv_ratio(bucket, alp) << ',' << alg << ',' << csv_field(fam_value) << ','
              << csv_ratio(fam_value, clp) << ',' << csv_ratio(exact, clp) << ',';
    if (a.timing) std::cout << std::fixed << std::setprecision(3) << ms << std::defaultfloat;
    std::cout << '\n';
  }
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string input = "-";
  std::string format = "csv";
};

void run_diagnose(const DiagnoseArgs& a) {
  std::vector<std::string> warnings;
  Instance inst = load_instance(a.input, warnings);
  auto x = mba::solve_assignment_lp(inst);
  auto d = mba::diagnostics(inst, x);
  if (a.format == "csv") {
    mba::write_diagnostics_csv(std::cout, inst, d);
    return;
  }
  Json out;
  out["command"] = "diagnose";
  put_number(out, "val_total", d.val_total);
  put_number(out, "expected_total", d.expected_total);
  Json players = Json::array();
  for (const auto& p : d.players) {
    Json row;
    row["player"] = inst.player_id(p.player);
    row["alpha"] = p.alpha ? Json(p.alpha->str()) : Json("inf");
    put_number(row, "val", p.val);
    put_number(row, "bound", p.bound);
    put_number(row, "measured", p.measured);
    Json buckets = Json::array();
    for (const auto& b : p.buckets) {
      buckets.push_back(Json{{"a", b.a.str()}, {"r", b.r.str()}, {"q", b.q.str()}, {"above_mass", b.above_mass.str()}});
    }
    row["buckets"] = std::move(buckets);
    players.push_back(std::move(row));
  }
  out["players"] = std::move(players);
  attach_warnings(out, warnings);
  emit(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum budgeted allocation: relaxations, rounding and generators"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve an LP relaxation");
  s->add_option("--relaxation", solve.relaxation)->check(CLI::IsMember({"assignment", "config-exact", "config-colgen"}));
  s->add_option("instance", solve.input, "Instance JSON path or - for stdin");

  RoundArgs round;
  auto* r = app.add_subcommand("round", "Round a relaxation to an integral assignment");
  r->add_option("--alg", round.alg)->check(CLI::IsMember({"bucket", "restricted", "graph"}));
  r->add_option("--mode", round.mode)->check(CLI::IsMember({"sample", "best"}));
  r->add_option("--seed", round.seed);
  r->add_option("--trials", round.trials)->check(CLI::PositiveNumber);
  r->add_option("--delta", round.delta);
  r->add_option("--epsilon", round.epsilon);
  r->add_option("--beta", round.beta);
  r->add_option("instance", round.input, "Instance JSON path or - for stdin");

  ExactArgs exact;
  auto* e = app.add_subcommand("exact", "Exact integral optimum (small instances)");
  e->add_option("--node-budget", exact.node_budget);
  e->add_option("instance", exact.input, "Instance JSON path or - for stdin");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate an instance");
  g->add_option("--family", gen.family)->check(CLI::IsMember({"gap", "2lin", "random", "ring"}));
  g->add_option("--p", gen.p);
  g->add_option("--q", gen.q);
  g->add_option("--system", gen.system_path, "File of equations x+y=b (2lin)");
  g->add_option("--equations", gen.equations, "Equations separated by ';' (2lin)");
  g->add_option("--kind", gen.kind)->check(CLI::IsMember({"general", "restricted", "graph"}));
  g->add_option("--n", gen.n)->check(CLI::PositiveNumber);
  g->add_option("--m", gen.m)->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed);
  g->add_option("--profile", gen.profile)->check(CLI::IsMember({"uniform", "bimodal"}));
  g->add_option("--beta", gen.beta);
  g->add_option("--big-share", gen.big_share);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check the library invariants on an instance");
  v->add_option("--node-budget", verify.node_budget);
  v->add_option("instance", verify.input, "Instance JSON path or - for stdin");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Sweep a generated corpus and print CSV");
  b->add_option("--family", bench.family)->check(CLI::IsMember({"random", "gap"}));
  b->add_option("--count", bench.count);
  b->add_option("--max-n", bench.max_n);
  b->add_option("--max-m", bench.max_m);
  b->add_option("--max-p", bench.max_p);
  b->add_option("--max-q", bench.max_q);
  b->add_option("--seed", bench.seed);
  b->add_option("--trials", bench.trials)->check(CLI::PositiveNumber);
  b->add_option("--node-budget", bench.node_budget);
  b->add_flag("--timing", bench.timing, "Fill the wall_ms column");

  DiagnoseArgs diag;
  auto* d = app.add_subcommand("diagnose", "Per-player bucket diagnostics");
  d->add_option("--format", diag.format)->check(CLI::IsMember({"csv", "json"}));
  d->add_option("instance", diag.input, "Instance JSON path or - for stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (s->parsed()) run_solve(solve);
    if (r->parsed()) run_round(round);
    if (e->parsed()) run_exact(exact);
    if (g->parsed()) run_gen(gen);
    if (v->parsed()) return run_verify(verify);
    if (b->parsed()) run_bench(bench);
    if (d->parsed()) run_diagnose(diag);
  } catch (const UsageError& err) {
    std::cerr << err.what() << '\n';
    return 2;
  } catch (const mba::Error& err) {
    emit(Json{{"error", Json{{"kind", err.kind()}, {"message", err.what()}}}});
    return 1;
  } catch (const std::exception& err) {
    emit(Json{{"error", Json{{"kind", "internal"}, {"message", err.what()}}}});
    return 1;
  }
  return 0;
}
