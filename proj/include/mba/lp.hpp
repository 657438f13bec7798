#pragma once

// Dense two-phase primal simplex. Exact mode runs on Rational with Bland's
// rule; float mode runs on double with Dantzig's rule and falls back to Bland
// after a run of degenerate pivots.
//
// Duals are read from the final basis: every normalized row starts with an
// identity column (its slack or artificial), and the objective-row entry of
// that column is c_B B^-1 for the row.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "mba/errors.hpp"
#include "mba/rational.hpp"

namespace mba {

enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class SolveMode { Exact, Float };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct Constraint {
  std::vector<Rational> coeffs;
  Relation rel = Relation::LessEq;
  Rational rhs;
};

/// maximize objective . x  subject to constraints and lower <= x <= upper.
struct LinearProgram {
  std::vector<Rational> objective;
  std::vector<Constraint> constraints;
  std::vector<Rational> lower;                 // empty or one per variable (default 0)
  std::vector<std::optional<Rational>> upper;  // empty or one per variable (default none)

  std::size_t num_vars() const { return objective.size(); }

  std::size_t add_variable(Rational cost, Rational lo = Rational(), std::optional<Rational> hi = std::nullopt) {
    lower.resize(objective.size());
    upper.resize(objective.size());
    objective.push_back(std::move(cost));
    lower.push_back(std::move(lo));
    upper.push_back(std::move(hi));
    for (auto& c : constraints) c.coeffs.resize(objective.size());
    return objective.size() - 1;
  }

  std::size_t add_constraint(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
    constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
    return constraints.size() - 1;
  }

  void validate() const {
    const std::size_t n = num_vars();
    if (!lower.empty() && lower.size() != n) throw ValidationError("lower bound count does not match variables");
    if (!upper.empty() && upper.size() != n) throw ValidationError("upper bound count does not match variables");
    for (std::size_t r = 0; r < constraints.size(); ++r) {
      if (constraints[r].coeffs.size() != n) {
        throw ValidationError("constraint " + std::to_string(r) + " has " +
                              std::to_string(constraints[r].coeffs.size()) + " coefficients, expected " +
                              std::to_string(n));
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      Rational lo = lower.empty() ? Rational() : lower[k];
      if (lo.sign() < 0) throw ValidationError("negative lower bound");
      if (!upper.empty() && upper[k] && *upper[k] < lo) throw ValidationError("upper bound below lower bound");
    }
  }
};

template <class T>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> primal;
  std::vector<T> dual;        // one per constraint
  std::vector<T> upper_dual;  // one per variable; zero without an upper bound
  T objective{};
};

namespace detail {

template <class T>
struct NumTraits;

template <>
struct NumTraits<Rational> {
  static Rational from(const Rational& v) { return v; }
  static bool pos(const Rational& v) { return v.sign() > 0; }
  static bool neg(const Rational& v) { return v.sign() < 0; }
  static bool zero(const Rational& v) { return v.is_zero(); }
  static Rational clean(const Rational& v) { return v; }
};

template <>
struct NumTraits<double> {
  static constexpr double kEps = 1e-9;
  static double from(const Rational& v) { return v.to_double(); }
  static bool pos(double v) { return v > kEps; }
  static bool neg(double v) { return v < -kEps; }
  static bool zero(double v) { return std::abs(v) <= kEps; }
  static double clean(double v) { return std::abs(v) <= kEps ? 0.0 : v; }
};

template <class T>
class SimplexTableau {
  using Tr = NumTraits<T>;

 public:
  static constexpr std::size_t kDegenerateLimit = 50;
  static constexpr std::size_t kFloatPivotCap = 200000;

  explicit SimplexTableau(const LinearProgram& lp) : lp_(lp) { build(); }

  LpSolution<T> solve() {
    LpSolution<T> out;
    // Phase 1: maximize -(sum of artificials).
    std::vector<T> cost1(cols_, T{});
    for (std::size_t c = art_begin_; c < art_end_; ++c) cost1[c] = T(-1);
    load_objective(cost1);
    if (!iterate(/*allow_artificial=*/true)) throw InvariantError("phase one cannot be unbounded");
    if (Tr::neg(obj_[rhs_col()])) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    drive_out_artificials();

    std::vector<T> cost2(cols_, T{});
    for (std::size_t k = 0; k < nvars_; ++k) cost2[k] = Tr::from(lp_.objective[k]);
    load_objective(cost2);
    if (!iterate(/*allow_artificial=*/false)) {
      out.status = LpStatus::Unbounded;
      return out;
    }

    out.status = LpStatus::Optimal;
    std::vector<T> shifted(cols_, T{});
    for (std::size_t r = 0; r < rows_; ++r) shifted[basis_[r]] = tab_[r][rhs_col()];
    out.primal.resize(nvars_);
    T objective{};
    for (std::size_t k = 0; k < nvars_; ++k) {
      out.primal[k] = Tr::clean(shifted[k] + lower_[k]);
      objective += Tr::from(lp_.objective[k]) * lower_[k];
    }
    out.objective = Tr::clean(objective + obj_[rhs_col()]);
    out.dual.assign(lp_.constraints.size(), T{});
    out.upper_dual.assign(nvars_, T{});
    for (std::size_t r = 0; r < rows_; ++r) {
      T y = obj_[init_col_[r]];
      if (negated_[r]) y = -y;
      y = Tr::clean(y);
      if (row_origin_[r] < lp_.constraints.size()) {
        out.dual[row_origin_[r]] = y;
      } else {
        out.upper_dual[row_origin_[r] - lp_.constraints.size()] = y;
      }
    }
    return out;
  }

 private:
  std::size_t rhs_col() const { return cols_; }

  void build() {
    nvars_ = lp_.num_vars();
    lower_.assign(nvars_, T{});
    for (std::size_t k = 0; k < nvars_ && !lp_.lower.empty(); ++k) lower_[k] = Tr::from(lp_.lower[k]);

    struct Row {
      std::vector<T> a;
      Relation rel;
      T rhs;
      std::size_t origin;
    };
    std::vector<Row> rows;
    for (std::size_t r = 0; r < lp_.constraints.size(); ++r) {
      const auto& c = lp_.constraints[r];
      Row row{std::vector<T>(nvars_), c.rel, Tr::from(c.rhs), r};
      for (std::size_t k = 0; k < nvars_; ++k) {
        row.a[k] = Tr::from(c.coeffs[k]);
        if (!Tr::zero(row.a[k])) row.rhs -= row.a[k] * lower_[k];
      }
      rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < nvars_ && !lp_.upper.empty(); ++k) {
      if (!lp_.upper[k]) continue;
      Row row{std::vector<T>(nvars_), Relation::LessEq, Tr::from(*lp_.upper[k]) - lower_[k],
              lp_.constraints.size() + k};
      row.a[k] = T(1);
      rows.push_back(std::move(row));
    }
    rows_ = rows.size();
    negated_.assign(rows_, false);
    row_origin_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      row_origin_[r] = rows[r].origin;
      if (Tr::neg(rows[r].rhs)) {
        negated_[r] = true;
        for (auto& v : rows[r].a) v = -v;
        rows[r].rhs = -rows[r].rhs;
        if (rows[r].rel == Relation::LessEq) {
          rows[r].rel = Relation::GreaterEq;
        } else if (rows[r].rel == Relation::GreaterEq) {
          rows[r].rel = Relation::LessEq;
        }
      }
    }
    // Column layout: structural | slack/surplus | artificial.
    std::size_t slack_count = 0;
    std::size_t art_count = 0;
    for (const auto& row : rows) {
      if (row.rel != Relation::Equal) ++slack_count;
      if (row.rel != Relation::LessEq) ++art_count;
    }
    art_begin_ = nvars_ + slack_count;
    art_end_ = art_begin_ + art_count;
    cols_ = art_end_;
    tab_.assign(rows_, std::vector<T>(cols_ + 1, T{}));
    basis_.assign(rows_, 0);
    init_col_.assign(rows_, 0);
    std::size_t next_slack = nvars_;
    std::size_t next_art = art_begin_;
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = 0; k < nvars_; ++k) tab_[r][k] = rows[r].a[k];
      tab_[r][rhs_col()] = rows[r].rhs;
      switch (rows[r].rel) {
        case Relation::LessEq:
          tab_[r][next_slack] = T(1);
          basis_[r] = init_col_[r] = next_slack++;
          break;
        case Relation::GreaterEq:
          tab_[r][next_slack++] = T(-1);
          tab_[r][next_art] = T(1);
          basis_[r] = init_col_[r] = next_art++;
          break;
        case Relation::Equal:
          tab_[r][next_art] = T(1);
          basis_[r] = init_col_[r] = next_art++;
          break;
      }
    }
  }

  // obj_[j] = c_B B^-1 A_j - c_j
  void load_objective(const std::vector<T>& cost) {
    obj_.assign(cols_ + 1, T{});
    for (std::size_t j = 0; j < cols_; ++j) obj_[j] = -cost[j];
    for (std::size_t r = 0; r < rows_; ++r) {
      const T& cb = cost[basis_[r]];
      if (Tr::zero(cb)) continue;
      for (std::size_t j = 0; j <= cols_; ++j) {
        if (!Tr::zero(tab_[r][j])) obj_[j] += cb * tab_[r][j];
      }
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    std::vector<T>& prow = tab_[pr];
    T inv = T(1) / prow[pc];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= cols_; ++j) {
      if (Tr::zero(prow[j])) {
        prow[j] = T{};
        continue;
      }
      prow[j] *= inv;
      nz.push_back(j);
    }
    prow[pc] = T(1);
    auto eliminate = [&](std::vector<T>& row) {
      T f = row[pc];
      if (Tr::zero(f)) {
        row[pc] = T{};
        return;
      }
      for (std::size_t j : nz) row[j] -= f * prow[j];
      row[pc] = T{};
    };
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r != pr) eliminate(tab_[r]);
    }
    eliminate(obj_);
    basis_[pr] = pc;
  }

  // Returns false when unbounded.
  bool iterate(bool allow_artificial) {
    const std::size_t limit = allow_artificial ? cols_ : art_begin_;
    bool bland = std::is_same_v<T, Rational>;
    std::size_t degenerate_run = 0;
    std::size_t pivots = 0;
    for (;;) {
      std::optional<std::size_t> enter;
      if (bland) {
        for (std::size_t j = 0; j < limit; ++j) {
          if (Tr::neg(obj_[j])) {
            enter = j;
            break;
          }
        }
      } else {
        T best{};
        for (std::size_t j = 0; j < limit; ++j) {
          if (Tr::neg(obj_[j]) && (!enter || obj_[j] < best)) {
            enter = j;
            best = obj_[j];
          }
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      T best_ratio{};
      for (std::size_t r = 0; r < rows_; ++r) {
        const T& a = tab_[r][*enter];
        if (!Tr::pos(a)) continue;
        T ratio = tab_[r][rhs_col()] / a;
        if (!leave) {
          leave = r;
          best_ratio = ratio;
          continue;
        }
        bool better;
        if constexpr (std::is_same_v<T, Rational>) {
          better = ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[*leave]);
        } else {
          better = ratio < best_ratio - Tr::kEps ||
                   (std::abs(ratio - best_ratio) <= Tr::kEps && basis_[r] < basis_[*leave]);
        }
        if (better) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (!leave) return false;
      if constexpr (!std::is_same_v<T, Rational>) {
        if (++pivots > kFloatPivotCap) throw ConvergenceError("simplex pivot cap exceeded");
        if (Tr::zero(best_ratio)) {
          if (++degenerate_run >= kDegenerateLimit) bland = true;
        } else {
          degenerate_run = 0;
        }
      }
      pivot(*leave, *enter);
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < art_begin_) continue;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (!Tr::zero(tab_[r][j])) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  const LinearProgram& lp_;
  std::size_t nvars_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t art_begin_ = 0;
  std::size_t art_end_ = 0;
  std::vector<T> lower_;
  std::vector<std::vector<T>> tab_;
  std::vector<T> obj_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> init_col_;
  std::vector<std::size_t> row_origin_;
  std::vector<bool> negated_;
};

}  // namespace detail

inline LpSolution<Rational> solve_exact(const LinearProgram& lp) {
  lp.validate();
  return detail::SimplexTableau<Rational>(lp).solve();
}

inline LpSolution<double> solve_float(const LinearProgram& lp) {
  lp.validate();
  return detail::SimplexTableau<double>(lp).solve();
}

/// Mode-dispatching entry point; float results are widened to exact values of
/// the computed doubles.
inline LpSolution<Rational> solve(const LinearProgram& lp, SolveMode mode) {
  if (mode == SolveMode::Exact) return solve_exact(lp);
  auto f = solve_float(lp);
  LpSolution<Rational> out;
  out.status = f.status;
  auto widen = [](const std::vector<double>& v) {
    std::vector<Rational> w;
    w.reserve(v.size());
    for (double d : v) w.push_back(Rational::from_double(d));
    return w;
  };
  out.primal = widen(f.primal);
  out.dual = widen(f.dual);
  out.upper_dual = widen(f.upper_dual);
  out.objective = Rational::from_double(f.objective);
  return out;
}

}  // namespace mba
