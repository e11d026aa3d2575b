// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth oracles: MaxSAT optimum, MCS/MUS membership checks, single
// witness extraction and an exhaustive reference solver.
//
// Minimality is checked through single-clause deletions only. Both defining
// properties are monotone in the clause set: a superset of an unsatisfiable
// set is unsatisfiable and a subset of a satisfiable set is satisfiable.
// Every proper subset S' of S lies inside some S \ {i}, so
//   MCS: if removing S \ {i} leaves an UNSAT formula for every i, removing
//        any S' (which leaves even more clauses) is UNSAT too;
//   MUS: if S \ {i} is SAT for every i, every S' is SAT as well.

#pragma once

#include "satprobe/cnf.hpp"
#include "satprobe/solver.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace satprobe {

/// Raised when an oracle that needs an unsatisfiable formula gets a
/// satisfiable one, or when brute force is asked to enumerate too much.
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct MaxSatResult {
  std::size_t optimum = 0;
  Assignment witness;
  std::uint64_t nodes = 0; // search-tree nodes visited
};

struct BruteForceResult {
  SatStatus status = SatStatus::Unsat;
  std::optional<Assignment> model;
};

inline constexpr std::uint32_t kBruteForceMaxVars = 20;

namespace detail {

struct ClauseMasks {
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
};

// Bit v-1 of an assignment word holds the value of variable v.
inline std::vector<ClauseMasks> clauseMasks(const CnfFormula &formula) {
  std::vector<ClauseMasks> masks;
  masks.reserve(formula.numClauses());
  for (const Clause &c : formula.clauses()) {
    ClauseMasks m;
    for (Literal l : c)
      (l.positive() ? m.positive : m.negative) |= 1U << (l.var() - 1);
    masks.push_back(m);
  }
  return masks;
}

inline Assignment wordToAssignment(std::uint32_t word, std::uint32_t n) {
  Assignment a(n);
  for (std::uint32_t v = 0; v < n; ++v)
    a[v] = ((word >> v) & 1U) != 0;
  return a;
}

// Solver over the clauses selected by `select`; the empty clause set is
// satisfiable. Counts every call in `calls`.
inline bool subsetSatisfiable(const CnfFormula &formula,
                              const std::vector<bool> &select,
                              std::uint64_t &calls) {
  ++calls;
  std::vector<Clause> kept;
  for (std::size_t i = 0; i < select.size(); ++i)
    if (select[i])
      kept.push_back(formula.clause(i));
  if (kept.empty())
    return true;
  return isSatisfiable(CnfFormula(formula.numVars(), std::move(kept)));
}

inline void requireUnsat(const CnfFormula &formula, const char *who) {
  if (isSatisfiable(formula))
    throw PreconditionError(std::string(who) +
                            " requires an unsatisfiable formula");
}

inline void requireMaskSize(const CnfFormula &formula,
                            const ClauseSubset &subset) {
  if (subset.size() != formula.numClauses())
    throw FormatError(FormatError::Kind::SizeMismatch,
                      "subset mask has " + std::to_string(subset.size()) +
                          " entries, formula has " +
                          std::to_string(formula.numClauses()) + " clauses");
}

class MaxSatSearch {
public:
  explicit MaxSatSearch(const CnfFormula &formula)
      : formula_(formula), values_(formula.numVars(), -1),
        occurrences_(formula.numVars()),
        unassignedIn_(formula.numClauses()),
        trueIn_(formula.numClauses(), 0) {
    for (std::size_t ci = 0; ci < formula.numClauses(); ++ci) {
      const Clause &c = formula.clause(ci);
      unassignedIn_[ci] = c.size();
      for (Literal l : c)
        occurrences_[l.var() - 1].push_back({ci, l.positive()});
    }
  }

  MaxSatResult run() {
    best_.witness.assign(formula_.numVars(), false);
    best_.optimum = 0;
    bestFound_ = false;
    descend(0);
    return best_;
  }

private:
  struct Occurrence {
    std::size_t clause;
    bool positive;
  };

  // satisfied_ counts clauses with a true literal; falsified_ counts clauses
  // whose literals are all assigned false.
  void descend(std::uint32_t var) {
    ++best_.nodes;
    const std::size_t upper = formula_.numClauses() - falsified_;
    if (bestFound_ && upper <= best_.optimum)
      return;
    if (var == formula_.numVars()) {
      best_.optimum = satisfied_;
      for (std::uint32_t v = 0; v < var; ++v)
        best_.witness[v] = values_[v] == 1;
      bestFound_ = true;
      return;
    }
    for (int value = 0; value <= 1; ++value) {
      set(var, value == 1);
      descend(var + 1);
      unset(var);
      if (best_.optimum == formula_.numClauses())
        return;
    }
  }

  void set(std::uint32_t var, bool value) {
    values_[var] = value ? 1 : 0;
    for (const Occurrence &o : occurrences_[var]) {
      --unassignedIn_[o.clause];
      if (o.positive == value) {
        if (trueIn_[o.clause]++ == 0)
          ++satisfied_;
      } else if (unassignedIn_[o.clause] == 0 && trueIn_[o.clause] == 0) {
        ++falsified_;
      }
    }
  }

  void unset(std::uint32_t var) {
    const bool value = values_[var] == 1;
    for (const Occurrence &o : occurrences_[var]) {
      if (o.positive == value) {
        if (--trueIn_[o.clause] == 0)
          --satisfied_;
      } else if (unassignedIn_[o.clause] == 0 && trueIn_[o.clause] == 0) {
        --falsified_;
      }
      ++unassignedIn_[o.clause];
    }
    values_[var] = -1;
  }

  const CnfFormula &formula_;
  std::vector<int> values_;
  std::vector<std::vector<Occurrence>> occurrences_;
  std::vector<std::size_t> unassignedIn_;
  std::vector<std::size_t> trueIn_;
  std::size_t satisfied_ = 0;
  std::size_t falsified_ = 0;
  MaxSatResult best_;
  bool bestFound_ = false;
};

} // namespace detail

/// Exhaustive reference solver; the model is the first satisfying
/// assignment with x1 as the least significant bit of a binary counter.
inline BruteForceResult bruteForceSolve(const CnfFormula &formula) {
  const std::uint32_t n = formula.numVars();
  if (n > kBruteForceMaxVars)
    throw PreconditionError("brute force limited to " +
                            std::to_string(kBruteForceMaxVars) + " variables");
  const auto masks = detail::clauseMasks(formula);
  const std::uint32_t limit = 1U << n;
  for (std::uint32_t word = 0; word < limit; ++word) {
    bool all = true;
    for (const auto &m : masks)
      if (((word & m.positive) | (~word & m.negative)) == 0) {
        all = false;
        break;
      }
    if (all)
      return {SatStatus::Sat, detail::wordToAssignment(word, n)};
  }
  return {SatStatus::Unsat, std::nullopt};
}

/// Exact maximum number of simultaneously satisfiable clauses. Depth-first
/// branch and bound over variables in index order, false before true, so the
/// witness is the lexicographically smallest optimal assignment (x1 first).
inline MaxSatResult maxsatOptimum(const CnfFormula &formula) {
  return detail::MaxSatSearch(formula).run();
}

struct OracleEffort {
  std::uint64_t solverCalls = 0;
};

/// True iff removing `subset` leaves a satisfiable formula and removing any
/// proper subset of it does not.
inline bool checkMcs(const CnfFormula &formula, const ClauseSubset &subset,
                     OracleEffort *effort = nullptr) {
  detail::requireMaskSize(formula, subset);
  detail::requireUnsat(formula, "check_mcs");
  std::uint64_t calls = 0;
  bool ok = [&] {
    std::vector<bool> remaining(subset.size());
    bool any = false;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      remaining[i] = !subset[i];
      any = any || subset[i];
    }
    if (!any || !detail::subsetSatisfiable(formula, remaining, calls))
      return false;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (!subset[i])
        continue;
      remaining[i] = true;
      bool sat = detail::subsetSatisfiable(formula, remaining, calls);
      remaining[i] = false;
      if (sat)
        return false;
    }
    return true;
  }();
  if (effort)
    effort->solverCalls += calls;
  return ok;
}

/// True iff `subset` is unsatisfiable and every proper subset is satisfiable.
inline bool checkMus(const CnfFormula &formula, const ClauseSubset &subset,
                     OracleEffort *effort = nullptr) {
  detail::requireMaskSize(formula, subset);
  detail::requireUnsat(formula, "check_mus");
  std::uint64_t calls = 0;
  bool ok = [&] {
    std::vector<bool> core = subset;
    bool any = false;
    for (bool b : core)
      any = any || b;
    if (!any || detail::subsetSatisfiable(formula, core, calls))
      return false;
    for (std::size_t i = 0; i < core.size(); ++i) {
      if (!core[i])
        continue;
      core[i] = false;
      bool sat = detail::subsetSatisfiable(formula, core, calls);
      core[i] = true;
      if (!sat)
        return false;
    }
    return true;
  }();
  if (effort)
    effort->solverCalls += calls;
  return ok;
}

/// One minimal correction subset. Grows a maximal satisfiable clause set
/// greedily in clause order; its complement is then shrunk by dropping any
/// clause whose reinstatement keeps the remainder satisfiable.
inline ClauseSubset findOneMcs(const CnfFormula &formula,
                               OracleEffort *effort = nullptr) {
  detail::requireUnsat(formula, "find_one_mcs");
  std::uint64_t calls = 0;
  const std::size_t m = formula.numClauses();
  std::vector<bool> satisfiable(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    satisfiable[i] = true;
    if (!detail::subsetSatisfiable(formula, satisfiable, calls))
      satisfiable[i] = false;
  }
  ClauseSubset correction(m);
  for (std::size_t i = 0; i < m; ++i)
    correction[i] = !satisfiable[i];
  for (std::size_t i = 0; i < m; ++i) {
    if (!correction[i])
      continue;
    satisfiable[i] = true;
    if (detail::subsetSatisfiable(formula, satisfiable, calls))
      correction[i] = false;
    else
      satisfiable[i] = false;
  }
  if (effort)
    effort->solverCalls += calls;
  return correction;
}

/// One minimal unsatisfiable subset by deletion: clauses are visited in
/// order and dropped whenever the rest stays unsatisfiable.
inline ClauseSubset findOneMus(const CnfFormula &formula,
                               OracleEffort *effort = nullptr) {
  detail::requireUnsat(formula, "find_one_mus");
  std::uint64_t calls = 0;
  ClauseSubset core(formula.numClauses(), true);
  for (std::size_t i = 0; i < core.size(); ++i) {
    core[i] = false;
    if (detail::subsetSatisfiable(formula, core, calls))
      core[i] = true;
  }
  if (effort)
    effort->solverCalls += calls;
  return core;
}

} // namespace satprobe
