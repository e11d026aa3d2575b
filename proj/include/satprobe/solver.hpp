// SPDX-License-Identifier: Apache-2.0
//
// Instrumented DPLL search with two watched literals.
//
// The engine is deliberately simple so that its counters are reproducible:
//   - branching picks the lowest-index unassigned variable, true first;
//   - backtracking is chronological (no learning, no restarts);
//   - search stops as soon as every clause is satisfied, and any variable
//     still unassigned at that point is reported as true.
//
// Counter definitions:
//   decisions     one per new branching variable (the flipped second branch
//                 of a decision is not counted again);
//   conflicts     one per falsified clause discovered, including a unit
//                 clause contradicting an earlier one at the root;
//   propagations  one per literal assigned because a clause became unit,
//                 input unit clauses included.

#pragma once

#include "satprobe/cnf.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace satprobe {

struct SolverStats {
  std::uint64_t decisions = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t propagations = 0;

  friend bool operator==(const SolverStats &, const SolverStats &) = default;
};

enum class SatStatus { Sat, Unsat };

struct SolveResult {
  SatStatus status = SatStatus::Unsat;
  std::optional<Assignment> model;
  SolverStats stats;
};

namespace detail {

class DpllEngine {
public:
  explicit DpllEngine(const CnfFormula &formula)
      : numVars_(formula.numVars()), values_(numVars_, kUnassigned),
        watches_(2 * static_cast<std::size_t>(numVars_)) {
    for (const Clause &c : formula.clauses()) {
      if (c.size() == 1) {
        units_.push_back(encode(c[0]));
        continue;
      }
      std::vector<Lit> lits;
      lits.reserve(c.size());
      for (Literal l : c)
        lits.push_back(encode(l));
      const auto index = static_cast<std::uint32_t>(clauses_.size());
      watches_[lits[0]].push_back(index);
      watches_[lits[1]].push_back(index);
      clauses_.push_back(std::move(lits));
    }
  }

  SolveResult run() {
    SolveResult result;
    bool consistent = assignUnits();
    if (consistent && !propagate()) {
      ++stats_.conflicts;
      consistent = false;
    }
    if (!consistent) {
      result.status = SatStatus::Unsat;
      result.stats = stats_;
      return result;
    }
    for (;;) {
      if (allClausesSatisfied()) {
        result.status = SatStatus::Sat;
        Assignment model(numVars_, true);
        for (std::uint32_t v = 0; v < numVars_; ++v)
          if (values_[v] != kUnassigned)
            model[v] = values_[v] == kTrue;
        result.model = std::move(model);
        result.stats = stats_;
        return result;
      }
      std::uint32_t var = 0;
      while (values_[var] != kUnassigned)
        ++var;
      ++stats_.decisions;
      levels_.push_back({trail_.size(), positiveLit(var), false});
      assign(positiveLit(var));

      while (!propagate()) {
        ++stats_.conflicts;
        while (!levels_.empty() && levels_.back().flipped) {
          undoTo(levels_.back().trailStart);
          levels_.pop_back();
        }
        if (levels_.empty()) {
          result.status = SatStatus::Unsat;
          result.stats = stats_;
          return result;
        }
        Level &top = levels_.back();
        undoTo(top.trailStart);
        top.flipped = true;
        assign(top.decision ^ 1U);
      }
    }
  }

private:
  using Lit = std::uint32_t; // 2 * (var - 1) + (negative ? 1 : 0)

  static constexpr std::int8_t kUnassigned = -1;
  static constexpr std::int8_t kFalse = 0;
  static constexpr std::int8_t kTrue = 1;

  struct Level {
    std::size_t trailStart;
    Lit decision;
    bool flipped;
  };

  static Lit encode(Literal l) {
    return 2 * (l.var() - 1) + (l.positive() ? 0U : 1U);
  }
  static Lit positiveLit(std::uint32_t var) { return 2 * var; }

  std::int8_t litValue(Lit lit) const {
    std::int8_t v = values_[lit >> 1];
    if (v == kUnassigned)
      return kUnassigned;
    return (lit & 1U) ? static_cast<std::int8_t>(1 - v) : v;
  }

  void assign(Lit lit) {
    values_[lit >> 1] = (lit & 1U) ? kFalse : kTrue;
    trail_.push_back(lit);
  }

  void undoTo(std::size_t trailSize) {
    while (trail_.size() > trailSize) {
      values_[trail_.back() >> 1] = kUnassigned;
      trail_.pop_back();
    }
    head_ = trailSize;
  }

  bool assignUnits() {
    for (Lit lit : units_) {
      std::int8_t v = litValue(lit);
      if (v == kTrue)
        continue;
      if (v == kFalse) {
        ++stats_.conflicts;
        return false;
      }
      ++stats_.propagations;
      assign(lit);
    }
    return true;
  }

  // Returns false on conflict.
  bool propagate() {
    while (head_ < trail_.size()) {
      const Lit falsified = trail_[head_++] ^ 1U;
      std::vector<std::uint32_t> &watchList = watches_[falsified];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < watchList.size(); ++i) {
        const std::uint32_t ci = watchList[i];
        std::vector<Lit> &lits = clauses_[ci];
        if (lits[0] == falsified)
          std::swap(lits[0], lits[1]);
        if (litValue(lits[0]) == kTrue) {
          watchList[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k) {
          if (litValue(lits[k]) != kFalse) {
            std::swap(lits[1], lits[k]);
            watches_[lits[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved)
          continue;
        watchList[keep++] = ci;
        if (litValue(lits[0]) == kFalse) {
          for (++i; i < watchList.size(); ++i)
            watchList[keep++] = watchList[i];
          watchList.resize(keep);
          return false;
        }
        ++stats_.propagations;
        assign(lits[0]);
      }
      watchList.resize(keep);
    }
    return true;
  }

  bool allClausesSatisfied() const {
    if (trail_.size() == numVars_)
      return true;
    for (const auto &lits : clauses_) {
      bool sat = false;
      for (Lit lit : lits)
        if (litValue(lit) == kTrue) {
          sat = true;
          break;
        }
      if (!sat)
        return false;
    }
    return true; // unit clauses are already true after assignUnits
  }

  std::uint32_t numVars_;
  std::vector<std::int8_t> values_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<Lit> units_;
  std::vector<Lit> trail_;
  std::vector<Level> levels_;
  std::size_t head_ = 0;
  SolverStats stats_;
};

} // namespace detail

/// Decides satisfiability and reports search counters. Deterministic.
inline SolveResult solve(const CnfFormula &formula) {
  return detail::DpllEngine(formula).run();
}

inline bool isSatisfiable(const CnfFormula &formula) {
  return solve(formula).status == SatStatus::Sat;
}

} // namespace satprobe
