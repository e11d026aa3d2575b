// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference definitions for tests. Nothing here calls the
// library's solver or oracles; only CnfFormula is shared.

#pragma once

#include "satprobe/cnf.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace satprobe::ref {

/// Random formula with distinct variables per clause, widths 1..min(4, n).
inline CnfFormula randomFormula(std::mt19937_64 &rng, std::uint32_t n,
                                std::uint32_t m) {
  std::vector<Clause> clauses;
  std::uniform_int_distribution<std::uint32_t> widthDist(1, std::min(4U, n));
  for (std::uint32_t i = 0; i < m; ++i) {
    std::vector<std::uint32_t> vars(n);
    for (std::uint32_t v = 0; v < n; ++v)
      vars[v] = v + 1;
    std::shuffle(vars.begin(), vars.end(), rng);
    const std::uint32_t k = widthDist(rng);
    Clause c;
    for (std::uint32_t j = 0; j < k; ++j)
      c.emplace_back(vars[j], (rng() & 1U) != 0);
    clauses.push_back(std::move(c));
  }
  return CnfFormula(n, std::move(clauses));
}

/// Bit i of the result is set iff clause i is satisfied by assignment word
/// `a` (bit v-1 of `a` is the value of variable v).
inline std::uint64_t satisfiedClauses(const CnfFormula &f, std::uint32_t a) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < f.numClauses(); ++i)
    for (Literal l : f.clause(i))
      if ((((a >> (l.var() - 1)) & 1U) != 0) == l.positive()) {
        mask |= std::uint64_t{1} << i;
        break;
      }
  return mask;
}

inline bool bruteSatisfiable(const CnfFormula &f) {
  const std::uint64_t all = (std::uint64_t{1} << f.numClauses()) - 1;
  for (std::uint32_t a = 0; a < (1U << f.numVars()); ++a)
    if (satisfiedClauses(f, a) == all)
      return true;
  return false;
}

inline std::size_t bruteMaxSat(const CnfFormula &f) {
  std::size_t best = 0;
  for (std::uint32_t a = 0; a < (1U << f.numVars()); ++a)
    best = std::max<std::size_t>(best,
                                 std::popcount(satisfiedClauses(f, a)));
  return best;
}

/// satTable[K] is true iff the clauses in mask K are jointly satisfiable
/// (K = 0 is satisfiable). Built by marking each assignment's satisfied set
/// and closing downward over subsets.
inline std::vector<bool> subsetSatTable(const CnfFormula &f) {
  const std::size_t m = f.numClauses();
  std::vector<bool> sat(std::size_t{1} << m, false);
  for (std::uint32_t a = 0; a < (1U << f.numVars()); ++a)
    sat[satisfiedClauses(f, a)] = true;
  for (std::size_t bit = 0; bit < m; ++bit)
    for (std::size_t mask = 0; mask < sat.size(); ++mask)
      if (!(mask & (std::size_t{1} << bit)) && sat[mask | (std::size_t{1} << bit)])
        sat[mask] = true;
  return sat;
}

/// Definition: removing S leaves a satisfiable formula and removing any
/// proper subset S' leaves an unsatisfiable one (every S' enumerated).
inline bool isMcsByDefinition(const std::vector<bool> &sat, std::size_t m,
                              std::size_t s) {
  const std::size_t all = (std::size_t{1} << m) - 1;
  if (!sat[all & ~s])
    return false;
  for (std::size_t sub = (s - 1) & s;; sub = (sub - 1) & s) {
    if (sat[all & ~sub])
      return false;
    if (sub == 0)
      break;
  }
  return true;
}

/// Definition: S is unsatisfiable and every proper subset is satisfiable.
inline bool isMusByDefinition(const std::vector<bool> &sat, std::size_t s) {
  if (sat[s])
    return false;
  for (std::size_t sub = (s - 1) & s;; sub = (sub - 1) & s) {
    if (!sat[sub])
      return false;
    if (sub == 0)
      break;
  }
  return true;
}

inline std::vector<bool> maskToSubset(std::size_t mask, std::size_t m) {
  std::vector<bool> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = ((mask >> i) & 1U) != 0;
  return out;
}

inline std::string maskToBits(std::size_t mask, std::size_t width) {
  std::string out(width, '0');
  for (std::size_t i = 0; i < width; ++i)
    if ((mask >> i) & 1U)
      out[i] = '1';
  return out;
}

/// Seeded stream of unsatisfiable formulas with n in [2, maxN] and m in
/// [n + 1, maxM].
inline CnfFormula randomUnsatFormula(std::mt19937_64 &rng, std::uint32_t maxN,
                                     std::uint32_t maxM) {
  for (;;) {
    std::uniform_int_distribution<std::uint32_t> nDist(2, maxN);
    const std::uint32_t n = nDist(rng);
    std::uniform_int_distribution<std::uint32_t> mDist(std::min(n + 1, maxM),
                                                       maxM);
    CnfFormula f = randomFormula(rng, n, mDist(rng));
    if (!bruteSatisfiable(f))
      return f;
  }
}

} // namespace satprobe::ref
