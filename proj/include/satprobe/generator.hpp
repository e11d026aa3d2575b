// SPDX-License-Identifier: Apache-2.0
//
// Paired SAT/UNSAT formula generation.
//
// A candidate formula of m random clauses is regenerated from scratch until
// it is unsatisfiable. A copy then has single literal polarities flipped at
// random, re-solving after each flip, until it becomes satisfiable. Both
// members therefore share n, m, the clause widths and every variable
// occurrence; only polarities differ.

#pragma once

#include "satprobe/cnf.hpp"
#include "satprobe/random.hpp"
#include "satprobe/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace satprobe {

class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GenParams {
  std::uint32_t n = 3;
  std::uint32_t m = 12;
  double pK2 = 0.3;  // probability of a unit clause
  double pGeo = 0.4; // success probability of the width tail
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1)
      throw std::invalid_argument("n must be >= 1");
    if (m < 1)
      throw std::invalid_argument("m must be >= 1");
    if (!(pK2 >= 0.0 && pK2 <= 1.0))
      throw std::invalid_argument("p_k2 must lie in [0, 1]");
    if (!(pGeo > 0.0 && pGeo <= 1.0))
      throw std::invalid_argument("p_geo must lie in (0, 1]");
  }

  friend bool operator==(const GenParams &, const GenParams &) = default;
};

/// maxFlips is a per-formula budget: an unsat formula whose flip walk has
/// not reached a satisfiable one after that many flips is discarded and a
/// new formula is drawn, counting as another attempt.
struct RetryLimits {
  std::uint64_t maxFormulaAttempts = 10000;
  std::uint64_t maxFlips = 100000;
};

struct CnfPair {
  CnfFormula sat;
  CnfFormula unsat;
  GenParams params;
  std::uint64_t flipCount = 0;
};

/// 1 with probability pK2, otherwise 2 + Geometric(pGeo); capped at n.
inline std::uint32_t sampleClauseWidth(const GenParams &params, Rng &rng) {
  std::uint64_t k = 1;
  if (!(rng.real01() < params.pK2))
    k = 2 + rng.geometric(params.pGeo);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(k, params.n));
}

/// k distinct variables drawn without replacement (partial Fisher-Yates),
/// each negated with probability 1/2.
inline Clause randomClause(std::uint32_t n, std::uint32_t k, Rng &rng) {
  if (k < 1 || k > n)
    throw std::invalid_argument("clause width must lie in 1.." +
                                std::to_string(n));
  std::vector<std::uint32_t> vars(n);
  std::iota(vars.begin(), vars.end(), 1U);
  Clause clause;
  clause.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform(n - i));
    std::swap(vars[i], vars[j]);
    clause.emplace_back(vars[i], !rng.coin());
  }
  return clause;
}

/// Inverts one literal: clause uniform over m, literal uniform within it.
inline CnfFormula flipRandomLiteral(const CnfFormula &formula, Rng &rng) {
  std::vector<Clause> clauses = formula.clauses();
  Clause &c = clauses[rng.uniform(clauses.size())];
  Literal &lit = c[rng.uniform(c.size())];
  lit = lit.negated();
  return CnfFormula(formula.numVars(), std::move(clauses));
}

inline CnfPair genCnfPair(const GenParams &params,
                          const RetryLimits &limits = {}) {
  params.validate();
  Rng rng(params.seed);

  std::vector<Clause> clauses;
  for (std::uint64_t attempt = 0; attempt < limits.maxFormulaAttempts;
       ++attempt) {
    clauses.clear();
    while (clauses.size() < params.m) {
      const std::uint32_t k = sampleClauseWidth(params, rng);
      clauses.push_back(randomClause(params.n, k, rng));
    }
    CnfFormula unsat(params.n, clauses);
    if (isSatisfiable(unsat))
      continue;

    CnfFormula sat = unsat;
    std::uint64_t flips = 0;
    bool solved = false;
    while (!solved && flips < limits.maxFlips) {
      sat = flipRandomLiteral(sat, rng);
      ++flips;
      solved = isSatisfiable(sat);
    }
    if (!solved)
      continue; // walk stuck in a sparse region; draw a new formula
    return CnfPair{std::move(sat), std::move(unsat), params, flips};
  }
  throw GenerationError("no pair with n=" + std::to_string(params.n) +
                        ", m=" + std::to_string(params.m) + " after " +
                        std::to_string(limits.maxFormulaAttempts) +
                        " formula attempts");
}

} // namespace satprobe
