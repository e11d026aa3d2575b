// SPDX-License-Identifier: Apache-2.0
//
// CNF formulas, DIMACS text I/O and assignment evaluation.

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satprobe {

/// Raised on structurally invalid formulas and on malformed DIMACS text.
class FormatError : public std::runtime_error {
public:
  enum class Kind {
    BadHeader,
    LiteralOutOfRange,
    ClauseCountMismatch,
    MissingTerminator,
    DuplicateVariable,
    EmptyClause,
    EmptyFormula,
    BadToken,
    SizeMismatch,
  };

  FormatError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

/// A variable index in 1..n together with its polarity.
class Literal {
public:
  constexpr Literal() = default;
  constexpr Literal(std::uint32_t var, bool positive)
      : var_(var), positive_(positive) {}

  /// From a signed DIMACS integer; `value` must be non-zero.
  static constexpr Literal fromDimacs(int value) {
    return Literal(static_cast<std::uint32_t>(value < 0 ? -value : value),
                   value > 0);
  }

  constexpr std::uint32_t var() const { return var_; }
  constexpr bool positive() const { return positive_; }
  constexpr Literal negated() const { return Literal(var_, !positive_); }
  constexpr int toDimacs() const {
    return positive_ ? static_cast<int>(var_) : -static_cast<int>(var_);
  }

  /// True when this literal is satisfied by a value of its variable.
  constexpr bool satisfiedBy(bool value) const { return value == positive_; }

  friend constexpr bool operator==(Literal, Literal) = default;

private:
  std::uint32_t var_ = 0;
  bool positive_ = true;
};

using Clause = std::vector<Literal>;

/// Truth values indexed by variable - 1.
using Assignment = std::vector<bool>;

/// Membership mask over clause positions (0-based internally).
using ClauseSubset = std::vector<bool>;

enum class RestrictMode { Remove, Keep };

/// A conjunction of clauses over variables 1..numVars. Immutable once built;
/// the constructor enforces every structural invariant.
class CnfFormula {
public:
  CnfFormula(std::uint32_t numVars, std::vector<Clause> clauses)
      : numVars_(numVars), clauses_(std::move(clauses)) {
    validate();
  }

  std::uint32_t numVars() const { return numVars_; }
  std::size_t numClauses() const { return clauses_.size(); }
  const std::vector<Clause> &clauses() const { return clauses_; }
  const Clause &clause(std::size_t index) const { return clauses_.at(index); }

  std::size_t numLiterals() const {
    std::size_t total = 0;
    for (const auto &c : clauses_)
      total += c.size();
    return total;
  }

  /// Clause widths in clause order.
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> out;
    out.reserve(clauses_.size());
    for (const auto &c : clauses_)
      out.push_back(c.size());
    return out;
  }

  friend bool operator==(const CnfFormula &, const CnfFormula &) = default;

private:
  void validate() const {
    if (numVars_ < 1)
      throw FormatError(FormatError::Kind::BadHeader,
                        "formula must have at least one variable");
    if (clauses_.empty())
      throw FormatError(FormatError::Kind::EmptyFormula,
                        "formula must have at least one clause");
    std::vector<std::size_t> seenIn(numVars_ + 1, SIZE_MAX);
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      const Clause &c = clauses_[i];
      if (c.empty())
        throw FormatError(FormatError::Kind::EmptyClause,
                          "clause " + std::to_string(i + 1) + " is empty");
      for (Literal lit : c) {
        if (lit.var() < 1 || lit.var() > numVars_)
          throw FormatError(FormatError::Kind::LiteralOutOfRange,
                            "clause " + std::to_string(i + 1) +
                                ": variable " + std::to_string(lit.var()) +
                                " outside 1.." + std::to_string(numVars_));
        if (seenIn[lit.var()] == i)
          throw FormatError(FormatError::Kind::DuplicateVariable,
                            "clause " + std::to_string(i + 1) +
                                ": variable " + std::to_string(lit.var()) +
                                " appears more than once");
        seenIn[lit.var()] = i;
      }
    }
  }

  std::uint32_t numVars_;
  std::vector<Clause> clauses_;
};

namespace detail {

inline bool isSpace(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' ||
         ch == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && isSpace(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && isSpace(s.back()))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> splitWords(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && isSpace(s[i]))
      ++i;
    std::size_t j = i;
    while (j < s.size() && !isSpace(s[j]))
      ++j;
    if (j > i)
      words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

// Strict decimal integer with optional leading '-'. Rejects '+', blanks and
// anything that overflows 32 bits.
inline bool parseInt(std::string_view word, long long &out) {
  if (word.empty())
    return false;
  bool negative = false;
  std::size_t i = 0;
  if (word[0] == '-') {
    negative = true;
    i = 1;
  }
  if (i == word.size())
    return false;
  long long value = 0;
  for (; i < word.size(); ++i) {
    char ch = word[i];
    if (ch < '0' || ch > '9')
      return false;
    value = value * 10 + (ch - '0');
    if (value > 0x7fffffffLL)
      return false;
  }
  out = negative ? -value : value;
  return true;
}

} // namespace detail

/// Parses DIMACS CNF. Comment lines (first non-blank character `c`) may
/// appear anywhere; clauses may span or share lines, each terminated by 0.
inline CnfFormula parseDimacs(std::string_view text) {
  using Kind = FormatError::Kind;
  bool haveHeader = false;
  long long numVars = 0;
  long long numClauses = 0;
  std::vector<Clause> clauses;
  Clause current;
  std::vector<std::size_t> lastSeen;

  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++lineNo;
    const std::string where = "line " + std::to_string(lineNo) + ": ";

    if (line.empty() || line.front() == 'c')
      continue;
    if (line.front() == 'p') {
      if (haveHeader)
        throw FormatError(Kind::BadHeader, where + "duplicate header");
      auto words = detail::splitWords(line);
      if (words.size() != 4 || words[0] != "p" || words[1] != "cnf" ||
          !detail::parseInt(words[2], numVars) ||
          !detail::parseInt(words[3], numClauses) || numVars < 1 ||
          numClauses < 1)
        throw FormatError(Kind::BadHeader,
                          where + "expected 'p cnf <n> <m>' with n, m >= 1");
      haveHeader = true;
      lastSeen.assign(static_cast<std::size_t>(numVars) + 1, SIZE_MAX);
      continue;
    }
    if (!haveHeader)
      throw FormatError(Kind::BadHeader, where + "clause data before header");
    if (line.front() == '%')
      break; // SATLIB end marker

    for (std::string_view word : detail::splitWords(line)) {
      long long value = 0;
      if (!detail::parseInt(word, value))
        throw FormatError(Kind::BadToken,
                          where + "invalid token '" + std::string(word) + "'");
      if (value == 0) {
        if (current.empty())
          throw FormatError(Kind::EmptyClause, where + "empty clause");
        clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      long long magnitude = value < 0 ? -value : value;
      if (magnitude > numVars)
        throw FormatError(Kind::LiteralOutOfRange,
                          where + "literal " + std::to_string(value) +
                              " exceeds declared variable count " +
                              std::to_string(numVars));
      if (lastSeen[magnitude] == clauses.size())
        throw FormatError(Kind::DuplicateVariable,
                          where + "variable " + std::to_string(magnitude) +
                              " repeated within a clause");
      lastSeen[magnitude] = clauses.size();
      current.push_back(Literal::fromDimacs(static_cast<int>(value)));
    }
  }

  if (!haveHeader)
    throw FormatError(Kind::BadHeader, "missing 'p cnf' header");
  if (!current.empty())
    throw FormatError(Kind::MissingTerminator,
                      "last clause is not terminated by 0");
  if (static_cast<long long>(clauses.size()) != numClauses)
    throw FormatError(Kind::ClauseCountMismatch,
                      "header declares " + std::to_string(numClauses) +
                          " clauses but " + std::to_string(clauses.size()) +
                          " were found");
  return CnfFormula(static_cast<std::uint32_t>(numVars), std::move(clauses));
}

/// Header line, then one clause per line, newline-terminated, no comments.
inline std::string serializeDimacs(const CnfFormula &formula) {
  std::string out = "p cnf " + std::to_string(formula.numVars()) + " " +
                    std::to_string(formula.numClauses()) + "\n";
  for (const Clause &c : formula.clauses()) {
    for (Literal lit : c) {
      out += std::to_string(lit.toDimacs());
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

struct Evaluation {
  std::size_t satisfiedCount = 0;
  std::vector<bool> perClause;
};

inline bool clauseSatisfied(const Clause &clause, const Assignment &assignment) {
  for (Literal lit : clause)
    if (lit.satisfiedBy(assignment[lit.var() - 1]))
      return true;
  return false;
}

inline Evaluation evaluate(const CnfFormula &formula,
                           const Assignment &assignment) {
  if (assignment.size() != formula.numVars())
    throw FormatError(FormatError::Kind::SizeMismatch,
                      "assignment has " + std::to_string(assignment.size()) +
                          " values, formula has " +
                          std::to_string(formula.numVars()) + " variables");
  Evaluation result;
  result.perClause.reserve(formula.numClauses());
  for (const Clause &c : formula.clauses()) {
    bool sat = clauseSatisfied(c, assignment);
    result.perClause.push_back(sat);
    result.satisfiedCount += sat ? 1 : 0;
  }
  return result;
}

/// Keeps (mode Keep) or drops (mode Remove) the clauses marked in `subset`.
/// Clause order and the variable count are preserved.
inline CnfFormula restrict(const CnfFormula &formula,
                           const ClauseSubset &subset, RestrictMode mode) {
  if (subset.size() != formula.numClauses())
    throw FormatError(FormatError::Kind::SizeMismatch,
                      "subset mask has " + std::to_string(subset.size()) +
                          " entries, formula has " +
                          std::to_string(formula.numClauses()) + " clauses");
  const bool keepMarked = mode == RestrictMode::Keep;
  std::vector<Clause> kept;
  for (std::size_t i = 0; i < subset.size(); ++i)
    if (subset[i] == keepMarked)
      kept.push_back(formula.clause(i));
  if (kept.empty())
    throw FormatError(FormatError::Kind::EmptyFormula,
                      "restriction eliminates every clause");
  return CnfFormula(formula.numVars(), std::move(kept));
}

/// '0'/'1' text for a boolean vector, index 0 first.
inline std::string toBitString(const std::vector<bool> &bits) {
  std::string out;
  out.reserve(bits.size());
  for (bool b : bits)
    out += b ? '1' : '0';
  return out;
}

inline std::vector<bool> fromBitString(std::string_view bits) {
  std::vector<bool> out;
  out.reserve(bits.size());
  for (char ch : bits) {
    if (ch != '0' && ch != '1')
      throw FormatError(FormatError::Kind::BadToken,
                        "bit string contains non-binary character");
    out.push_back(ch == '1');
  }
  return out;
}

} // namespace satprobe
