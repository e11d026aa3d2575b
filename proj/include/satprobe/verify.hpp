// SPDX-License-Identifier: Apache-2.0
//
// Answer extraction, semantic verification and scalar rewards.

#pragma once

#include "satprobe/cnf.hpp"
#include "satprobe/generator.hpp"
#include "satprobe/oracles.hpp"
#include "satprobe/render.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satprobe {

enum class AnswerError { None, NoMatch, WrongLength, NonBinary };

inline std::string_view toString(AnswerError e) {
  switch (e) {
  case AnswerError::None:
    return "none";
  case AnswerError::NoMatch:
    return "no-match";
  case AnswerError::WrongLength:
    return "wrong-length";
  case AnswerError::NonBinary:
    return "non-binary";
  }
  return "?";
}

struct Extraction {
  std::optional<std::string> bits; // set iff error == None
  AnswerError error = AnswerError::None;
  std::string candidate; // raw text that was examined, if any
  std::string detail;

  bool ok() const { return error == AnswerError::None; }
};

struct Verdict {
  bool formatOk = false;
  bool semanticOk = false;
  AnswerError formatError = AnswerError::None;
  std::string detail;
  std::optional<std::string> extracted;
};

struct RewardWeights {
  double correctness = 1.0;
  double tagCount = 0.05;
  double formatMatch = 0.05;

  void validate() const {
    if (correctness < 0 || tagCount < 0 || formatMatch < 0)
      throw std::invalid_argument("reward weights must be non-negative");
  }
};

namespace detail {

// Decodes one UTF-8 sequence; malformed bytes decode as themselves.
inline char32_t decodeUtf8(std::string_view s, std::size_t pos,
                           std::size_t &length) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size())
      return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  length = 1;
  if (b0 < 0x80)
    return b0;
  int need = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    return b0;
  }
  for (int i = 1; i <= need; ++i) {
    int c = cont(static_cast<std::size_t>(i));
    if (c < 0)
      return b0;
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  length = static_cast<std::size_t>(need) + 1;
  return cp;
}

inline std::size_t codepointCount(std::string_view s) {
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    std::size_t len = 1;
    decodeUtf8(s, pos, len);
    pos += len;
    ++count;
  }
  return count;
}

// Unicode whitespace as matched by `\s` on text strings in common regex
// engines (the str.isspace() set).
inline bool isUnicodeSpace(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || (cp >= 0x1C && cp <= 0x20) ||
         cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

inline std::size_t countOccurrences(std::string_view text,
                                    std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

inline char asciiLower(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

// Strips one `\boxed{...}` wrapper, optionally inside `$...$`.
inline std::string_view stripBoxed(std::string_view s) {
  std::string_view inner = s;
  if (inner.size() >= 2 && inner.front() == '$' && inner.back() == '$')
    inner = trim(inner.substr(1, inner.size() - 2));
  constexpr std::string_view kBoxed = "\\boxed{";
  if (inner.size() > kBoxed.size() && inner.substr(0, kBoxed.size()) == kBoxed &&
      inner.back() == '}')
    return trim(inner.substr(kBoxed.size(), inner.size() - kBoxed.size() - 1));
  return s;
}

// Candidate after the last "Answer:" (case-insensitive, optional blanks
// before the colon) up to the end of its line.
inline std::optional<std::string_view> lastAnswerLine(std::string_view text) {
  std::optional<std::string_view> found;
  constexpr std::string_view kWord = "answer";
  for (std::size_t i = 0; i + kWord.size() <= text.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < kWord.size(); ++k)
      if (asciiLower(text[i + k]) != kWord[k]) {
        match = false;
        break;
      }
    if (!match)
      continue;
    std::size_t j = i + kWord.size();
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t'))
      ++j;
    if (j >= text.size() || text[j] != ':')
      continue;
    ++j;
    std::size_t end = text.find('\n', j);
    if (end == std::string_view::npos)
      end = text.size();
    found = text.substr(j, end - j);
  }
  return found;
}

// Content of the last non-overlapping <answer>...</answer> span, scanning
// left to right with the shortest closing match.
inline std::optional<std::string_view> lastAnswerTag(std::string_view text) {
  constexpr std::string_view kOpen = "<answer>";
  constexpr std::string_view kClose = "</answer>";
  std::optional<std::string_view> found;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = text.find(kOpen, pos);
    if (open == std::string_view::npos)
      break;
    const std::size_t start = open + kOpen.size();
    const std::size_t close = text.find(kClose, start);
    if (close == std::string_view::npos)
      break;
    found = text.substr(start, close - start);
    pos = close + kClose.size();
  }
  return found;
}

} // namespace detail

/// Pulls a bit string of exactly `expectedLen` characters out of a model
/// response. The last candidate wins in both modes.
inline Extraction extractAnswer(std::string_view text, ExtractionMode mode,
                                std::size_t expectedLen) {
  if (expectedLen < 1)
    throw std::invalid_argument("expected answer length must be >= 1");
  Extraction out;
  std::optional<std::string_view> raw = mode == ExtractionMode::AnswerLine
                                            ? detail::lastAnswerLine(text)
                                            : detail::lastAnswerTag(text);
  if (!raw) {
    out.error = AnswerError::NoMatch;
    out.detail = mode == ExtractionMode::AnswerLine
                     ? "no 'Answer:' line found"
                     : "no <answer>...</answer> span found";
    return out;
  }
  std::string_view candidate = detail::stripBoxed(detail::trim(*raw));
  out.candidate = candidate;
  for (char ch : candidate)
    if (ch != '0' && ch != '1') {
      out.error = AnswerError::NonBinary;
      out.detail = "answer contains characters other than '0' and '1'";
      return out;
    }
  if (candidate.size() != expectedLen) {
    out.error = AnswerError::WrongLength;
    out.detail = "answer length " + std::to_string(candidate.size()) +
                 " differs from expected length " +
                 std::to_string(expectedLen);
    return out;
  }
  out.bits = std::string(candidate);
  return out;
}

namespace detail {

inline Verdict formatFailure(AnswerError error, std::string detail,
                             std::optional<std::string> extracted = {}) {
  Verdict v;
  v.formatOk = false;
  v.formatError = error;
  v.detail = std::move(detail);
  v.extracted = std::move(extracted);
  return v;
}

inline std::optional<Verdict> checkBits(std::string_view bits,
                                        std::size_t expected) {
  for (char ch : bits)
    if (ch != '0' && ch != '1')
      return formatFailure(AnswerError::NonBinary,
                           "answer contains characters other than '0' and '1'",
                           std::string(bits));
  if (bits.size() != expected)
    return formatFailure(AnswerError::WrongLength,
                         "answer length " + std::to_string(bits.size()) +
                             " differs from expected length " +
                             std::to_string(expected),
                         std::string(bits));
  return std::nullopt;
}

} // namespace detail

/// Checks a single bit string against one pair member. For SATDP this grades
/// one sub-task ('1' = satisfiable); other problem types ignore `member`
/// and use the member they bind to. `knownOptimum` skips the MaxSAT search.
inline Verdict verifyOne(const CnfPair &pair, ProblemType type,
                         SubTask member, std::string_view bits,
                         std::optional<std::size_t> knownOptimum = {}) {
  const CnfFormula &formula =
      type == ProblemType::SatDp
          ? (member == SubTask::Sat ? pair.sat : pair.unsat)
          : (type == ProblemType::SatSp ? pair.sat : pair.unsat);
  if (auto failure =
          detail::checkBits(bits, expectedAnswerLength(type, formula)))
    return *failure;

  Verdict v;
  v.formatOk = true;
  v.extracted = std::string(bits);
  const std::vector<bool> vec = fromBitString(bits);
  switch (type) {
  case ProblemType::SatDp: {
    const bool claimed = vec[0];
    const bool truth = member == SubTask::Sat;
    v.semanticOk = claimed == truth;
    v.detail = std::string("formula is ") +
               (truth ? "satisfiable" : "unsatisfiable") + ", answer says " +
               (claimed ? "satisfiable" : "unsatisfiable");
    break;
  }
  case ProblemType::SatSp: {
    const auto eval = evaluate(formula, vec);
    v.semanticOk = eval.satisfiedCount == formula.numClauses();
    v.detail = "assignment satisfies " + std::to_string(eval.satisfiedCount) +
               " of " + std::to_string(formula.numClauses()) + " clauses";
    break;
  }
  case ProblemType::MaxSat: {
    const auto eval = evaluate(formula, vec);
    const std::size_t optimum =
        knownOptimum ? *knownOptimum : maxsatOptimum(formula).optimum;
    v.semanticOk = eval.satisfiedCount == optimum;
    v.detail = "assignment satisfies " + std::to_string(eval.satisfiedCount) +
               " clauses, optimum is " + std::to_string(optimum);
    break;
  }
  case ProblemType::Mcs:
    v.semanticOk = checkMcs(formula, vec);
    v.detail = v.semanticOk ? "valid minimal correction subset"
                            : "not a minimal correction subset";
    break;
  case ProblemType::Mus:
    v.semanticOk = checkMus(formula, vec);
    v.detail = v.semanticOk ? "valid minimal unsatisfiable subset"
                            : "not a minimal unsatisfiable subset";
    break;
  }
  return v;
}

/// Full verification of a task. SATDP takes two answers (sat member first)
/// and succeeds only when both sub-tasks are right; every other type takes
/// exactly one answer.
inline Verdict verify(const CnfPair &pair, ProblemType type,
                      std::span<const std::string> answers,
                      std::optional<std::size_t> knownOptimum = {}) {
  const std::size_t needed = type == ProblemType::SatDp ? 2 : 1;
  if (answers.size() != needed)
    throw std::invalid_argument(std::string(toString(type)) + " takes " +
                                std::to_string(needed) + " answer(s), got " +
                                std::to_string(answers.size()));
  if (type != ProblemType::SatDp)
    return verifyOne(pair, type, SubTask::Sat, answers[0], knownOptimum);

  Verdict satPart = verifyOne(pair, type, SubTask::Sat, answers[0]);
  Verdict unsatPart = verifyOne(pair, type, SubTask::Unsat, answers[1]);
  Verdict v;
  v.formatOk = satPart.formatOk && unsatPart.formatOk;
  v.formatError = satPart.formatOk ? unsatPart.formatError : satPart.formatError;
  v.semanticOk = v.formatOk && satPart.semanticOk && unsatPart.semanticOk;
  v.detail = "sat sub-task: " + satPart.detail +
             "; unsat sub-task: " + unsatPart.detail;
  if (v.formatOk)
    v.extracted = answers[0] + answers[1];
  return v;
}

/// Extraction plus verification of a single response to one rendered
/// question. Format problems come back as a Verdict, never as an exception.
inline Verdict verifyResponse(const CnfPair &pair, ProblemType type,
                              SubTask member, std::string_view response,
                              ExtractionMode mode,
                              std::optional<std::size_t> knownOptimum = {}) {
  const CnfFormula &formula =
      type == ProblemType::SatDp
          ? (member == SubTask::Sat ? pair.sat : pair.unsat)
          : (type == ProblemType::SatSp ? pair.sat : pair.unsat);
  Extraction ex =
      extractAnswer(response, mode, expectedAnswerLength(type, formula));
  if (!ex.ok())
    return detail::formatFailure(ex.error, ex.detail,
                                 ex.candidate.empty()
                                     ? std::nullopt
                                     : std::optional<std::string>(ex.candidate));
  return verifyOne(pair, type, member, *ex.bits, knownOptimum);
}

/// 0.25 for each of <think>, </think>, <answer>, </answer> that occurs
/// exactly once.
inline double tagCountReward(std::string_view text) {
  double count = 0.0;
  for (std::string_view tag : {"<think>", "</think>", "<answer>", "</answer>"})
    if (detail::countOccurrences(text, tag) == 1)
      count += 0.25;
  return count;
}

/// Length of the first match of
///   <think>.*?</think>\s?<answer>.*?</answer>
/// (dot matching newlines) divided by the text length, both in code points.
inline double formatMatchReward(std::string_view text) {
  if (text.empty())
    return 0.0;
  constexpr std::string_view kThinkOpen = "<think>";
  constexpr std::string_view kThinkClose = "</think>";
  constexpr std::string_view kAnswerOpen = "<answer>";
  constexpr std::string_view kAnswerClose = "</answer>";

  auto matchFrom = [&](std::size_t start) -> std::optional<std::size_t> {
    for (std::size_t close = text.find(kThinkClose, start + kThinkOpen.size());
         close != std::string_view::npos;
         close = text.find(kThinkClose, close + 1)) {
      const std::size_t afterThink = close + kThinkClose.size();
      std::vector<std::size_t> answerStarts;
      if (afterThink < text.size()) {
        std::size_t len = 1;
        if (detail::isUnicodeSpace(detail::decodeUtf8(text, afterThink, len)))
          answerStarts.push_back(afterThink + len); // greedy: one space first
      }
      answerStarts.push_back(afterThink);
      for (std::size_t at : answerStarts) {
        if (text.substr(at, kAnswerOpen.size()) != kAnswerOpen)
          continue;
        const std::size_t end =
            text.find(kAnswerClose, at + kAnswerOpen.size());
        if (end != std::string_view::npos)
          return end + kAnswerClose.size();
      }
    }
    return std::nullopt;
  };

  for (std::size_t start = text.find(kThinkOpen);
       start != std::string_view::npos;
       start = text.find(kThinkOpen, start + 1)) {
    if (auto end = matchFrom(start)) {
      const double matched = static_cast<double>(
          detail::codepointCount(text.substr(start, *end - start)));
      return matched / static_cast<double>(detail::codepointCount(text));
    }
  }
  return 0.0;
}

struct RewardBreakdown {
  double correctness = 0.0;
  double tagCount = 0.0;
  double formatMatch = 0.0;
  double total = 0.0;
  Verdict verdict;
};

/// Weighted sum of answer correctness (tag extraction) and the two format
/// rewards. Total over arbitrary text.
inline RewardBreakdown rewardBreakdown(std::string_view text,
                                       const CnfPair &pair, ProblemType type,
                                       SubTask member,
                                       const RewardWeights &weights = {},
                                       std::optional<std::size_t> knownOptimum = {}) {
  RewardBreakdown r;
  r.verdict =
      verifyResponse(pair, type, member, text, ExtractionMode::Tag, knownOptimum);
  r.correctness = r.verdict.semanticOk ? 1.0 : 0.0;
  r.tagCount = tagCountReward(text);
  r.formatMatch = formatMatchReward(text);
  r.total = weights.correctness * r.correctness +
            weights.tagCount * r.tagCount + weights.formatMatch * r.formatMatch;
  return r;
}

inline double combinedReward(std::string_view text, const CnfPair &pair,
                             ProblemType type, SubTask member,
                             const RewardWeights &weights = {},
                             std::optional<std::size_t> knownOptimum = {}) {
  return rewardBreakdown(text, pair, type, member, weights, knownOptimum).total;
}

} // namespace satprobe
