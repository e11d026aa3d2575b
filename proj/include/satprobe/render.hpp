// SPDX-License-Identifier: Apache-2.0
//
// Question rendering: formula text in four surface formats and full prompts
// for the five problem types under the eval and rft templates.

#pragma once

#include "satprobe/cnf.hpp"
#include "satprobe/generator.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satprobe {

enum class ProblemType { SatDp, SatSp, MaxSat, Mcs, Mus };
enum class QuestionFormat { Math, Dimacs, Story, DualStory };
enum class PromptTemplate { Eval, Rft };
enum class ExtractionMode { AnswerLine, Tag };

/// Which pair member a rendered question is about. SATDP yields one question
/// per member; the other problem types bind to a single member.
enum class SubTask { Sat, Unsat };

inline constexpr std::array kProblemTypes = {
    ProblemType::SatDp, ProblemType::SatSp, ProblemType::MaxSat,
    ProblemType::Mcs, ProblemType::Mus};
inline constexpr std::array kQuestionFormats = {
    QuestionFormat::Math, QuestionFormat::Dimacs, QuestionFormat::Story,
    QuestionFormat::DualStory};
inline constexpr std::array kPromptTemplates = {PromptTemplate::Eval,
                                                PromptTemplate::Rft};

inline std::string_view toString(ProblemType t) {
  switch (t) {
  case ProblemType::SatDp:
    return "satdp";
  case ProblemType::SatSp:
    return "satsp";
  case ProblemType::MaxSat:
    return "maxsat";
  case ProblemType::Mcs:
    return "mcs";
  case ProblemType::Mus:
    return "mus";
  }
  return "?";
}

inline std::string_view toString(QuestionFormat f) {
  switch (f) {
  case QuestionFormat::Math:
    return "math";
  case QuestionFormat::Dimacs:
    return "dimacs";
  case QuestionFormat::Story:
    return "story";
  case QuestionFormat::DualStory:
    return "dualstory";
  }
  return "?";
}

inline std::string_view toString(PromptTemplate t) {
  return t == PromptTemplate::Eval ? "eval" : "rft";
}

inline std::string_view toString(ExtractionMode m) {
  return m == ExtractionMode::AnswerLine ? "answer-line" : "tag";
}

inline std::string_view toString(SubTask s) {
  return s == SubTask::Sat ? "sat" : "unsat";
}

namespace detail {
template <typename Enum, std::size_t N>
Enum parseEnum(std::string_view text, const std::array<Enum, N> &values,
               const char *what) {
  for (Enum v : values)
    if (toString(v) == text)
      return v;
  throw std::invalid_argument("unknown " + std::string(what) + " '" +
                              std::string(text) + "'");
}
} // namespace detail

inline ProblemType parseProblemType(std::string_view s) {
  return detail::parseEnum(s, kProblemTypes, "problem type");
}
inline QuestionFormat parseQuestionFormat(std::string_view s) {
  return detail::parseEnum(s, kQuestionFormats, "question format");
}
inline PromptTemplate parsePromptTemplate(std::string_view s) {
  return detail::parseEnum(s, kPromptTemplates, "prompt template");
}
inline ExtractionMode parseExtractionMode(std::string_view s) {
  return detail::parseEnum(
      s, std::array{ExtractionMode::AnswerLine, ExtractionMode::Tag},
      "extraction mode");
}
inline SubTask parseSubTask(std::string_view s) {
  return detail::parseEnum(s, std::array{SubTask::Sat, SubTask::Unsat},
                           "sub-task");
}

/// Logic connectives used by the MATH format and the story annotations.
struct LogicSymbols {
  std::string conj;
  std::string disj;
  std::string neg;

  static LogicSymbols unicode() { return {"∧", "∨", "¬"}; }
  static LogicSymbols ascii() { return {"&", "|", "~"}; }
};

/// Cookie-day vocabulary. Variable i is the i-th flavor; a positive literal
/// is the crunchy variant and a negative literal the chewy one. Clause i is
/// spoken by the i-th friend. Both tables repeat with a numeric suffix past
/// their length so descriptors stay unique.
struct StoryVocabulary {
  static constexpr std::array<std::string_view, 16> kFlavors = {
      "choco",   "vanilla", "peanut", "caramel", "lemon",  "almond",
      "coconut", "ginger",  "honey",  "maple",   "mint",   "oat",
      "pecan",   "raisin",  "cherry", "walnut"};
  static constexpr std::array<std::string_view, 16> kNames = {
      "Alice", "Bob",  "Carol", "Dave",  "Erin",  "Frank", "Grace", "Heidi",
      "Ivan",  "Judy", "Kai",   "Laura", "Mallory", "Nina", "Oscar", "Peggy"};
  static constexpr std::string_view kTrueTexture = "crunchy";
  static constexpr std::string_view kFalseTexture = "chewy";

  static std::string flavor(std::uint32_t var) {
    return cycled(kFlavors, var - 1);
  }
  static std::string person(std::size_t clauseIndex) {
    return cycled(kNames, clauseIndex);
  }
  static std::string cookie(Literal lit) {
    return std::string(lit.positive() ? kTrueTexture : kFalseTexture) + " " +
           flavor(lit.var());
  }

private:
  template <std::size_t N>
  static std::string cycled(const std::array<std::string_view, N> &table,
                            std::size_t index) {
    std::string out(table[index % N]);
    if (index >= N)
      out += " " + std::to_string(index / N + 1);
    return out;
  }
};

namespace detail {

inline std::string literalAnnotation(Literal lit, const LogicSymbols &sym) {
  return (lit.positive() ? std::string() : sym.neg) + "x" +
         std::to_string(lit.var());
}

inline std::string joinList(const std::vector<std::string> &items,
                            std::string_view conjunction) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      if (items.size() > 2)
        out += ",";
      out += " ";
      if (i + 1 == items.size())
        out += std::string(conjunction) + " ";
    }
    out += items[i];
  }
  return out;
}

inline std::string storySentence(std::size_t index, const Clause &clause,
                                 bool dual, const LogicSymbols &sym) {
  std::vector<std::string> cookies;
  for (Literal lit : clause) {
    Literal shown = dual ? lit.negated() : lit;
    cookies.push_back(StoryVocabulary::cookie(shown) + " (" +
                      literalAnnotation(shown, sym) + ")");
  }
  const std::string who = StoryVocabulary::person(index);
  if (dual)
    return who + " will be unhappy only if served " +
           joinList(cookies, "and") + ".";
  return who + " will be happy if served " + joinList(cookies, "or") + ".";
}

} // namespace detail

/// MATH: one parenthesized disjunction per clause joined by the conjunction
/// symbol. DIMACS: the serializer output. STORY / DUALSTORY: one sentence
/// per clause, the dual form listing the negated literals joined by "and".
inline std::string renderFormula(const CnfFormula &formula,
                                 QuestionFormat format,
                                 const LogicSymbols &sym = LogicSymbols::unicode()) {
  std::string out;
  switch (format) {
  case QuestionFormat::Math:
    for (std::size_t i = 0; i < formula.numClauses(); ++i) {
      if (i > 0)
        out += " " + sym.conj + " ";
      out += "(";
      const Clause &c = formula.clause(i);
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (j > 0)
          out += " " + sym.disj + " ";
        out += detail::literalAnnotation(c[j], sym);
      }
      out += ")";
    }
    return out;
  case QuestionFormat::Dimacs:
    out = serializeDimacs(formula);
    out.pop_back();
    return out;
  case QuestionFormat::Story:
  case QuestionFormat::DualStory: {
    const bool dual = format == QuestionFormat::DualStory;
    for (std::size_t i = 0; i < formula.numClauses(); ++i) {
      if (i > 0)
        out += "\n";
      out += detail::storySentence(i, formula.clause(i), dual, sym);
    }
    return out;
  }
  }
  return out;
}

/// Inverse of renderFormula(·, Math); accepts both symbol sets. Without
/// `numVars` the variable count is the largest index mentioned.
inline CnfFormula parseMath(std::string_view text,
                            std::optional<std::uint32_t> numVars = {}) {
  using Kind = FormatError::Kind;
  auto fail = [&](std::size_t pos, const std::string &msg) -> FormatError {
    return FormatError(Kind::BadToken,
                       "math formula, offset " + std::to_string(pos) + ": " +
                           msg);
  };
  auto skipSpace = [&](std::size_t &pos) {
    while (pos < text.size() && detail::isSpace(text[pos]))
      ++pos;
  };
  auto consume = [&](std::size_t &pos, std::string_view token) {
    if (text.substr(pos, token.size()) == token) {
      pos += token.size();
      return true;
    }
    return false;
  };

  std::vector<Clause> clauses;
  std::uint32_t maxVar = 0;
  std::size_t pos = 0;
  skipSpace(pos);
  for (;;) {
    if (!consume(pos, "("))
      throw fail(pos, "expected '('");
    Clause clause;
    for (;;) {
      skipSpace(pos);
      bool positive = true;
      if (consume(pos, "¬") || consume(pos, "~"))
        positive = false;
      if (!consume(pos, "x"))
        throw fail(pos, "expected variable");
      std::size_t start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9')
        ++pos;
      long long index = 0;
      if (!detail::parseInt(text.substr(start, pos - start), index) ||
          index < 1)
        throw fail(start, "expected positive variable index");
      maxVar = std::max(maxVar, static_cast<std::uint32_t>(index));
      clause.emplace_back(static_cast<std::uint32_t>(index), positive);
      skipSpace(pos);
      if (consume(pos, ")"))
        break;
      if (!consume(pos, "∨") && !consume(pos, "|"))
        throw fail(pos, "expected disjunction or ')'");
    }
    clauses.push_back(std::move(clause));
    skipSpace(pos);
    if (pos == text.size())
      break;
    if (!consume(pos, "∧") && !consume(pos, "&"))
      throw fail(pos, "expected conjunction");
    skipSpace(pos);
  }
  return CnfFormula(numVars.value_or(maxVar), std::move(clauses));
}

struct RenderedQuestion {
  std::string prompt;       // user message
  std::string systemPrompt; // carried as metadata, never inside `prompt`
  std::size_t expectedAnswerLen = 0;
  ExtractionMode extractionMode = ExtractionMode::AnswerLine;
  std::string pairId;
  ProblemType problemType = ProblemType::SatSp;
  QuestionFormat format = QuestionFormat::Math;
  PromptTemplate promptTemplate = PromptTemplate::Eval;
  SubTask subTask = SubTask::Sat;
};

inline constexpr std::string_view kEvalSystemPrompt =
    "You are a helpful assistant.";
inline constexpr std::string_view kRftSystemPrompt =
    "You are a helpful AI Assistant that provides well-reasoned and detailed "
    "responses. You first think about the reasoning process as an internal "
    "monologue and then provide the user with the answer. Respond in the "
    "following format: <think>\\n...\\n</think>\\n<answer>\\n...\\n</answer>";
inline constexpr std::string_view kEvalPreamble =
    "Solve the following problem step by step. The last line of your "
    "response should be of the form Answer: $ANSWER (without quotes) where "
    "$ANSWER is the answer to the problem.";
inline constexpr std::string_view kEvalReminder =
    "Remember to put your answer on its own line after \"Answer:\", and you "
    "do not need to use a \\boxed command.";
inline constexpr std::string_view kRftInstruction =
    "Show your work in <think> </think> tags. And return the final answer in "
    "<answer> </answer> tags, for example <answer> 0101 </answer>.";

/// Bits expected in the answer: 1 (SATDP), n (SATSP, MAXSAT), m (MCS, MUS).
inline std::size_t expectedAnswerLength(ProblemType type,
                                        const CnfFormula &formula) {
  switch (type) {
  case ProblemType::SatDp:
    return 1;
  case ProblemType::SatSp:
  case ProblemType::MaxSat:
    return formula.numVars();
  case ProblemType::Mcs:
  case ProblemType::Mus:
    return formula.numClauses();
  }
  return 0;
}

namespace detail {

inline std::string questionHeader(const CnfFormula &f, QuestionFormat format,
                                  const LogicSymbols &sym) {
  const std::string n = std::to_string(f.numVars());
  const std::string m = std::to_string(f.numClauses());
  switch (format) {
  case QuestionFormat::Math:
    return "Given a CNF formula with " + n + " variables and " + m +
           " clauses in mathematical notation:";
  case QuestionFormat::Dimacs:
    return "Given a CNF formula with " + n + " variables and " + m +
           " clauses in DIMACS format:";
  case QuestionFormat::Story:
  case QuestionFormat::DualStory: {
    std::vector<std::string> kinds;
    for (std::uint32_t v = 1; v <= f.numVars(); ++v)
      kinds.push_back(StoryVocabulary::flavor(v) + " (x" + std::to_string(v) +
                      ")");
    std::string out =
        "It is cookie day. There are " + n + " kinds of cookies: " +
        joinList(kinds, "and") +
        ". Each kind is baked either crunchy or chewy: xi is true when "
        "cookie kind i is crunchy and false (" +
        sym.neg + "xi) when it is chewy. " + m + " friends describe ";
    if (format == QuestionFormat::Story)
      out += "what they need; a friend is happy as soon as at least one of "
             "the cookies they list is served:";
    else
      out += "what upsets them; a friend is unhappy only when every cookie "
             "they list is served, and happy otherwise:";
    return out;
  }
  }
  return {};
}

inline std::string taskInstruction(ProblemType type, const CnfFormula &f,
                                   QuestionFormat format) {
  const std::string n = std::to_string(f.numVars());
  const std::string m = std::to_string(f.numClauses());
  const bool story = format == QuestionFormat::Story ||
                     format == QuestionFormat::DualStory;
  const std::string assignmentBits =
      story ? "Output a binary string of length " + n +
                  " ('1' for crunchy, '0' for chewy; the i-th bit is xi)."
            : "Output a binary string of length " + n +
                  " ('1' for true, '0' for false).";
  const std::string subsetBits =
      story ? "Output a binary string of length " + m +
                  " ('1' if the friend is in the set, '0' otherwise; the "
                  "i-th bit refers to the i-th friend in the order listed)."
            : "Output a binary string of length " + m +
                  " ('1' if the clause is in the set, '0' otherwise; the "
                  "i-th bit refers to the i-th clause in the order listed).";
  switch (type) {
  case ProblemType::SatDp:
    return std::string(story ? "Determine whether the cookies can be baked "
                               "so that every friend is happy."
                             : "Determine whether the formula is "
                               "satisfiable.") +
           "\nOutput a binary string of length 1 ('1' for satisfiable, '0' "
           "for unsatisfiable).";
  case ProblemType::SatSp:
    return std::string(story ? "Find a way to bake the cookies so that "
                               "every friend is happy."
                             : "Find a satisfying assignment for the "
                               "formula.") +
           "\n" + assignmentBits;
  case ProblemType::MaxSat:
    return std::string(story ? "Find a way to bake the cookies that makes "
                               "as many friends happy as possible."
                             : "Find an assignment that maximizes the "
                               "number of satisfied clauses.") +
           "\n" + assignmentBits;
  case ProblemType::Mcs:
    return std::string(story ? "Find a minimal set of friends to ignore so "
                               "that all remaining friends can be made "
                               "happy, where ignoring any proper subset of "
                               "that set is not enough."
                             : "Find a minimal correction subset: a set of "
                               "clauses whose removal makes the formula "
                               "satisfiable, where removing any proper "
                               "subset of it leaves the formula "
                               "unsatisfiable.") +
           "\n" + subsetBits;
  case ProblemType::Mus:
    return std::string(story ? "Find a minimal set of friends who can never "
                               "all be happy at the same time, where every "
                               "proper subset of them can be."
                             : "Find a minimal unsatisfiable subset: a set "
                               "of clauses that is unsatisfiable on its "
                               "own, where every proper subset of it is "
                               "satisfiable.") +
           "\n" + subsetBits;
  }
  return {};
}

} // namespace detail

/// Problem statement for one formula: header, formula text and task.
inline std::string renderQuestionBody(const CnfFormula &formula,
                                      ProblemType type, QuestionFormat format,
                                      const LogicSymbols &sym) {
  return detail::questionHeader(formula, format, sym) + "\n\n" +
         renderFormula(formula, format, sym) + "\n\n" +
         detail::taskInstruction(type, formula, format);
}

/// SATDP produces two questions (sat member first); SATSP binds to the sat
/// member, MAXSAT/MCS/MUS to the unsat member.
inline std::vector<RenderedQuestion>
renderQuestion(const CnfPair &pair, std::string_view pairId, ProblemType type,
               QuestionFormat format, PromptTemplate tmpl,
               const LogicSymbols &sym = LogicSymbols::unicode()) {
  std::vector<SubTask> members;
  switch (type) {
  case ProblemType::SatDp:
    members = {SubTask::Sat, SubTask::Unsat};
    break;
  case ProblemType::SatSp:
    members = {SubTask::Sat};
    break;
  default:
    members = {SubTask::Unsat};
    break;
  }

  std::vector<RenderedQuestion> out;
  for (SubTask member : members) {
    const CnfFormula &f = member == SubTask::Sat ? pair.sat : pair.unsat;
    RenderedQuestion q;
    const std::string body = renderQuestionBody(f, type, format, sym);
    if (tmpl == PromptTemplate::Eval) {
      q.prompt = std::string(kEvalPreamble) + "\n\n" + body + "\n\n" +
                 std::string(kEvalReminder);
      q.systemPrompt = kEvalSystemPrompt;
      q.extractionMode = ExtractionMode::AnswerLine;
    } else {
      q.prompt = body + "\n\n" + std::string(kRftInstruction);
      q.systemPrompt = kRftSystemPrompt;
      q.extractionMode = ExtractionMode::Tag;
    }
    q.expectedAnswerLen = expectedAnswerLength(type, f);
    q.pairId = pairId;
    q.problemType = type;
    q.format = format;
    q.promptTemplate = tmpl;
    q.subTask = member;
    out.push_back(std::move(q));
  }
  return out;
}

/// ChatML transcript with the system prompt, ready for a chat model.
inline std::string toChatMl(const RenderedQuestion &q) {
  return "<|im_start|>system\n" + q.systemPrompt + "\n<|im_end|>\n" +
         "<|im_start|>user\n" + q.prompt + "\n<|im_end|>\n" +
         "<|im_start|>assistant\n";
}

} // namespace satprobe
