// SPDX-License-Identifier: Apache-2.0

#include "satprobe/render.hpp"
#include "support/reference.hpp"

#include "gtest/gtest.h"

#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

using namespace satprobe;

namespace {

CnfFormula f(std::uint32_t n, std::initializer_list<std::vector<int>> rows) {
  std::vector<Clause> clauses;
  for (const auto &row : rows) {
    Clause c;
    for (int lit : row)
      c.push_back(Literal::fromDimacs(lit));
    clauses.push_back(std::move(c));
  }
  return CnfFormula(n, std::move(clauses));
}

std::string readGolden(const std::string &name) {
  std::ifstream in(std::string(SATPROBE_TEST_DATA_DIR) + "/" + name,
                   std::ios::binary);
  EXPECT_TRUE(in) << name;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char *kFourVarInstance = "p cnf 4 16\n-3 1 4 0\n-1 -4 -2 0\n-1 4 2 0\n"
                               "2 -1 -4 0\n2 -3 4 0\n-3 -4 1 0\n-4 1 -3 0\n"
                               "1 2 -4 0\n-3 -2 1 0\n4 -3 1 0\n-1 -3 2 0\n"
                               "2 -3 4 0\n-1 -2 3 0\n2 3 4 0\n2 3 1 0\n"
                               "1 3 -4 0\n";

CnfPair samplePair() {
  GenParams p;
  p.n = 5;
  p.m = 20;
  p.seed = 31;
  return genCnfPair(p);
}

// Literal annotations "(x3)" / "(¬x3)" of each story line, in order.
std::vector<std::vector<int>> storyAnnotations(const std::string &text) {
  std::vector<std::vector<int>> out;
  std::istringstream lines(text);
  std::string line;
  const std::regex annotation(R"(\(((?:¬)?)x(\d+)\))");
  while (std::getline(lines, line)) {
    std::vector<int> lits;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), annotation);
         it != std::sregex_iterator(); ++it) {
      const int var = std::stoi((*it)[2]);
      lits.push_back((*it)[1].length() ? -var : var);
    }
    out.push_back(lits);
  }
  return out;
}

} // namespace

TEST(RenderFormula, MathExample) {
  CnfFormula clause = f(3, {{1, -2, 3}});
  EXPECT_EQ(renderFormula(clause, QuestionFormat::Math), "(x1 ∨ ¬x2 ∨ x3)");
  EXPECT_EQ(renderFormula(clause, QuestionFormat::Math, LogicSymbols::ascii()),
            "(x1 | ~x2 | x3)");
  EXPECT_EQ(renderFormula(f(2, {{1}, {-1, 2}}), QuestionFormat::Math),
            "(x1) ∧ (¬x1 ∨ x2)");
}

TEST(RenderFormula, DimacsDelegatesToSerializer) {
  EXPECT_EQ(renderFormula(f(3, {{1, -2, 3}}), QuestionFormat::Dimacs),
            "p cnf 3 1\n1 -2 3 0");
}

TEST(RenderFormula, StorySentences) {
  CnfFormula clause = f(3, {{1, -2, 3}});
  EXPECT_EQ(renderFormula(clause, QuestionFormat::Story),
            "Alice will be happy if served crunchy choco (x1), chewy vanilla "
            "(¬x2), or crunchy peanut (x3).");
  EXPECT_EQ(renderFormula(clause, QuestionFormat::DualStory),
            "Alice will be unhappy only if served chewy choco (¬x1), crunchy "
            "vanilla (x2), and chewy peanut (¬x3).");
  EXPECT_EQ(renderFormula(f(2, {{2}, {1, -2}}), QuestionFormat::Story),
            "Alice will be happy if served crunchy vanilla (x2).\n"
            "Bob will be happy if served crunchy choco (x1) or chewy vanilla "
            "(¬x2).");
}

TEST(StoryVocabulary, UniqueDescriptors) {
  std::set<std::string> flavors, people;
  for (std::uint32_t v = 1; v <= 40; ++v)
    flavors.insert(StoryVocabulary::flavor(v));
  for (std::size_t i = 0; i < 70; ++i)
    people.insert(StoryVocabulary::person(i));
  EXPECT_EQ(flavors.size(), 40U);
  EXPECT_EQ(people.size(), 70U);
  EXPECT_EQ(StoryVocabulary::person(16), "Alice 2");
  EXPECT_EQ(StoryVocabulary::cookie(Literal(2, false)), "chewy vanilla");
}

TEST(ParseMath, Examples) {
  EXPECT_EQ(parseMath("(x1 ∨ ¬x2 ∨ x3)"), f(3, {{1, -2, 3}}));
  EXPECT_EQ(parseMath("(x1)"), f(1, {{1}}));
  EXPECT_EQ(parseMath("(x1 | ~x2) & (x2)", 4), f(4, {{1, -2}, {2}}));
  EXPECT_THROW(parseMath("x1 ∨ x2"), FormatError);
  EXPECT_THROW(parseMath("(x1 ∨ )"), FormatError);
  EXPECT_THROW(parseMath("(x1) (x2)"), FormatError);
  EXPECT_THROW(parseMath("(x0)"), FormatError);
  EXPECT_THROW(parseMath("(x1 ∨ x1)"), FormatError);
}

TEST(Formats, RoundTripAndStructuralEquivalence) {
  std::mt19937_64 rng(1234);
  for (int iter = 0; iter < 1000; ++iter) {
    const auto n = static_cast<std::uint32_t>(1 + rng() % 16);
    CnfFormula formula = ref::randomFormula(
        rng, n, static_cast<std::uint32_t>(1 + rng() % 64));
    ASSERT_EQ(parseMath(renderFormula(formula, QuestionFormat::Math), n),
              formula);
    ASSERT_EQ(parseMath(renderFormula(formula, QuestionFormat::Math,
                                      LogicSymbols::ascii()),
                        n),
              formula);
    ASSERT_EQ(parseDimacs(renderFormula(formula, QuestionFormat::Dimacs)),
              formula);

    const auto story =
        storyAnnotations(renderFormula(formula, QuestionFormat::Story));
    const auto dual =
        storyAnnotations(renderFormula(formula, QuestionFormat::DualStory));
    ASSERT_EQ(story.size(), formula.numClauses());
    ASSERT_EQ(dual.size(), formula.numClauses());
    for (std::size_t i = 0; i < formula.numClauses(); ++i) {
      const Clause &c = formula.clause(i);
      ASSERT_EQ(story[i].size(), c.size());
      ASSERT_EQ(dual[i].size(), c.size());
      for (std::size_t j = 0; j < c.size(); ++j) {
        EXPECT_EQ(story[i][j], c[j].toDimacs());
        EXPECT_EQ(dual[i][j], -story[i][j]);
      }
    }
  }
}

TEST(RenderQuestion, EvalPromptMatchesReferenceTemplate) {
  CnfFormula formula = parseDimacs(kFourVarInstance);
  CnfPair pair{formula, f(1, {{1}, {-1}}), GenParams{}, 0};
  auto questions = renderQuestion(pair, "p0", ProblemType::SatSp,
                                  QuestionFormat::Dimacs, PromptTemplate::Eval);
  ASSERT_EQ(questions.size(), 1U);
  EXPECT_EQ(questions[0].prompt + "\n", readGolden("eval_satsp_dimacs.txt"));
  EXPECT_EQ(questions[0].systemPrompt, "You are a helpful assistant.");
  EXPECT_EQ(questions[0].expectedAnswerLen, 4U);
  EXPECT_EQ(questions[0].extractionMode, ExtractionMode::AnswerLine);
  EXPECT_NE(questions[0].prompt.find(
                "Find a satisfying assignment for the formula.\nOutput a "
                "binary string of length 4"),
            std::string::npos);
}

TEST(RenderQuestion, RftChatTranscriptMatchesReferenceTemplate) {
  CnfFormula formula = parseDimacs(kFourVarInstance);
  CnfPair pair{formula, f(1, {{1}, {-1}}), GenParams{}, 0};
  auto questions = renderQuestion(pair, "p0", ProblemType::SatSp,
                                  QuestionFormat::Dimacs, PromptTemplate::Rft);
  ASSERT_EQ(questions.size(), 1U);
  EXPECT_EQ(toChatMl(questions[0]), readGolden("rft_satsp_dimacs_chatml.txt"));
  EXPECT_EQ(questions[0].extractionMode, ExtractionMode::Tag);
  EXPECT_EQ(questions[0].prompt.find("<|im_start|>"), std::string::npos);
}

TEST(RenderQuestion, SatDpYieldsTwoSubTasks) {
  CnfPair pair = samplePair();
  auto questions = renderQuestion(pair, "p1", ProblemType::SatDp,
                                  QuestionFormat::Math, PromptTemplate::Eval);
  ASSERT_EQ(questions.size(), 2U);
  EXPECT_EQ(questions[0].subTask, SubTask::Sat);
  EXPECT_EQ(questions[1].subTask, SubTask::Unsat);
  for (const auto &q : questions) {
    EXPECT_EQ(q.expectedAnswerLen, 1U);
    EXPECT_EQ(q.pairId, "p1");
  }
  EXPECT_NE(questions[0].prompt.find(renderFormula(pair.sat, QuestionFormat::Math)),
            std::string::npos);
  EXPECT_NE(questions[1].prompt.find(renderFormula(pair.unsat, QuestionFormat::Math)),
            std::string::npos);
}

TEST(RenderQuestion, McsRftEndsWithTagInstruction) {
  CnfPair pair = samplePair();
  auto questions = renderQuestion(pair, "p1", ProblemType::Mcs,
                                  QuestionFormat::Math, PromptTemplate::Rft);
  ASSERT_EQ(questions.size(), 1U);
  EXPECT_EQ(questions[0].expectedAnswerLen, pair.unsat.numClauses());
  const std::string suffix =
      "for example <answer> 0101 </answer>.";
  const std::string &prompt = questions[0].prompt;
  ASSERT_GE(prompt.size(), suffix.size());
  EXPECT_EQ(prompt.substr(prompt.size() - suffix.size()), suffix);
}

TEST(RenderQuestion, AnswerLengthContractForEveryCombination) {
  CnfPair pair = samplePair();
  const std::size_t n = pair.sat.numVars();
  const std::size_t m = pair.sat.numClauses();
  std::set<std::string> prompts;
  for (ProblemType type : kProblemTypes)
    for (QuestionFormat format : kQuestionFormats)
      for (PromptTemplate tmpl : kPromptTemplates) {
        auto qs = renderQuestion(pair, "p", type, format, tmpl);
        ASSERT_EQ(qs.size(), type == ProblemType::SatDp ? 2U : 1U);
        for (const auto &q : qs) {
          std::size_t expected = 0;
          switch (type) {
          case ProblemType::SatDp:
            expected = 1;
            break;
          case ProblemType::SatSp:
          case ProblemType::MaxSat:
            expected = n;
            break;
          case ProblemType::Mcs:
          case ProblemType::Mus:
            expected = m;
            break;
          }
          EXPECT_EQ(q.expectedAnswerLen, expected);
          EXPECT_NE(q.prompt.find("binary string of length " +
                                  std::to_string(expected)),
                    std::string::npos);
          EXPECT_EQ(q.extractionMode, tmpl == PromptTemplate::Eval
                                          ? ExtractionMode::AnswerLine
                                          : ExtractionMode::Tag);
          const CnfFormula &bound =
              q.subTask == SubTask::Sat ? pair.sat : pair.unsat;
          if (type == ProblemType::SatSp) {
            EXPECT_EQ(q.subTask, SubTask::Sat);
          }
          if (type == ProblemType::MaxSat || type == ProblemType::Mcs ||
              type == ProblemType::Mus) {
            EXPECT_EQ(q.subTask, SubTask::Unsat);
          }
          EXPECT_NE(q.prompt.find(renderFormula(bound, format)),
                    std::string::npos);
          EXPECT_TRUE(prompts.insert(q.prompt).second)
              << "duplicate prompt for " << toString(type) << "/"
              << toString(format) << "/" << toString(tmpl);
        }
      }
  EXPECT_EQ(prompts.size(), (4U + 2U) * 4U * 2U); // SATDP renders twice
}

TEST(RenderQuestion, Deterministic) {
  CnfPair pair = samplePair();
  auto a = renderQuestion(pair, "p", ProblemType::Mus, QuestionFormat::Story,
                          PromptTemplate::Eval);
  auto b = renderQuestion(pair, "p", ProblemType::Mus, QuestionFormat::Story,
                          PromptTemplate::Eval);
  EXPECT_EQ(a[0].prompt, b[0].prompt);
}

TEST(EnumNames, RoundTrip) {
  for (ProblemType t : kProblemTypes)
    EXPECT_EQ(parseProblemType(toString(t)), t);
  for (QuestionFormat q : kQuestionFormats)
    EXPECT_EQ(parseQuestionFormat(toString(q)), q);
  EXPECT_EQ(parseExtractionMode("tag"), ExtractionMode::Tag);
  EXPECT_THROW(parseProblemType("sat"), std::invalid_argument);
}
