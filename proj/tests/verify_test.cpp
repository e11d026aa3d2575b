// SPDX-License-Identifier: Apache-2.0

#include "satprobe/verify.hpp"
#include "support/reference.hpp"
#include "support/reward_table.hpp"

#include "gtest/gtest.h"

#include <random>

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

CnfPair smallPair() {
  return CnfPair{f(3, {{1}, {-1, 2}, {2, 3}}), f(3, {{1}, {-1}, {2, 3}}),
                 GenParams{}, 1};
}

CnfPair unitPair() {
  return CnfPair{f(2, {{1}, {1}, {2}}), f(2, {{1}, {-1}, {2}}), GenParams{},
                 1};
}


} // namespace

TEST(ExtractAnswer, AnswerLineExamples) {
  Extraction e = extractAnswer("reasoning...\nAnswer: 101", ExtractionMode::AnswerLine, 3);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "101");

  e = extractAnswer("Answer: 000\nmore thought\nanswer :  110  \n",
                    ExtractionMode::AnswerLine, 3);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "110");

  e = extractAnswer("Final Answer: $\\boxed{011}$", ExtractionMode::AnswerLine, 3);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "011");

  e = extractAnswer("ANSWER: \\boxed{1}", ExtractionMode::AnswerLine, 1);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "1");
}

TEST(ExtractAnswer, TagExamples) {
  Extraction e = extractAnswer("<think>...</think><answer> 0101 </answer>",
                               ExtractionMode::Tag, 4);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "0101");

  e = extractAnswer("<answer>11</answer> changed my mind <answer>\n01\n</answer>",
                    ExtractionMode::Tag, 2);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.bits, "01");
}

TEST(ExtractAnswer, ErrorKinds) {
  EXPECT_EQ(extractAnswer("I think it is 101", ExtractionMode::AnswerLine, 3).error,
            AnswerError::NoMatch);
  EXPECT_EQ(extractAnswer("Answer: 101", ExtractionMode::Tag, 3).error,
            AnswerError::NoMatch);
  EXPECT_EQ(extractAnswer("<answer>101", ExtractionMode::Tag, 3).error,
            AnswerError::NoMatch);
  EXPECT_EQ(extractAnswer("Answer: 10", ExtractionMode::AnswerLine, 3).error,
            AnswerError::WrongLength);
  EXPECT_EQ(extractAnswer("Answer: 1011", ExtractionMode::AnswerLine, 3).error,
            AnswerError::WrongLength);
  EXPECT_EQ(extractAnswer("Answer: 1 0 1", ExtractionMode::AnswerLine, 3).error,
            AnswerError::NonBinary);
  // Binary check runs before the length check.
  EXPECT_EQ(extractAnswer("Answer: yes", ExtractionMode::AnswerLine, 1).error,
            AnswerError::NonBinary);
  EXPECT_EQ(extractAnswer("Answer:", ExtractionMode::AnswerLine, 1).error,
            AnswerError::WrongLength);
  EXPECT_THROW(extractAnswer("Answer: 1", ExtractionMode::AnswerLine, 0),
               std::invalid_argument);
}

TEST(Verify, Examples) {
  CnfPair pair = smallPair();
  auto one = [](std::string s) { return std::vector<std::string>{std::move(s)}; };

  EXPECT_TRUE(verify(pair, ProblemType::SatSp, one("110")).semanticOk);
  EXPECT_FALSE(verify(pair, ProblemType::SatSp, one("100")).semanticOk);

  Verdict wrongLength = verify(pair, ProblemType::SatSp, one("11"));
  EXPECT_FALSE(wrongLength.formatOk);
  EXPECT_EQ(wrongLength.formatError, AnswerError::WrongLength);
  EXPECT_NE(wrongLength.detail.find("length"), std::string::npos);

  CnfPair units = unitPair();
  EXPECT_TRUE(verify(units, ProblemType::MaxSat, one("11")).semanticOk);
  EXPECT_FALSE(verify(units, ProblemType::MaxSat, one("00")).semanticOk);
  EXPECT_TRUE(verify(units, ProblemType::Mcs, one("010")).semanticOk);
  EXPECT_FALSE(verify(units, ProblemType::Mcs, one("011")).semanticOk);
  EXPECT_TRUE(verify(units, ProblemType::Mus, one("110")).semanticOk);
  EXPECT_FALSE(verify(units, ProblemType::Mus, one("111")).semanticOk);
  EXPECT_FALSE(verify(units, ProblemType::Mus, one("000")).semanticOk);

  const std::vector<std::string> dp{"1", "0"};
  EXPECT_TRUE(verify(units, ProblemType::SatDp, dp).semanticOk);
  EXPECT_THROW(verify(units, ProblemType::SatDp, one("1")), std::invalid_argument);
  EXPECT_THROW(verify(units, ProblemType::Mcs, dp), std::invalid_argument);
}

TEST(Verify, KnownOptimumIsUsed) {
  CnfPair units = unitPair();
  EXPECT_TRUE(verify(units, ProblemType::MaxSat, std::vector<std::string>{"11"}, 2)
                  .semanticOk);
  EXPECT_FALSE(verify(units, ProblemType::MaxSat, std::vector<std::string>{"11"}, 3)
                   .semanticOk);
}

TEST(Verify, SatDpConstantStrategiesFail) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GenParams p;
    p.n = 3 + static_cast<std::uint32_t>(seed % 4);
    p.m = 4 * p.n;
    p.seed = seed;
    CnfPair pair = genCnfPair(p);
    int accepted = 0;
    for (const char *a : {"0", "1"})
      for (const char *b : {"0", "1"}) {
        const std::vector<std::string> answers{a, b};
        const bool ok = verify(pair, ProblemType::SatDp, answers).semanticOk;
        accepted += ok;
        if (std::string(a) == std::string(b)) {
          EXPECT_FALSE(ok);
        }
      }
    EXPECT_EQ(accepted, 1);
  }
}

TEST(Verify, AcceptanceSetsMatchExhaustiveReference) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GenParams p;
    p.n = 3 + static_cast<std::uint32_t>(seed % 4);
    p.m = 6 + static_cast<std::uint32_t>(seed % 5);
    p.seed = seed;
    CnfPair pair = genCnfPair(p);
    const std::size_t n = p.n, m = p.m;

    const std::size_t best = ref::bruteMaxSat(pair.unsat);
    const std::uint64_t allClauses = (std::uint64_t{1} << m) - 1;
    for (std::uint32_t a = 0; a < (1U << n); ++a) {
      const std::vector<std::string> bits{ref::maskToBits(a, n)};
      EXPECT_EQ(verify(pair, ProblemType::SatSp, bits).semanticOk,
                ref::satisfiedClauses(pair.sat, a) == allClauses);
      EXPECT_EQ(verify(pair, ProblemType::MaxSat, bits).semanticOk,
                static_cast<std::size_t>(std::popcount(
                    ref::satisfiedClauses(pair.unsat, a))) == best);
    }

    const auto table = ref::subsetSatTable(pair.unsat);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      const std::vector<std::string> bits{ref::maskToBits(mask, m)};
      ASSERT_EQ(verify(pair, ProblemType::Mcs, bits).semanticOk,
                ref::isMcsByDefinition(table, m, mask));
      ASSERT_EQ(verify(pair, ProblemType::Mus, bits).semanticOk,
                ref::isMusByDefinition(table, mask));
    }
  }
}

TEST(VerifyResponse, FormatFailuresAreVerdicts) {
  CnfPair units = unitPair();
  Verdict v = verifyResponse(units, ProblemType::Mus, SubTask::Unsat,
                             "no idea", ExtractionMode::AnswerLine);
  EXPECT_FALSE(v.formatOk);
  EXPECT_EQ(v.formatError, AnswerError::NoMatch);
  v = verifyResponse(units, ProblemType::Mus, SubTask::Unsat,
                     "<answer>110</answer>", ExtractionMode::Tag);
  EXPECT_TRUE(v.semanticOk);
  v = verifyResponse(units, ProblemType::SatDp, SubTask::Unsat,
                     "Answer: 0", ExtractionMode::AnswerLine);
  EXPECT_TRUE(v.semanticOk);
  v = verifyResponse(units, ProblemType::SatDp, SubTask::Sat,
                     "Answer: 0", ExtractionMode::AnswerLine);
  EXPECT_TRUE(v.formatOk);
  EXPECT_FALSE(v.semanticOk);
}

TEST(Rewards, MatchReferenceImplementation) {
  for (const ref::RewardCase &c : ref::kRewardTable) {
    EXPECT_NEAR(tagCountReward(c.text), c.tagCount, 1e-12) << c.text;
    EXPECT_NEAR(formatMatchReward(c.text), c.formatMatch, 1e-12) << c.text;
  }
}

TEST(Rewards, BoundedOnRandomText) {
  std::mt19937_64 rng(5);
  const char *pieces[] = {"<think>", "</think>", "<answer>", "</answer>",
                          " ", "\n", "1", "0", "x", "é"};
  for (int iter = 0; iter < 2000; ++iter) {
    std::string text;
    const int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i)
      text += pieces[rng() % std::size(pieces)];
    const double tags = tagCountReward(text);
    const double format = formatMatchReward(text);
    EXPECT_GE(tags, 0.0);
    EXPECT_LE(tags, 1.0);
    EXPECT_GE(format, 0.0);
    EXPECT_LE(format, 1.0);
  }
}

TEST(CombinedReward, Examples) {
  CnfPair units = unitPair();
  const std::string perfect = "<think>x1 must be both.</think>\n<answer>110</answer>";
  EXPECT_NEAR(combinedReward(perfect, units, ProblemType::Mus, SubTask::Unsat),
              1.10, 1e-12);
  const std::string wrong = "<think>guess</think>\n<answer>111</answer>";
  EXPECT_NEAR(combinedReward(wrong, units, ProblemType::Mus, SubTask::Unsat),
              0.10, 1e-12);
  EXPECT_EQ(combinedReward("", units, ProblemType::Mus, SubTask::Unsat), 0.0);
  EXPECT_NEAR(combinedReward("<answer>110</answer>", units, ProblemType::Mus,
                             SubTask::Unsat),
              1.0 + 0.05 * 0.5, 1e-12);

  RewardWeights onlyFormat{0.0, 0.0, 1.0};
  EXPECT_NEAR(combinedReward(perfect, units, ProblemType::Mus, SubTask::Unsat,
                             onlyFormat),
              1.0, 1e-12);
}

TEST(CombinedReward, CorrectnessDominatesFormat) {
  // Any correct answer outranks every incorrect one under default weights.
  CnfPair units = unitPair();
  const std::string wrapped[] = {"<answer>%</answer>",
                                 "<think>t</think><answer>%</answer>",
                                 "<think>t</think> <answer>%</answer> tail"};
  double worstCorrect = 10.0, bestWrong = -1.0;
  for (std::size_t mask = 0; mask < 8; ++mask)
    for (const std::string &w : wrapped) {
      std::string text = w;
      text.replace(text.find('%'), 1, ref::maskToBits(mask, 3));
      const auto r = rewardBreakdown(text, units, ProblemType::Mcs, SubTask::Unsat);
      (r.correctness > 0 ? worstCorrect : bestWrong) =
          r.correctness > 0 ? std::min(worstCorrect, r.total)
                            : std::max(bestWrong, r.total);
    }
  EXPECT_GT(worstCorrect, bestWrong);
  EXPECT_THROW((RewardWeights{-1.0, 0.0, 0.0}.validate()), std::invalid_argument);
}
