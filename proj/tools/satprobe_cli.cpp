// SPDX-License-Identifier: Apache-2.0
//
// satprobe: generate CNF pairs and datasets, render questions, verify and
// score answers.
//
// Exit codes: 0 success (verify: semantic_ok), 1 semantic failure,
// 2 answer format failure, 3 usage error, 4 runtime error.

#include "satprobe/dataset.hpp"
#include "satprobe/render.hpp"
#include "satprobe/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace satprobe;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitSemantic = 1;
constexpr int kExitFormat = 2;
constexpr int kExitUsage = 3;
constexpr int kExitRuntime = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json = false;
  unsigned jobs = 1;
};

std::string formatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string readFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out)
    throw std::runtime_error("failed writing '" + path + "'");
}

// Relative dataset paths that do not exist are looked up in
// $SATPROBE_DATA_DIR.
std::string resolveDataset(const std::string &path) {
  if (fs::exists(path) || fs::path(path).is_absolute())
    return path;
  if (const char *dir = std::getenv("SATPROBE_DATA_DIR")) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate))
      return candidate.string();
  }
  return path;
}

template <typename T, typename F> T parseEnum(const std::string &s, F parse) {
  try {
    return parse(s);
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
}

const DatasetRecord &lookup(const Dataset &d, const std::string &pairId) {
  const DatasetRecord *r = findRecord(d, pairId);
  if (!r)
    throw std::runtime_error("unknown pair id '" + pairId + "'");
  return *r;
}

std::optional<std::size_t> knownOptimum(const DatasetRecord &r) {
  if (r.stats)
    return r.stats->maxsat.optimum;
  return std::nullopt;
}

ojson statsJson(const SolverStats &s) {
  return {{"decisions", s.decisions},
          {"conflicts", s.conflicts},
          {"propagations", s.propagations}};
}

ojson verdictJson(const std::string &pairId, ProblemType type,
                  const Verdict &v) {
  ojson j;
  j["pair_id"] = pairId;
  j["ptype"] = toString(type);
  j["format_ok"] = v.formatOk;
  j["semantic_ok"] = v.semanticOk;
  j["error"] = v.formatOk ? nullptr : ojson(toString(v.formatError));
  j["extracted"] = v.extracted ? ojson(*v.extracted) : ojson(nullptr);
  j["detail"] = v.detail;
  return j;
}

int verdictExit(const Verdict &v) {
  if (!v.formatOk)
    return kExitFormat;
  return v.semanticOk ? 0 : kExitSemantic;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  GenParams params;
  std::optional<std::uint64_t> seed;
  std::string stem = "pair";
};

int runGen(const Globals &g, const GenOptions &o) {
  GenParams params = o.params;
  params.seed = *o.seed;
  try {
    params.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  const CnfPair pair = genCnfPair(params);
  const std::string satPath = o.stem + ".sat.cnf";
  const std::string unsatPath = o.stem + ".unsat.cnf";
  writeFile(satPath, serializeDimacs(pair.sat));
  writeFile(unsatPath, serializeDimacs(pair.unsat));
  if (g.json) {
    std::cout << ojson{{"sat", satPath},
                       {"unsat", unsatPath},
                       {"flip_count", pair.flipCount}}
                     .dump()
              << "\n";
  } else {
    std::cout << satPath << "\n" << unsatPath << "\n";
    std::cerr << "flips: " << pair.flipCount << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- solve

int runSolve(const Globals &g, const std::string &path) {
  const CnfFormula formula = parseDimacs(readFile(path));
  const SolveResult r = solve(formula);
  const bool sat = r.status == SatStatus::Sat;
  if (g.json) {
    ojson j;
    j["status"] = sat ? "SAT" : "UNSAT";
    j["model"] = r.model ? ojson(toBitString(*r.model)) : ojson(nullptr);
    j["stats"] = statsJson(r.stats);
    std::cout << j.dump() << "\n";
  } else {
    std::cout << (sat ? "SAT" : "UNSAT") << "\n";
    if (r.model) {
      std::cout << "v";
      for (std::uint32_t v = 1; v <= formula.numVars(); ++v)
        std::cout << " " << ((*r.model)[v - 1] ? "" : "-") << v;
      std::cout << " 0\n";
    }
    std::cerr << "decisions " << r.stats.decisions << ", conflicts "
              << r.stats.conflicts << ", propagations "
              << r.stats.propagations << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- dataset

struct DatasetOptions {
  std::string grid;
  std::optional<std::uint64_t> seed;
  std::string out;
  GridOptions gridOpts;
  bool noStats = false;
};

int runDataset(const Globals &g, DatasetOptions o) {
  o.gridOpts.jobs = g.jobs;
  GenParams check;
  check.pK2 = o.gridOpts.pK2;
  check.pGeo = o.gridOpts.pGeo;
  try {
    check.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  Dataset d = o.grid == "eval" ? buildEvalGrid(*o.seed, o.gridOpts)
                               : buildRftGrid(*o.seed, o.gridOpts);
  if (!o.noStats)
    annotateAll(d, g.jobs);

  // With no output file the dataset itself goes to stdout, so the summary
  // moves to stderr.
  std::ostream &summary = o.out.empty() ? std::cerr : std::cout;
  if (o.out.empty())
    std::cout << datasetToJsonl(d);
  else
    writeDataset(o.out, d);

  std::map<std::uint32_t, std::size_t> perN;
  for (const DatasetRecord &r : d)
    ++perN[r.pair.params.n];
  if (g.json) {
    ojson counts = ojson::array();
    for (const auto &[n, count] : perN)
      counts.push_back({{"n", n}, {"pairs", count}});
    summary << ojson{{"grid", o.grid},
                     {"pairs", d.size()},
                     {"path", o.out.empty() ? ojson(nullptr) : ojson(o.out)},
                     {"per_n", counts}}
                   .dump()
            << "\n";
  } else {
    summary << "grid " << o.grid << ": " << d.size() << " pairs\n";
    summary << "   n  pairs\n";
    for (const auto &[n, count] : perN) {
      char line[32];
      std::snprintf(line, sizeof line, "%4u  %5zu\n", n, count);
      summary << line;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- render

struct TaskOptions {
  std::string dataset = "eval.jsonl";
  std::string pairId;
  std::string ptype;
};

struct RenderOptions {
  TaskOptions task;
  std::string format = "math";
  std::string tmpl = "eval";
  bool ascii = false;
  bool chatml = false;
};

int runRender(const Globals &g, const RenderOptions &o) {
  const ProblemType type = parseEnum<ProblemType>(o.task.ptype, parseProblemType);
  const QuestionFormat format =
      parseEnum<QuestionFormat>(o.format, parseQuestionFormat);
  const PromptTemplate tmpl = parseEnum<PromptTemplate>(o.tmpl, parsePromptTemplate);
  const Dataset d = readDataset(resolveDataset(o.task.dataset), g.jobs);
  const DatasetRecord &r = lookup(d, o.task.pairId);
  const auto questions =
      renderQuestion(r.pair, r.pairId, type, format, tmpl,
                     o.ascii ? LogicSymbols::ascii() : LogicSymbols::unicode());
  if (g.json) {
    ojson arr = ojson::array();
    for (const RenderedQuestion &q : questions)
      arr.push_back({{"pair_id", q.pairId},
                     {"ptype", toString(q.problemType)},
                     {"format", toString(q.format)},
                     {"template", toString(q.promptTemplate)},
                     {"sub_task", toString(q.subTask)},
                     {"expected_answer_len", q.expectedAnswerLen},
                     {"extraction_mode", toString(q.extractionMode)},
                     {"system_prompt", q.systemPrompt},
                     {"prompt", o.chatml ? toChatMl(q) : q.prompt}});
    std::cout << arr.dump() << "\n";
    return 0;
  }
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (questions.size() > 1)
      std::cout << (i ? "\n" : "") << "=== " << toString(questions[i].subTask)
                << " ===\n";
    if (o.chatml)
      std::cout << toChatMl(questions[i]);
    else
      std::cout << questions[i].prompt << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  TaskOptions task;
  std::vector<std::string> answers;
  std::vector<std::string> responses;
  std::string mode = "answer-line";
  std::string subTask = "sat";
  std::string batch;
};

Verdict verifyTask(const DatasetRecord &r, ProblemType type,
                   const std::vector<std::string> &answers,
                   const std::vector<std::string> &responses,
                   ExtractionMode mode, SubTask subTask) {
  if (!answers.empty())
    return verify(r.pair, type, answers, knownOptimum(r));
  if (type != ProblemType::SatDp || responses.size() == 1) {
    if (responses.size() != 1)
      throw UsageError("expected exactly one response");
    return verifyResponse(r.pair, type, subTask, responses[0], mode,
                          knownOptimum(r));
  }
  if (responses.size() != 2)
    throw UsageError("satdp takes one response per sub-task (sat, unsat)");
  // Two SATDP responses: extract both and grade them as a unit.
  std::vector<std::string> bits;
  for (std::size_t i = 0; i < 2; ++i) {
    const Extraction e = extractAnswer(responses[i], mode, 1);
    if (!e.ok()) {
      Verdict v;
      v.formatError = e.error;
      v.detail = std::string(i ? "unsat" : "sat") + " sub-task: " + e.detail;
      return v;
    }
    bits.push_back(*e.bits);
  }
  return verify(r.pair, type, bits);
}

int runVerifyBatch(const Globals &g, const VerifyOptions &o,
                   const Dataset &d) {
  const std::string text = readFile(o.batch);
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!detail::trim(line).empty())
      lines.push_back(line);
  const ExtractionMode defaultMode =
      parseEnum<ExtractionMode>(o.mode, parseExtractionMode);

  std::vector<std::string> out(lines.size());
  std::vector<int> codes(lines.size(), 0);
  parallelFor(lines.size(), g.jobs, [&](std::size_t i) {
    std::string pairId;
    try {
      const auto item = nlohmann::json::parse(lines[i]);
      pairId = item.at("pair_id").get<std::string>();
      const ProblemType type = parseProblemType(item.at("ptype").get<std::string>());
      const ExtractionMode mode =
          item.contains("mode")
              ? parseExtractionMode(item["mode"].get<std::string>())
              : defaultMode;
      const SubTask sub = item.contains("sub_task")
                              ? parseSubTask(item["sub_task"].get<std::string>())
                              : SubTask::Sat;
      std::vector<std::string> answers, responses;
      if (item.contains("answers"))
        answers = item["answers"].get<std::vector<std::string>>();
      if (item.contains("response"))
        responses.push_back(item["response"].get<std::string>());
      const Verdict v =
          verifyTask(lookup(d, pairId), type, answers, responses, mode, sub);
      out[i] = verdictJson(pairId, type, v).dump();
      codes[i] = verdictExit(v);
    } catch (const std::exception &e) {
      out[i] = ojson{{"pair_id", pairId.empty() ? ojson(nullptr) : ojson(pairId)},
                     {"line", i + 1},
                     {"error", e.what()}}
                   .dump();
      codes[i] = kExitRuntime;
    }
  });
  int worst = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::cout << out[i] << "\n";
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

int runVerify(const Globals &g, const VerifyOptions &o) {
  const Dataset d = readDataset(resolveDataset(o.task.dataset), g.jobs);
  if (!o.batch.empty())
    return runVerifyBatch(g, o, d);
  if (o.task.pairId.empty() || o.task.ptype.empty())
    throw UsageError("--pair-id and --ptype are required without --batch");
  if (o.answers.empty() == o.responses.empty())
    throw UsageError("give either --answer or --response");
  const ProblemType type = parseEnum<ProblemType>(o.task.ptype, parseProblemType);
  const ExtractionMode mode = parseEnum<ExtractionMode>(o.mode, parseExtractionMode);
  const SubTask sub = parseEnum<SubTask>(o.subTask, parseSubTask);
  std::vector<std::string> responses;
  for (const std::string &path : o.responses)
    responses.push_back(readFile(path));
  const DatasetRecord &r = lookup(d, o.task.pairId);
  Verdict v;
  try {
    v = verifyTask(r, type, o.answers, responses, mode, sub);
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  std::cout << verdictJson(r.pairId, type, v).dump() << "\n";
  if (!v.formatOk)
    std::cerr << "format error (" << toString(v.formatError)
              << "): " << v.detail << "\n";
  return verdictExit(v);
}

// ---------------------------------------------------------------- reward

struct RewardOptions {
  TaskOptions task;
  std::string response;
  std::string subTask = "sat";
  RewardWeights weights;
};

int runReward(const Globals &g, const RewardOptions &o) {
  const ProblemType type = parseEnum<ProblemType>(o.task.ptype, parseProblemType);
  const SubTask sub = parseEnum<SubTask>(o.subTask, parseSubTask);
  try {
    o.weights.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  const Dataset d = readDataset(resolveDataset(o.task.dataset), g.jobs);
  const DatasetRecord &r = lookup(d, o.task.pairId);
  const std::string text = readFile(o.response);
  const RewardBreakdown b =
      rewardBreakdown(text, r.pair, type, sub, o.weights, knownOptimum(r));
  if (g.json) {
    ojson j;
    j["pair_id"] = r.pairId;
    j["ptype"] = toString(type);
    j["sub_task"] = toString(sub);
    j["reward"] = b.total;
    j["correctness"] = b.correctness;
    j["tag_count"] = b.tagCount;
    j["format_match"] = b.formatMatch;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << formatDouble(b.total) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- profile

int runProfile(const Globals &g, const std::string &dataset) {
  Dataset d = readDataset(resolveDataset(dataset), g.jobs);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!d[i].stats)
      missing.push_back(i);
  parallelFor(missing.size(), g.jobs, [&](std::size_t k) {
    d[missing[k]].stats = computeDifficulty(d[missing[k]].pair);
  });
  const auto rows = profile(d);
  if (g.json) {
    ojson arr = ojson::array();
    for (const ProfileRow &row : rows)
      arr.push_back({{"n", row.n},
                     {"pairs", row.pairs},
                     {"sat_decisions", row.medianSatDecisions},
                     {"unsat_decisions", row.medianUnsatDecisions},
                     {"unsat_conflicts", row.medianUnsatConflicts},
                     {"unsat_propagations", row.medianUnsatPropagations},
                     {"maxsat_nodes", row.medianMaxsatNodes},
                     {"mcs_calls", row.medianMcsCalls},
                     {"mus_calls", row.medianMusCalls}});
    std::cout << arr.dump() << "\n";
    return 0;
  }
  std::cout << "medians per n\n"
            << "   n  pairs  sat.dec  unsat.dec  unsat.confl  unsat.prop"
               "  maxsat.nodes  mcs.calls  mus.calls\n";
  for (const ProfileRow &row : rows) {
    char line[160];
    std::snprintf(line, sizeof line,
                  "%4u  %5zu  %7.1f  %9.1f  %11.1f  %10.1f  %12.1f  %9.1f  "
                  "%9.1f\n",
                  row.n, row.pairs, row.medianSatDecisions,
                  row.medianUnsatDecisions, row.medianUnsatConflicts,
                  row.medianUnsatPropagations, row.medianMaxsatNodes,
                  row.medianMcsCalls, row.medianMusCalls);
    std::cout << line;
  }
  return 0;
}

void addTaskOptions(CLI::App *cmd, TaskOptions &t, bool required) {
  cmd->add_option("-d,--dataset", t.dataset,
                  "dataset JSONL; relative names also searched in "
                  "$SATPROBE_DATA_DIR")
      ->capture_default_str();
  auto *id = cmd->add_option("--pair-id", t.pairId, "pair id, e.g. eval-0000");
  auto *type = cmd->add_option("--ptype", t.ptype, "satdp|satsp|maxsat|mcs|mus");
  if (required) {
    id->required();
    type->required();
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"satprobe: paired SAT/UNSAT instances, question rendering and "
               "answer verification"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "machine-readable output")->configurable();
  app.add_option("-j,--jobs", g.jobs, "worker threads")
      ->check(CLI::Range(1U, 1024U))
      ->capture_default_str();
  app.fallthrough();

  GenOptions gen;
  auto *genCmd = app.add_subcommand("gen", "generate one SAT/UNSAT pair");
  genCmd->add_option("-n", gen.params.n, "variables")->capture_default_str();
  genCmd->add_option("-m", gen.params.m, "clauses")->capture_default_str();
  genCmd->add_option("--p-k2", gen.params.pK2, "probability of a unit clause")
      ->capture_default_str();
  genCmd->add_option("--p-geo", gen.params.pGeo,
                     "geometric parameter of the clause width")
      ->capture_default_str();
  genCmd->add_option("--seed", gen.seed, "RNG seed")->required();
  genCmd->add_option("-o,--stem", gen.stem, "output path stem")
      ->capture_default_str();

  std::string solvePath;
  auto *solveCmd = app.add_subcommand("solve", "decide a DIMACS file");
  solveCmd->add_option("file", solvePath, "DIMACS CNF")->required();

  DatasetOptions ds;
  auto *dsCmd = app.add_subcommand("dataset", "build the eval or rft grid");
  dsCmd->add_option("grid", ds.grid, "eval|rft")
      ->required()
      ->check(CLI::IsMember({"eval", "rft"}));
  dsCmd->add_option("--seed", ds.seed, "master seed")->required();
  dsCmd->add_option("-o,--out", ds.out, "output JSONL (stdout if omitted)");
  dsCmd->add_option("--p-k2", ds.gridOpts.pK2)->capture_default_str();
  dsCmd->add_option("--p-geo", ds.gridOpts.pGeo)->capture_default_str();
  dsCmd->add_flag("--no-stats", ds.noStats, "skip difficulty annotation");

  RenderOptions ro;
  auto *renderCmd = app.add_subcommand("render", "print the prompt(s) for a task");
  addTaskOptions(renderCmd, ro.task, true);
  renderCmd->add_option("--format", ro.format, "math|dimacs|story|dualstory")
      ->capture_default_str();
  renderCmd->add_option("--template", ro.tmpl, "eval|rft")->capture_default_str();
  renderCmd->add_flag("--ascii", ro.ascii, "ASCII logic symbols for math");
  renderCmd->add_flag("--chatml", ro.chatml, "wrap in a ChatML transcript");

  VerifyOptions vo;
  auto *verifyCmd = app.add_subcommand("verify", "check an answer");
  addTaskOptions(verifyCmd, vo.task, false);
  verifyCmd->add_option("--answer", vo.answers,
                        "bit string (satdp: sat answer, then unsat answer)");
  verifyCmd->add_option("--response", vo.responses,
                        "file with a full model response (satdp: one per "
                        "sub-task, or one with --sub-task)");
  verifyCmd->add_option("--mode", vo.mode, "answer-line|tag")
      ->capture_default_str();
  verifyCmd->add_option("--sub-task", vo.subTask,
                        "satdp member a single response answers")
      ->capture_default_str();
  verifyCmd->add_option("--batch", vo.batch,
                        "JSONL of {pair_id, ptype, answers|response, "
                        "[mode], [sub_task]}; one verdict per line");

  RewardOptions rw;
  auto *rewardCmd = app.add_subcommand("reward", "score a response");
  addTaskOptions(rewardCmd, rw.task, true);
  rewardCmd->add_option("--response", rw.response, "response file")->required();
  rewardCmd->add_option("--sub-task", rw.subTask, "satdp member")
      ->capture_default_str();
  rewardCmd->add_option("--w-correct", rw.weights.correctness)
      ->capture_default_str();
  rewardCmd->add_option("--w-tags", rw.weights.tagCount)->capture_default_str();
  rewardCmd->add_option("--w-format", rw.weights.formatMatch)
      ->capture_default_str();

  std::string profilePath = "eval.jsonl";
  auto *profileCmd = app.add_subcommand("profile", "difficulty medians per n");
  profileCmd->add_option("-d,--dataset", profilePath)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*genCmd)
      return runGen(g, gen);
    if (*solveCmd)
      return runSolve(g, solvePath);
    if (*dsCmd)
      return runDataset(g, ds);
    if (*renderCmd)
      return runRender(g, ro);
    if (*verifyCmd)
      return runVerify(g, vo);
    if (*rewardCmd)
      return runReward(g, rw);
    if (*profileCmd)
      return runProfile(g, profilePath);
  } catch (const UsageError &e) {
    std::cerr << "satprobe: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "satprobe: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
