// SPDX-License-Identifier: Apache-2.0
//
// Dataset grids, difficulty annotation and line-delimited JSON persistence.
//
// Record layout (schema_version 1), one JSON object per line:
//   schema_version   1
//   pair_id          "eval-0000" / "rft-0000"
//   grid             "eval" | "rft" | "custom"
//   ratio            clause-to-variable ratio of the grid cell, or null
//   params           {n, m, p_k2, p_geo, seed}
//   flip_count       polarity flips used to reach the satisfiable member
//   sat, unsat       DIMACS text of both members
//   stats            null, or
//                    {sat: {decisions, conflicts, propagations},
//                     unsat: {decisions, conflicts, propagations},
//                     maxsat: {optimum, nodes},
//                     mcs: {size, solver_calls}, mus: {size, solver_calls}}
//
// Seeds: pair i of a grid built from master seed s is generated with
// childSeed(s, i), so records can be produced in any order or in parallel.

#pragma once

#include "satprobe/cnf.hpp"
#include "satprobe/generator.hpp"
#include "satprobe/oracles.hpp"
#include "satprobe/random.hpp"
#include "satprobe/solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace satprobe {

inline constexpr int kSchemaVersion = 1;

class DatasetError : public std::runtime_error {
public:
  DatasetError(const std::string &what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  /// 1-based line of the offending record, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct MaxSatEffort {
  std::size_t optimum = 0;
  std::uint64_t nodes = 0;
  friend bool operator==(const MaxSatEffort &, const MaxSatEffort &) = default;
};

struct SubsetEffort {
  std::size_t size = 0;
  std::uint64_t solverCalls = 0;
  friend bool operator==(const SubsetEffort &, const SubsetEffort &) = default;
};

struct DifficultyStats {
  SolverStats sat;
  SolverStats unsat;
  MaxSatEffort maxsat;
  SubsetEffort mcs;
  SubsetEffort mus;
  friend bool operator==(const DifficultyStats &,
                         const DifficultyStats &) = default;
};

struct DatasetRecord {
  std::string pairId;
  std::string grid = "custom";
  std::optional<double> ratio;
  CnfPair pair;
  std::optional<DifficultyStats> stats;
};

using Dataset = std::vector<DatasetRecord>;

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all threads finish.
inline void parallelFor(std::size_t count, unsigned jobs,
                        const std::function<void(std::size_t)> &fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  {
    std::vector<std::jthread> workers;
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failureMutex);
            if (!failure)
              failure = std::current_exception();
            next = count;
          }
        }
      });
  }
  if (failure)
    std::rethrow_exception(failure);
}

/// m = round(ratio * n) with halves rounded up, never below n + 1.
inline std::uint32_t clausesForRatio(std::uint32_t n, double ratio) {
  // Ratios arrive as decimal tenths; scale to integers so 2.5 * 3 rounds up
  // regardless of binary representation error.
  const long long tenths = std::llround(ratio * 10.0);
  const long long scaled = tenths * static_cast<long long>(n); // = 10 * m
  const auto m = static_cast<std::uint32_t>((scaled + 5) / 10);
  return std::max(m, n + 1);
}

struct GridOptions {
  double pK2 = 0.3;
  double pGeo = 0.4;
  unsigned jobs = 1;
  RetryLimits limits;
};

inline std::string formatPairId(std::string_view grid, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4)
    digits.insert(0, 4 - digits.size(), '0');
  return std::string(grid) + "-" + digits;
}

namespace detail {

struct GridCell {
  std::uint32_t n;
  std::uint32_t m;
  std::optional<double> ratio;
};

inline Dataset buildGrid(std::string_view grid,
                         const std::vector<GridCell> &cells,
                         std::uint64_t masterSeed, const GridOptions &opts) {
  std::vector<std::optional<DatasetRecord>> slots(cells.size());
  parallelFor(cells.size(), opts.jobs, [&](std::size_t i) {
    GenParams params;
    params.n = cells[i].n;
    params.m = cells[i].m;
    params.pK2 = opts.pK2;
    params.pGeo = opts.pGeo;
    params.seed = childSeed(masterSeed, i);
    slots[i].emplace(DatasetRecord{formatPairId(grid, i), std::string(grid),
                                   cells[i].ratio,
                                   genCnfPair(params, opts.limits),
                                   std::nullopt});
  });
  Dataset out;
  out.reserve(slots.size());
  for (auto &slot : slots)
    out.push_back(std::move(*slot));
  return out;
}

} // namespace detail

/// 14 sizes (n = 3..16) x 10 pairs, m = 4n.
inline Dataset buildEvalGrid(std::uint64_t seed, const GridOptions &opts = {}) {
  std::vector<detail::GridCell> cells;
  for (std::uint32_t n = 3; n <= 16; ++n)
    for (int rep = 0; rep < 10; ++rep)
      cells.push_back({n, 4 * n, std::nullopt});
  return detail::buildGrid("eval", cells, seed, opts);
}

/// 6 sizes (n = 3..8) x 20 ratios (2.1..4.0 step 0.1) x 25 pairs.
inline Dataset buildRftGrid(std::uint64_t seed, const GridOptions &opts = {}) {
  std::vector<detail::GridCell> cells;
  for (std::uint32_t n = 3; n <= 8; ++n)
    for (int tenths = 21; tenths <= 40; ++tenths) {
      const double ratio = tenths / 10.0;
      for (int rep = 0; rep < 25; ++rep)
        cells.push_back({n, clausesForRatio(n, ratio), ratio});
    }
  return detail::buildGrid("rft", cells, seed, opts);
}

/// Engine counters for both members plus oracle effort on the unsat member.
inline DifficultyStats computeDifficulty(const CnfPair &pair) {
  DifficultyStats s;
  s.sat = solve(pair.sat).stats;
  s.unsat = solve(pair.unsat).stats;
  const MaxSatResult maxsat = maxsatOptimum(pair.unsat);
  s.maxsat = {maxsat.optimum, maxsat.nodes};
  OracleEffort mcsEffort;
  const ClauseSubset mcs = findOneMcs(pair.unsat, &mcsEffort);
  s.mcs = {static_cast<std::size_t>(std::count(mcs.begin(), mcs.end(), true)),
           mcsEffort.solverCalls};
  OracleEffort musEffort;
  const ClauseSubset mus = findOneMus(pair.unsat, &musEffort);
  s.mus = {static_cast<std::size_t>(std::count(mus.begin(), mus.end(), true)),
           musEffort.solverCalls};
  return s;
}

inline DatasetRecord annotateDifficulty(DatasetRecord record) {
  record.stats = computeDifficulty(record.pair);
  return record;
}

inline void annotateAll(Dataset &dataset, unsigned jobs = 1) {
  parallelFor(dataset.size(), jobs, [&](std::size_t i) {
    dataset[i].stats = computeDifficulty(dataset[i].pair);
  });
}

/// Throws std::runtime_error describing the first violated pair invariant.
inline void checkPairInvariants(const CnfPair &pair) {
  if (pair.sat.numVars() != pair.unsat.numVars() ||
      pair.sat.numClauses() != pair.unsat.numClauses())
    throw std::runtime_error("pair members differ in n or m");
  if (pair.sat.numVars() != pair.params.n ||
      pair.sat.numClauses() != pair.params.m)
    throw std::runtime_error("pair size disagrees with its parameters");
  auto satWidths = pair.sat.widths();
  auto unsatWidths = pair.unsat.widths();
  std::sort(satWidths.begin(), satWidths.end());
  std::sort(unsatWidths.begin(), unsatWidths.end());
  if (satWidths != unsatWidths)
    throw std::runtime_error("pair members differ in clause widths");
  if (!isSatisfiable(pair.sat))
    throw std::runtime_error("sat member is unsatisfiable");
  if (isSatisfiable(pair.unsat))
    throw std::runtime_error("unsat member is satisfiable");
}

namespace detail {

inline nlohmann::ordered_json statsToJson(const SolverStats &s) {
  return {{"decisions", s.decisions},
          {"conflicts", s.conflicts},
          {"propagations", s.propagations}};
}

inline SolverStats statsFromJson(const nlohmann::json &j) {
  return {j.at("decisions").get<std::uint64_t>(),
          j.at("conflicts").get<std::uint64_t>(),
          j.at("propagations").get<std::uint64_t>()};
}

} // namespace detail

inline nlohmann::ordered_json recordToJson(const DatasetRecord &r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["pair_id"] = r.pairId;
  j["grid"] = r.grid;
  j["ratio"] = r.ratio ? nlohmann::ordered_json(*r.ratio)
                       : nlohmann::ordered_json(nullptr);
  const GenParams &p = r.pair.params;
  j["params"] = {{"n", p.n},
                 {"m", p.m},
                 {"p_k2", p.pK2},
                 {"p_geo", p.pGeo},
                 {"seed", p.seed}};
  j["flip_count"] = r.pair.flipCount;
  j["sat"] = serializeDimacs(r.pair.sat);
  j["unsat"] = serializeDimacs(r.pair.unsat);
  if (r.stats) {
    const DifficultyStats &s = *r.stats;
    j["stats"] = {
        {"sat", detail::statsToJson(s.sat)},
        {"unsat", detail::statsToJson(s.unsat)},
        {"maxsat", {{"optimum", s.maxsat.optimum}, {"nodes", s.maxsat.nodes}}},
        {"mcs", {{"size", s.mcs.size}, {"solver_calls", s.mcs.solverCalls}}},
        {"mus", {{"size", s.mus.size}, {"solver_calls", s.mus.solverCalls}}}};
  } else {
    j["stats"] = nullptr;
  }
  return j;
}

/// Parses and validates one record, including every pair invariant.
inline DatasetRecord recordFromJson(const nlohmann::json &j) {
  if (!j.is_object())
    throw std::runtime_error("record is not a JSON object");
  if (!j.contains("schema_version"))
    throw std::runtime_error("missing schema_version");
  const auto &version = j.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    throw std::runtime_error("unsupported schema_version " + version.dump() +
                             " (expected " + std::to_string(kSchemaVersion) +
                             ")");
  const auto &p = j.at("params");
  GenParams params;
  params.n = p.at("n").get<std::uint32_t>();
  params.m = p.at("m").get<std::uint32_t>();
  params.pK2 = p.at("p_k2").get<double>();
  params.pGeo = p.at("p_geo").get<double>();
  params.seed = p.at("seed").get<std::uint64_t>();
  DatasetRecord r{j.at("pair_id").get<std::string>(),
                  j.at("grid").get<std::string>(),
                  std::nullopt,
                  CnfPair{parseDimacs(j.at("sat").get<std::string>()),
                          parseDimacs(j.at("unsat").get<std::string>()),
                          params, j.at("flip_count").get<std::uint64_t>()},
                  std::nullopt};
  if (!j.at("ratio").is_null())
    r.ratio = j.at("ratio").get<double>();
  if (!j.at("stats").is_null()) {
    const auto &s = j.at("stats");
    DifficultyStats stats;
    stats.sat = detail::statsFromJson(s.at("sat"));
    stats.unsat = detail::statsFromJson(s.at("unsat"));
    stats.maxsat = {s.at("maxsat").at("optimum").get<std::size_t>(),
                    s.at("maxsat").at("nodes").get<std::uint64_t>()};
    stats.mcs = {s.at("mcs").at("size").get<std::size_t>(),
                 s.at("mcs").at("solver_calls").get<std::uint64_t>()};
    stats.mus = {s.at("mus").at("size").get<std::size_t>(),
                 s.at("mus").at("solver_calls").get<std::uint64_t>()};
    r.stats = stats;
  }
  checkPairInvariants(r.pair);
  return r;
}

inline std::string datasetToJsonl(const Dataset &dataset) {
  std::string out;
  for (const DatasetRecord &r : dataset) {
    out += recordToJson(r).dump();
    out += '\n';
  }
  return out;
}

/// Inverse of datasetToJsonl. Blank lines are skipped; a record that fails
/// to parse or validate raises DatasetError carrying its line number.
inline Dataset datasetFromJsonl(std::string_view text, unsigned jobs = 1) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t lineNo = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    ++lineNo;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!detail::trim(line).empty())
      lines.emplace_back(lineNo, line);
  }
  std::vector<std::optional<DatasetRecord>> slots(lines.size());
  std::vector<std::string> errors(lines.size());
  parallelFor(lines.size(), jobs, [&](std::size_t i) {
    try {
      slots[i] = recordFromJson(nlohmann::json::parse(lines[i].second));
    } catch (const std::exception &e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (!errors[i].empty())
      throw DatasetError(errors[i], lines[i].first);
  Dataset out;
  out.reserve(slots.size());
  for (auto &slot : slots)
    out.push_back(std::move(*slot));
  return out;
}

inline void writeDataset(const std::string &path, const Dataset &dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DatasetError("cannot open '" + path + "' for writing");
  const std::string text = datasetToJsonl(dataset);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw DatasetError("failed writing '" + path + "'");
}

inline Dataset readDataset(const std::string &path, unsigned jobs = 1) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DatasetError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return datasetFromJsonl(buffer.str(), jobs);
}

inline const DatasetRecord *findRecord(const Dataset &dataset,
                                       std::string_view pairId) {
  for (const DatasetRecord &r : dataset)
    if (r.pairId == pairId)
      return &r;
  return nullptr;
}

struct ProfileRow {
  std::uint32_t n = 0;
  std::size_t pairs = 0;
  double medianSatDecisions = 0;
  double medianUnsatDecisions = 0;
  double medianUnsatConflicts = 0;
  double medianUnsatPropagations = 0;
  double medianMaxsatNodes = 0;
  double medianMcsCalls = 0;
  double medianMusCalls = 0;
};

inline double median(std::vector<double> values) {
  if (values.empty())
    return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid]
                           : (values[mid - 1] + values[mid]) / 2.0;
}

/// Per-n medians of the difficulty counters. Records without stats are
/// annotated on the fly.
inline std::vector<ProfileRow> profile(const Dataset &dataset) {
  std::map<std::uint32_t, std::vector<DifficultyStats>> byN;
  for (const DatasetRecord &r : dataset)
    byN[r.pair.params.n].push_back(r.stats ? *r.stats
                                           : computeDifficulty(r.pair));
  std::vector<ProfileRow> rows;
  for (const auto &[n, stats] : byN) {
    auto collect = [&](auto field) {
      std::vector<double> v;
      for (const DifficultyStats &s : stats)
        v.push_back(static_cast<double>(field(s)));
      return median(std::move(v));
    };
    ProfileRow row;
    row.n = n;
    row.pairs = stats.size();
    row.medianSatDecisions = collect([](auto &s) { return s.sat.decisions; });
    row.medianUnsatDecisions =
        collect([](auto &s) { return s.unsat.decisions; });
    row.medianUnsatConflicts =
        collect([](auto &s) { return s.unsat.conflicts; });
    row.medianUnsatPropagations =
        collect([](auto &s) { return s.unsat.propagations; });
    row.medianMaxsatNodes = collect([](auto &s) { return s.maxsat.nodes; });
    row.medianMcsCalls = collect([](auto &s) { return s.mcs.solverCalls; });
    row.medianMusCalls = collect([](auto &s) { return s.mus.solverCalls; });
    rows.push_back(row);
  }
  return rows;
}

} // namespace satprobe
