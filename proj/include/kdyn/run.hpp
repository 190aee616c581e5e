#pragma once

#include "kdyn/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kdyn {

enum ExitCode { exit_ok = 0, exit_input = 1, exit_undecided = 2 };

struct RunOptions {
  std::optional<ScenarioKind> command;  // overrides the scenario's kind
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<int> depth;
  std::optional<std::filesystem::path> out_dir;
  bool emit_series = false;
  std::string profile = "default";
};

struct RunResult {
  int exit_code = exit_ok;
  std::string verdict;  // one line
  std::vector<std::filesystem::path> artifacts;
};

// Writes report.json (deterministic for a fixed scenario and seed), meta.json
// and any certificates or series into the output directory.
RunResult run_scenario(const Scenario& s, const RunOptions& opt);
RunResult verify_file(const std::filesystem::path& certificate);

}  // namespace kdyn
