#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "zklab/config.hpp"
#include "zklab/radial.hpp"

namespace zk {

struct CommandOptions {
  std::optional<std::string> out;  // overrides config.out
  std::optional<std::uint64_t> seed;  // overrides config.seed
  int jobs = 1;
};

struct CommandResult {
  std::filesystem::path dir;
  nlohmann::json report;
};

// Each verb writes into a fresh directory OUT/<verb>, or OUT/<verb>.N when that is
// taken, holding report.json (config, its hash and the numeric payload), config.txt,
// timing.json and the verb's artifacts. Reports depend only on (config, seed).
CommandResult cmd_ground_state(const RunConfig& c, const CommandOptions& o = {});
CommandResult cmd_theta(const RunConfig& c, const CommandOptions& o = {});
CommandResult cmd_certify(const RunConfig& c, const CommandOptions& o = {});
CommandResult cmd_profiles(const RunConfig& c, const CommandOptions& o = {});
CommandResult cmd_simulate(const RunConfig& c, const CommandOptions& o = {});
// Reads the latest simulate run under OUT.
CommandResult cmd_diagnose(const RunConfig& c, const CommandOptions& o = {});

CommandResult run_verb(const std::string& verb, const RunConfig& c, const CommandOptions& o = {});
const std::vector<std::string>& verbs();

// Latest OUT/<verb>[.N] holding a report.json; throws DependencyError naming the verb to run.
std::filesystem::path latest_run(const std::filesystem::path& out, const std::string& verb);
// The profile written by ground-state; throws DependencyError when absent.
RadialProfile load_ground_state(const std::filesystem::path& out);

// 0 success, 2 config, 3 numerical, 4 dependency.
int exit_code_for(const std::exception& e);

}  // namespace zk
