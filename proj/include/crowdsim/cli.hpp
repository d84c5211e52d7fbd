#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crowdsim/environment.hpp"
#include "crowdsim/scenario.hpp"

namespace crowdsim::cli {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3 };

enum class PolicyKind { StraightLine, OrcaRobot, External };

struct RunSpec {
  ScenarioSource scenario;
  PolicyKind policy{PolicyKind::OrcaRobot};
  long episodes{1};
  std::uint64_t seed{0};
  EnvConfig config;
  std::filesystem::path out{"logs"};
  int workers{1};
};

/// File name of the log for one episode seed.
std::string log_file_name(std::uint64_t seed);

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct EvalSpec {
  std::vector<std::string> patterns;
  std::filesystem::path out;
  std::optional<std::filesystem::path> episodes_out;
  std::string group_by{"none"};  // none | scenario | policy | mode
};

int cmd_eval(const EvalSpec& spec, std::ostream& out, std::ostream& err);

int cmd_plotdata(const std::filesystem::path& log, const std::filesystem::path& out,
                 std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace crowdsim::cli
