#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdsim/environment.hpp"

namespace crowdsim {

/// Malformed or inconsistent episode log.
class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AgentSnapshot {
  Vec2 position;
  Vec2 velocity;
  double heading{0.0};
};

struct StepRecord {
  long step{0};
  double time{0.0};
  std::vector<AgentSnapshot> agents;
  Action action;  // as applied, after clamping
  RewardBreakdown breakdown;
  std::vector<double> human_rewards;
  std::vector<bool> violations;
};

struct EpisodeLog {
  static constexpr int kSchemaVersion = 1;

  EnvConfig config;
  ScenarioConfig scenario;
  std::uint64_t seed{0};
  std::string policy;
  std::vector<StepRecord> steps;
  Termination termination{Termination::Running};
};

std::string to_string(Termination termination);
Termination termination_from_string(const std::string& name);

StepRecord make_step_record(const WorldState& world, const Action& applied,
                            const StepResult& result);

using RobotPolicy = std::function<Action(const WorldState&, const EnvConfig&)>;

/// Runs one episode to termination.
EpisodeLog run_episode(const EnvConfig& config, const ScenarioConfig& scenario,
                       std::uint64_t seed, const RobotPolicy& policy,
                       const std::string& policy_name);

/// Header line, one line per step, then a footer with the termination.
void write_jsonl(std::ostream& out, const EpisodeLog& log);
std::string to_jsonl(const EpisodeLog& log);
EpisodeLog read_jsonl(std::istream& in);

/// World states of the episode, the initial one first. Hidden states come
/// from the logged scenario.
std::vector<WorldState> replay_states(const EpisodeLog& log);

struct EpisodeMetrics {
  bool success{false};
  bool collision{false};
  bool timeout{false};
  long steps{0};
  /// Human-steps with the robot inside that human's personal space.
  long proxemic_violations{0};
  std::optional<double> robot_distance_ratio;
  std::optional<double> robot_time_ratio;
  std::optional<double> human_distance_ratio;
  std::optional<double> human_time_ratio;
  int humans_finished{0};
  int humans_unfinished{0};
  double human_return{0.0};
};

/// Path and time ratios include the residual distance to the goal at the
/// moment of arrival, so a straight run at v_pref scores exactly one.
EpisodeMetrics episode_metrics(const EpisodeLog& log);

struct MeanStd {
  long count{0};
  double mean{0.0};
  double std{0.0};  // population
};

MeanStd mean_std(std::span<const double> values);

struct MetricsSummary {
  std::string group;
  long episodes{0};
  long successes{0};
  long collisions{0};
  long timeouts{0};
  long proxemic_violations{0};
  MeanStd robot_distance_ratio;
  MeanStd robot_time_ratio;
  MeanStd human_distance_ratio;
  MeanStd human_time_ratio;
  MeanStd human_return;
};

/// Throws std::invalid_argument for an empty batch.
MetricsSummary aggregate(std::span<const EpisodeMetrics> metrics, std::string group = "all");

/// Column order of the summary CSV.
const std::vector<std::string>& summary_columns();
void write_summary_csv(std::ostream& out, std::span<const MetricsSummary> rows);
void write_summary_table(std::ostream& out, std::span<const MetricsSummary> rows);

const std::vector<std::string>& episode_columns();
void write_episode_csv(std::ostream& out, std::span<const std::string> names,
                       std::span<const EpisodeMetrics> metrics);

/// Per-agent timestamped rows for trajectory plots. Violation and collision
/// steps are flagged in the `event` column.
void write_plot_data(std::ostream& out, const EpisodeLog& log);

}  // namespace crowdsim
