#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdsim/core.hpp"
#include "crowdsim/orca.hpp"
#include "crowdsim/reward.hpp"
#include "crowdsim/scenario.hpp"

namespace crowdsim {

/// Invalid environment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse, e.g. stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Action {
  double v{0.0};
  double dtheta{0.0};
};

struct EnvConfig {
  double dt{0.2};
  int history{15};  // k: frames kept besides the current one
  double timeout{30.0};
  double dtheta_max{0.7853981633974483};  // pi / 4
  double goal_tolerance{0.3};
  double human_time_horizon{5.0};
  /// Whether humans inflate radii by personal spaces while avoiding others.
  orca::RadiusMode human_radius_mode{orca::RadiusMode::SociallyIntegrated};
  SocialMode mode{SocialMode::SociallyIntegrated};
  RewardConfig reward;

  void validate() const;
  /// Step count at which the episode times out.
  long max_steps() const;
};

void to_json(nlohmann::json& j, const EnvConfig& config);
/// Missing keys keep their defaults. Throws ConfigError naming the bad field.
void from_json(const nlohmann::json& j, EnvConfig& config);

/// One history frame for one human, from the robot's point of view.
struct HumanFrame {
  double distance{0.0};
  Vec2 relative_position;  // robot minus human
  Vec2 relative_velocity;  // robot minus human
};

struct HumanObservation {
  double radius{0.0};
  double combined_radius{0.0};
  std::vector<HumanFrame> frames;  // newest first, history + 1 entries
};

struct Observation {
  static constexpr std::size_t kRobotSize = 6;
  static constexpr std::size_t kFrameSize = 5;

  double goal_distance{0.0};
  Vec2 goal_offset;
  double heading{0.0};
  double v_pref{0.0};
  double radius{0.0};
  std::vector<HumanObservation> humans;

  static std::size_t human_block_size(int history) { return 2 + kFrameSize * (history + 1); }

  /// Robot block, then each human as static part followed by frames newest first.
  std::vector<double> flatten() const;

  bool operator==(const Observation&) const;
};

/// Per-human bounded frame history, newest at the front.
class ObservationHistory {
 public:
  ObservationHistory() = default;
  explicit ObservationHistory(int history) : history_(history) {}

  /// Drops all history and keeps only the current frame.
  void prime(const WorldState& world);
  void push(const WorldState& world);
  const std::deque<HumanFrame>& frames(std::size_t human) const { return frames_.at(human); }
  std::size_t num_humans() const { return frames_.size(); }
  int history() const { return history_; }

 private:
  int history_{0};
  std::vector<std::deque<HumanFrame>> frames_;
};

HumanFrame make_frame(const AgentState& robot, const AgentState& human);

/// Observation from the world and the frame history. Missing older frames
/// repeat the oldest available one.
Observation build_observation(const WorldState& world, const ObservationHistory& history);

struct StepInfo {
  /// Reward each human gives the robot this step, ignoring the social radius.
  std::vector<double> human_rewards;
  /// Robot inside each human's personal space after the move.
  std::vector<bool> violations;
  Action applied_action;
  bool action_clamped{false};
};

struct StepResult {
  Observation observation;
  double reward{0.0};
  RewardBreakdown breakdown;
  Termination termination{Termination::Running};
  StepInfo info;
};

/// Builds the initial world of a scenario with the robot facing its goal.
WorldState make_world(const ScenarioConfig& scenario, SocialMode mode,
                      double robot_min_distance);

/// Per-agent ORCA parameters for a scenario.
std::vector<orca::OrcaParams> make_orca_params(const ScenarioConfig& scenario, double dt,
                                               double time_horizon);

class Environment {
 public:
  explicit Environment(EnvConfig config);

  /// Throws ScenarioError on invalid placement.
  Observation reset(const ScenarioConfig& scenario, std::uint64_t seed);
  StepResult step(Action action);

  const WorldState& world() const { return world_; }
  const EnvConfig& config() const { return config_; }
  const ScenarioConfig& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  Termination termination() const { return termination_; }
  bool running() const { return started_ && termination_ == Termination::Running; }
  std::size_t observation_size() const;
  long clamped_actions() const { return clamped_actions_; }

 private:
  EnvConfig config_;
  ScenarioConfig scenario_;
  std::vector<orca::OrcaParams> orca_params_;
  WorldState world_;
  ObservationHistory history_;
  Termination termination_{Termination::Running};
  std::uint64_t seed_{0};
  bool started_{false};
  long clamped_actions_{0};
};

Termination classify_termination(const WorldState& world, const EnvConfig& config);

/// Head straight for the goal at v_pref, turning at most dtheta_max.
Action straight_line(const WorldState& world, const EnvConfig& config);

/// Plain ORCA velocity for the robot, turned into a unicycle action: turn
/// toward the solved velocity (bounded) and drive at its speed.
Action orca_robot(const WorldState& world, const EnvConfig& config);

/// Every agent, robot included, moves holonomically under ORCA. The robot
/// always plans with plain radii; humans follow `human_mode`.
struct CrowdRollout {
  std::vector<WorldState> states;  // initial state first
  long infeasible_solves{0};
  /// Infeasible solves made while computing the move into states[s]; entry 0 is always 0.
  std::vector<long> infeasible_by_step;
};

CrowdRollout simulate_crowd(const ScenarioConfig& scenario, orca::RadiusMode human_mode,
                            long steps, double dt = 0.2, double time_horizon = 5.0);

}  // namespace crowdsim
