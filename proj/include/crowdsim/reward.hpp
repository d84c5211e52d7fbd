#pragma once

#include <cstddef>
#include <vector>

#include "crowdsim/core.hpp"

namespace crowdsim {

enum class Termination { Running = 0, Goal = 1, Collision = 2, Timeout = 3 };

/// Whether the robot is rewarded by the humans around it or by a fixed ego rule.
enum class SocialMode { SociallyIntegrated, SociallyAware };

enum class LambdaMode { Uniform, InverseDistance };

/// AdaptToHumans: speed matching inside the human rewards.
/// EgoPreferred: the navigation reward pulls toward the robot's own v_pref.
enum class VelocityTarget { AdaptToHumans, EgoPreferred };

struct RewardConfig {
  double goal{4.0};
  double collision{4.0};
  double timeout{4.0};
  double progress{0.1};  // per meter toward the goal
  double regress{0.2};   // per meter away from the goal
  double velocity{0.052};
  double proxemic{1.1};
  double social_radius{2.0};
  LambdaMode lambda_mode{LambdaMode::Uniform};
  VelocityTarget velocity_target{VelocityTarget::AdaptToHumans};
  SocialMode mode{SocialMode::SociallyIntegrated};
  /// Minimum distance the socially aware robot keeps to everyone.
  double robot_min_distance{0.2};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct HumanRewardEntry {
  std::size_t index{0};  // agent index in the world
  double reward{0.0};
  double lambda{0.0};
  bool in_radius{false};
  bool violated{false};
};

struct RewardBreakdown {
  double r_nav{0.0};
  double r_sa{0.0};
  std::vector<HumanRewardEntry> per_human;

  double total() const { return r_nav + r_sa; }
};

double navigation_reward(const WorldState& prev, const WorldState& world,
                         Termination termination, const RewardConfig& config);

/// Reward a single human gives the robot. Not gated by the social radius;
/// callers apply the gating.
double human_reward(const AgentState& human, const AgentState& robot, const RewardConfig& config);

struct SocialReward {
  double value{0.0};
  std::vector<HumanRewardEntry> per_human;
};

/// Weighted mean of the rewards of humans within social_radius of the robot.
SocialReward socially_adaptive_reward(const WorldState& world, const RewardConfig& config);

/// Ego-perspective variant for the socially aware baseline: a flat penalty
/// for every human closer than robot_min_distance.
SocialReward ego_social_reward(const WorldState& world, const RewardConfig& config);

RewardBreakdown total_reward(const WorldState& prev, const WorldState& world,
                             Termination termination, const RewardConfig& config);

}  // namespace crowdsim
