#include "crowdsim/reward.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace crowdsim {

namespace {

void require_non_negative(double value, const char* field) {
  if (!(value >= 0.0)) {
    throw std::invalid_argument(std::string("reward.") + field + " must be >= 0");
  }
}

double goal_distance(const AgentState& robot) { return norm(robot.hidden.goal - robot.position()); }

}  // namespace

void RewardConfig::validate() const {
  require_non_negative(goal, "R_g");
  require_non_negative(collision, "R_c");
  require_non_negative(timeout, "R_time");
  require_non_negative(progress, "R_gd1");
  require_non_negative(regress, "R_gd2");
  require_non_negative(velocity, "R_v");
  require_non_negative(proxemic, "R_prox");
  require_non_negative(robot_min_distance, "r0_prox");
  if (!(social_radius > 0.0)) throw std::invalid_argument("reward.r_SI must be > 0");
}

double navigation_reward(const WorldState& prev, const WorldState& world,
                         Termination termination, const RewardConfig& config) {
  switch (termination) {
    case Termination::Goal:
      return config.goal;
    case Termination::Collision:
      return -config.collision;
    case Termination::Timeout:
      return -config.timeout;
    case Termination::Running:
      break;
  }

  // Positive when the robot got closer to its goal.
  const double progress = goal_distance(prev.robot()) - goal_distance(world.robot());
  double reward = 0.0;
  if (progress > 0.0) {
    reward = config.progress * progress;
  } else if (progress < 0.0) {
    reward = -config.regress * -progress;
  }

  if (config.velocity_target == VelocityTarget::EgoPreferred) {
    const AgentState& robot = world.robot();
    reward -= config.velocity * std::fabs(robot.speed() - robot.hidden.v_pref);
  }
  return reward;
}

double human_reward(const AgentState& human, const AgentState& robot, const RewardConfig& config) {
  double reward = -config.velocity * std::fabs(human.speed() - robot.speed());
  if (proxemic_violation(robot, human)) reward -= config.proxemic;
  return reward;
}

SocialReward socially_adaptive_reward(const WorldState& world, const RewardConfig& config) {
  SocialReward out;
  const AgentState& robot = world.robot();
  const std::size_t n = world.agents.size();

  // The velocity term lives either here or in the navigation reward, never both.
  RewardConfig human_config = config;
  if (config.velocity_target == VelocityTarget::EgoPreferred) human_config.velocity = 0.0;

  std::vector<double> center_distance(n, 0.0);
  std::size_t in_radius = 0;
  double raw_lambda_sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const AgentState& human = world.agents[i];
    center_distance[i] = norm(human.position() - robot.position());
    HumanRewardEntry entry;
    entry.index = i;
    entry.in_radius = center_distance[i] < config.social_radius;
    entry.violated = proxemic_violation(robot, human);
    if (entry.in_radius) {
      ++in_radius;
      entry.reward = human_reward(human, robot, human_config);
      if (config.lambda_mode == LambdaMode::InverseDistance) {
        entry.lambda = config.social_radius / std::max(center_distance[i], 0.1);
        raw_lambda_sum += entry.lambda;
      } else {
        entry.lambda = 1.0;
      }
    }
    out.per_human.push_back(entry);
  }
  if (in_radius == 0) return out;

  const double m = static_cast<double>(in_radius);
  if (config.lambda_mode == LambdaMode::InverseDistance) {
    // Normalize so the weights average to one over the in-radius humans.
    for (auto& entry : out.per_human) {
      if (entry.in_radius) entry.lambda = entry.lambda * m / raw_lambda_sum;
    }
  }

  double weighted = 0.0;
  for (const auto& entry : out.per_human) {
    if (entry.in_radius) weighted += entry.lambda * entry.reward;
  }
  out.value = weighted / m;
  return out;
}

SocialReward ego_social_reward(const WorldState& world, const RewardConfig& config) {
  SocialReward out;
  const AgentState& robot = world.robot();
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    const AgentState& human = world.agents[i];
    HumanRewardEntry entry;
    entry.index = i;
    entry.in_radius = true;
    entry.lambda = 1.0;
    entry.violated = surface_distance(robot, human) < config.robot_min_distance;
    entry.reward = entry.violated ? -config.proxemic : 0.0;
    out.value += entry.reward;
    out.per_human.push_back(entry);
  }
  return out;
}

RewardBreakdown total_reward(const WorldState& prev, const WorldState& world,
                             Termination termination, const RewardConfig& config) {
  RewardConfig effective = config;
  if (config.mode == SocialMode::SociallyAware) {
    effective.velocity_target = VelocityTarget::EgoPreferred;
  }

  RewardBreakdown out;
  out.r_nav = navigation_reward(prev, world, termination, effective);
  SocialReward social = config.mode == SocialMode::SociallyAware
                            ? ego_social_reward(world, effective)
                            : socially_adaptive_reward(world, effective);
  out.r_sa = social.value;
  out.per_human = std::move(social.per_human);
  return out;
}

}  // namespace crowdsim
