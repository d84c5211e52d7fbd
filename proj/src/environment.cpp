#include "crowdsim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

namespace crowdsim {

using nlohmann::json;

namespace {

const char* mode_name(SocialMode mode) {
  return mode == SocialMode::SociallyAware ? "socially_aware" : "socially_integrated";
}

SocialMode social_mode_from_string(const std::string& name) {
  if (name == "socially_integrated" || name == "si") return SocialMode::SociallyIntegrated;
  if (name == "socially_aware" || name == "sa") return SocialMode::SociallyAware;
  throw ConfigError("mode: unknown value '" + name + "'");
}

const char* radius_mode_name(orca::RadiusMode mode) {
  return mode == orca::RadiusMode::Plain ? "plain" : "socially_integrated";
}

orca::RadiusMode radius_mode_from_string(const std::string& name) {
  if (name == "plain") return orca::RadiusMode::Plain;
  if (name == "socially_integrated") return orca::RadiusMode::SociallyIntegrated;
  throw ConfigError("human_orca.radius_mode: unknown value '" + name + "'");
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key + ": wrong type");
  }
}

void advance_holonomic(AgentState& agent, const Vec2& velocity, double dt) {
  agent.observable.velocity = velocity;
  agent.observable.position += velocity * dt;
  agent.heading = heading_from_velocity(velocity, agent.heading);
}

}  // namespace

void EnvConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (history < 0) throw ConfigError("k must be >= 0");
  if (!(timeout > 0.0)) throw ConfigError("timeout must be > 0");
  if (!(dtheta_max > 0.0)) throw ConfigError("dtheta_max must be > 0");
  if (!(goal_tolerance > 0.0)) throw ConfigError("goal_tolerance must be > 0");
  if (!(human_time_horizon > 0.0)) throw ConfigError("human_orca.time_horizon must be > 0");
  try {
    reward.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

long EnvConfig::max_steps() const {
  return static_cast<long>(std::ceil(timeout / dt - 1e-9));
}

void to_json(json& j, const EnvConfig& c) {
  const RewardConfig& r = c.reward;
  j = json{{"dt", c.dt},
           {"k", c.history},
           {"timeout", c.timeout},
           {"dtheta_max", c.dtheta_max},
           {"goal_tolerance", c.goal_tolerance},
           {"mode", mode_name(c.mode)},
           {"human_orca",
            {{"time_horizon", c.human_time_horizon},
             {"radius_mode", radius_mode_name(c.human_radius_mode)}}},
           {"reward",
            {{"R_g", r.goal},
             {"R_c", r.collision},
             {"R_time", r.timeout},
             {"R_gd1", r.progress},
             {"R_gd2", r.regress},
             {"R_v", r.velocity},
             {"R_prox", r.proxemic},
             {"r_SI", r.social_radius},
             {"lambda_mode",
              r.lambda_mode == LambdaMode::Uniform ? "uniform" : "inverse_distance"},
             {"velocity_reward_target",
              r.velocity_target == VelocityTarget::AdaptToHumans ? "adapt_to_humans"
                                                                 : "ego_preferred"},
             {"mode", mode_name(r.mode)},
             {"r0_prox", r.robot_min_distance}}}};
}

void from_json(const json& j, EnvConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  read_field(j, "dt", c.dt, "");
  read_field(j, "k", c.history, "");
  read_field(j, "timeout", c.timeout, "");
  read_field(j, "dtheta_max", c.dtheta_max, "");
  read_field(j, "goal_tolerance", c.goal_tolerance, "");
  std::string mode;
  read_field(j, "mode", mode, "");
  if (!mode.empty()) c.mode = social_mode_from_string(mode);

  if (j.contains("human_orca")) {
    const json& h = j.at("human_orca");
    read_field(h, "time_horizon", c.human_time_horizon, "human_orca.");
    std::string radius_mode;
    read_field(h, "radius_mode", radius_mode, "human_orca.");
    if (!radius_mode.empty()) c.human_radius_mode = radius_mode_from_string(radius_mode);
  }

  RewardConfig& r = c.reward;
  // The top-level mode wins; the reward block echoes it.
  r.mode = c.mode;
  if (j.contains("reward")) {
    const json& rj = j.at("reward");
    read_field(rj, "R_g", r.goal, "reward.");
    read_field(rj, "R_c", r.collision, "reward.");
    read_field(rj, "R_time", r.timeout, "reward.");
    read_field(rj, "R_gd1", r.progress, "reward.");
    read_field(rj, "R_gd2", r.regress, "reward.");
    read_field(rj, "R_v", r.velocity, "reward.");
    read_field(rj, "R_prox", r.proxemic, "reward.");
    read_field(rj, "r_SI", r.social_radius, "reward.");
    read_field(rj, "r0_prox", r.robot_min_distance, "reward.");
    std::string lambda;
    read_field(rj, "lambda_mode", lambda, "reward.");
    if (lambda == "uniform") {
      r.lambda_mode = LambdaMode::Uniform;
    } else if (lambda == "inverse_distance") {
      r.lambda_mode = LambdaMode::InverseDistance;
    } else if (!lambda.empty()) {
      throw ConfigError("reward.lambda_mode: unknown value '" + lambda + "'");
    }
    std::string target;
    read_field(rj, "velocity_reward_target", target, "reward.");
    if (target == "adapt_to_humans") {
      r.velocity_target = VelocityTarget::AdaptToHumans;
    } else if (target == "ego_preferred") {
      r.velocity_target = VelocityTarget::EgoPreferred;
    } else if (!target.empty()) {
      throw ConfigError("reward.velocity_reward_target: unknown value '" + target + "'");
    }
    std::string reward_mode;
    read_field(rj, "mode", reward_mode, "reward.");
    if (!reward_mode.empty() && !mode.empty() && social_mode_from_string(reward_mode) != c.mode) {
      throw ConfigError("reward.mode: conflicts with mode");
    }
    if (!reward_mode.empty() && mode.empty()) c.mode = r.mode = social_mode_from_string(reward_mode);
  }
  c.validate();
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  const std::size_t frames = humans.empty() ? 0 : humans.front().frames.size();
  out.reserve(kRobotSize + humans.size() * (2 + kFrameSize * frames));
  out.insert(out.end(), {goal_distance, goal_offset.x, goal_offset.y, heading, v_pref, radius});
  for (const HumanObservation& h : humans) {
    out.push_back(h.radius);
    out.push_back(h.combined_radius);
    for (const HumanFrame& f : h.frames) {
      out.insert(out.end(), {f.distance, f.relative_position.x, f.relative_position.y,
                             f.relative_velocity.x, f.relative_velocity.y});
    }
  }
  return out;
}

bool Observation::operator==(const Observation& other) const {
  return flatten() == other.flatten();
}

HumanFrame make_frame(const AgentState& robot, const AgentState& human) {
  HumanFrame frame;
  frame.relative_position = robot.position() - human.position();
  frame.distance = norm(frame.relative_position);
  frame.relative_velocity = robot.velocity() - human.velocity();
  return frame;
}

void ObservationHistory::prime(const WorldState& world) {
  frames_.assign(world.num_humans(), {});
  for (std::size_t h = 0; h < frames_.size(); ++h) {
    frames_[h].assign(1, make_frame(world.robot(), world.agents[h + 1]));
  }
}

void ObservationHistory::push(const WorldState& world) {
  for (std::size_t h = 0; h < frames_.size(); ++h) {
    auto& frames = frames_[h];
    frames.push_front(make_frame(world.robot(), world.agents[h + 1]));
    while (frames.size() > static_cast<std::size_t>(history_) + 1) frames.pop_back();
  }
}

Observation build_observation(const WorldState& world, const ObservationHistory& history) {
  const AgentState& robot = world.robot();
  Observation obs;
  obs.goal_offset = robot.hidden.goal - robot.position();
  obs.goal_distance = norm(obs.goal_offset);
  obs.heading = robot.heading;
  obs.v_pref = robot.hidden.v_pref;
  obs.radius = robot.radius();

  const std::size_t block = static_cast<std::size_t>(history.history()) + 1;
  for (std::size_t h = 0; h < world.num_humans(); ++h) {
    const AgentState& human = world.agents[h + 1];
    HumanObservation ho;
    ho.radius = human.radius();
    ho.combined_radius = human.radius() + robot.radius();
    const auto& frames = history.frames(h);
    ho.frames.assign(frames.begin(), frames.end());
    if (ho.frames.size() > block) ho.frames.resize(block);
    const HumanFrame oldest = ho.frames.back();
    while (ho.frames.size() < block) ho.frames.push_back(oldest);
    obs.humans.push_back(std::move(ho));
  }
  return obs;
}

WorldState make_world(const ScenarioConfig& scenario, SocialMode mode, double robot_min_distance) {
  WorldState world;
  for (const AgentSpec& spec : scenario.agents) {
    AgentState agent;
    agent.kind = spec.kind;
    agent.observable.position = spec.start;
    agent.observable.radius = spec.radius;
    agent.hidden.goal = spec.goal;
    agent.hidden.v_pref = spec.v_pref;
    agent.hidden.psi_pref = spec.psi_pref;
    agent.hidden.r_prox = spec.r_prox;
    agent.heading = std::atan2(spec.goal.y - spec.start.y, spec.goal.x - spec.start.x);
    if (spec.kind == AgentKind::Robot) {
      agent.hidden.r_prox = mode == SocialMode::SociallyAware ? robot_min_distance : 0.0;
    }
    world.agents.push_back(agent);
  }
  return world;
}

std::vector<orca::OrcaParams> make_orca_params(const ScenarioConfig& scenario, double dt,
                                               double time_horizon) {
  std::vector<orca::OrcaParams> params;
  params.reserve(scenario.agents.size());
  for (const AgentSpec& spec : scenario.agents) {
    params.push_back({time_horizon, dt, spec.cooperation, spec.v_pref});
  }
  return params;
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.reward.mode = config_.mode;
  config_.validate();
  history_ = ObservationHistory(config_.history);
}

Observation Environment::reset(const ScenarioConfig& scenario, std::uint64_t seed) {
  scenario.validate();
  scenario_ = scenario;
  seed_ = seed;
  orca_params_ = make_orca_params(scenario_, config_.dt, config_.human_time_horizon);
  world_ = make_world(scenario_, config_.mode, config_.reward.robot_min_distance);
  termination_ = Termination::Running;
  started_ = true;
  clamped_actions_ = 0;
  history_.prime(world_);
  return build_observation(world_, history_);
}

std::size_t Environment::observation_size() const {
  return Observation::kRobotSize +
         world_.num_humans() * Observation::human_block_size(config_.history);
}

StepResult Environment::step(Action action) {
  if (!started_) throw UsageError("step called before reset");
  if (termination_ != Termination::Running) throw UsageError("step called after termination");

  StepResult result;
  const WorldState prev = world_;
  const AgentState& prev_robot = prev.robot();

  if (std::isnan(action.v) || std::isnan(action.dtheta)) throw UsageError("action contains NaN");
  const Action requested = action;
  action.v = std::clamp(action.v, 0.0, prev_robot.hidden.v_pref);
  action.dtheta = std::clamp(action.dtheta, -config_.dtheta_max, config_.dtheta_max);
  if (action.v != requested.v || action.dtheta != requested.dtheta) {
    result.info.action_clamped = true;
    ++clamped_actions_;
    spdlog::debug("step {}: clamped action ({}, {}) to ({}, {})", prev.step, requested.v,
                  requested.dtheta, action.v, action.dtheta);
  }

  result.info.applied_action = action;

  // Humans decide from the pre-step snapshot.
  std::vector<Vec2> human_velocities(prev.agents.size());
  for (std::size_t i = 1; i < prev.agents.size(); ++i) {
    human_velocities[i] =
        orca::human_policy_step(prev, i, orca_params_, config_.human_radius_mode);
  }

  AgentState& robot = world_.agents.front();
  robot.heading = wrap_angle(prev_robot.heading + action.dtheta);
  robot.observable.velocity = action.v * Vec2{std::cos(robot.heading), std::sin(robot.heading)};
  robot.observable.position += robot.observable.velocity * config_.dt;
  for (std::size_t i = 1; i < world_.agents.size(); ++i) {
    advance_holonomic(world_.agents[i], human_velocities[i], config_.dt);
  }
  ++world_.step;
  world_.time = static_cast<double>(world_.step) * config_.dt;

  termination_ = classify_termination(world_, config_);
  result.termination = termination_;
  result.breakdown = total_reward(prev, world_, termination_, config_.reward);
  result.reward = result.breakdown.total();

  for (std::size_t i = 1; i < world_.agents.size(); ++i) {
    result.info.human_rewards.push_back(
        human_reward(world_.agents[i], world_.robot(), config_.reward));
    result.info.violations.push_back(proxemic_violation(world_.robot(), world_.agents[i]));
  }

  history_.push(world_);
  result.observation = build_observation(world_, history_);
  return result;
}

Termination classify_termination(const WorldState& world, const EnvConfig& config) {
  const AgentState& robot = world.robot();
  if (norm(robot.position() - robot.hidden.goal) < config.goal_tolerance) return Termination::Goal;
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    if (surface_distance(robot, world.agents[i]) <= 0.0) return Termination::Collision;
  }
  if (world.step >= config.max_steps()) return Termination::Timeout;
  return Termination::Running;
}

namespace {

double bounded_turn(const AgentState& robot, const Vec2& direction, double dtheta_max) {
  const double bearing = std::atan2(direction.y, direction.x);
  return std::clamp(wrap_angle(bearing - robot.heading), -dtheta_max, dtheta_max);
}

}  // namespace

Action straight_line(const WorldState& world, const EnvConfig& config) {
  const AgentState& robot = world.robot();
  const Vec2 to_goal = robot.hidden.goal - robot.position();
  if (norm(to_goal) < 1e-12) return {0.0, 0.0};
  return {robot.hidden.v_pref, bounded_turn(robot, to_goal, config.dtheta_max)};
}

Action orca_robot(const WorldState& world, const EnvConfig& config) {
  const AgentState& robot = world.robot();
  std::vector<orca::OrcaParams> params(world.agents.size(),
                                       {config.human_time_horizon, config.dt, 0.5, 1.0});
  params.front().v_max = robot.hidden.v_pref;
  // Only the robot's own parameters matter for its solve.
  const orca::SolveResult solved =
      orca::orca_step(world, 0, params, orca::RadiusMode::Plain, 0.0);
  const double speed = norm(solved.velocity);
  if (speed < 1e-9) return {0.0, 0.0};
  return {std::min(speed, robot.hidden.v_pref),
          bounded_turn(robot, solved.velocity, config.dtheta_max)};
}

CrowdRollout simulate_crowd(const ScenarioConfig& scenario, orca::RadiusMode human_mode,
                            long steps, double dt, double time_horizon) {
  scenario.validate();
  const auto params = make_orca_params(scenario, dt, time_horizon);
  CrowdRollout rollout;
  rollout.states.reserve(static_cast<std::size_t>(steps) + 1);
  rollout.states.push_back(make_world(scenario, SocialMode::SociallyIntegrated, 0.0));
  rollout.infeasible_by_step.assign(1, 0);

  std::vector<Vec2> velocities(scenario.agents.size());
  for (long s = 0; s < steps; ++s) {
    const WorldState& prev = rollout.states.back();
    long infeasible = 0;
    for (std::size_t i = 0; i < prev.agents.size(); ++i) {
      const orca::SolveResult solved = orca::orca_step(prev, i, params, human_mode);
      if (!solved.feasible) ++infeasible;
      velocities[i] = solved.velocity;
    }
    rollout.infeasible_solves += infeasible;
    rollout.infeasible_by_step.push_back(infeasible);
    WorldState next = prev;
    for (std::size_t i = 0; i < next.agents.size(); ++i) {
      advance_holonomic(next.agents[i], velocities[i], dt);
    }
    ++next.step;
    next.time = static_cast<double>(next.step) * dt;
    rollout.states.push_back(std::move(next));
  }
  return rollout;
}

}  // namespace crowdsim
