#include "crowdsim/scenario.hpp"

#include <cmath>
#include <numbers>

namespace crowdsim {

using nlohmann::json;

namespace {

constexpr int kMaxPlacementAttempts = 1000;

double gap_between(const Vec2& a, double ra, const Vec2& b, double rb) {
  return norm(a - b) - ra - rb;
}

json vec_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError("expected a [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::string kind_name(AgentKind kind) { return kind == AgentKind::Robot ? "robot" : "human"; }

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "robot") return AgentKind::Robot;
  if (name == "human") return AgentKind::Human;
  throw ScenarioError("unknown agent kind '" + name + "'");
}

json ranges_to_json(const SamplingRanges& r) {
  return {{"r_prox", {r.r_prox_min, r.r_prox_max}},
          {"v_pref", {r.v_pref_min, r.v_pref_max}},
          {"cooperation", {r.cooperation_min, r.cooperation_max}}};
}

SamplingRanges ranges_from_json(const json& j) {
  SamplingRanges r;
  auto read = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const Vec2 pair = vec_from_json(j.at(key));
    if (pair.x > pair.y) throw ScenarioError(std::string("range ") + key + " is reversed");
    lo = pair.x;
    hi = pair.y;
  };
  read("r_prox", r.r_prox_min, r.r_prox_max);
  read("v_pref", r.v_pref_min, r.v_pref_max);
  read("cooperation", r.cooperation_min, r.cooperation_max);
  return r;
}

AgentSpec make_robot(const Vec2& start, const Vec2& goal, double radius, double v_pref) {
  AgentSpec robot;
  robot.kind = AgentKind::Robot;
  robot.start = start;
  robot.goal = goal;
  robot.radius = radius;
  robot.v_pref = v_pref;
  robot.r_prox = 0.0;
  robot.cooperation = 0.5;
  robot.psi_pref = std::atan2(goal.y - start.y, goal.x - start.x);
  return robot;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (agents.empty() || agents.front().kind != AgentKind::Robot) {
    throw ScenarioError("agents[0] must be the robot");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    if (i > 0 && a.kind != AgentKind::Human) throw ScenarioError(where + " must be a human");
    if (!is_finite(a.start) || !is_finite(a.goal)) throw ScenarioError(where + " is not finite");
    if (!(a.radius > 0.0)) throw ScenarioError(where + ".radius must be > 0");
    if (!(a.v_pref > 0.0)) throw ScenarioError(where + ".v_pref must be > 0");
    if (!(a.r_prox >= 0.0)) throw ScenarioError(where + ".r_prox must be >= 0");
    if (!(a.cooperation > 0.0 && a.cooperation <= 1.0)) {
      throw ScenarioError(where + ".cooperation must be in (0, 1]");
    }
    if (a.start == a.goal) throw ScenarioError(where + " starts on its own goal");
    for (std::size_t j = 0; j < i; ++j) {
      if (gap_between(a.start, a.radius, agents[j].start, agents[j].radius) <= 0.0) {
        throw ScenarioError(where + " overlaps agents[" + std::to_string(j) + "] at start");
      }
    }
  }
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::CircleCrossingHO:
      return "circle_crossing_ho";
    case ScenarioKind::CircleCrossingHE:
      return "circle_crossing_he";
    case ScenarioKind::Passing:
      return "passing";
    case ScenarioKind::Custom:
      break;
  }
  return "custom";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "circle_crossing_ho") return ScenarioKind::CircleCrossingHO;
  if (name == "circle_crossing_he") return ScenarioKind::CircleCrossingHE;
  if (name == "passing") return ScenarioKind::Passing;
  if (name == "custom") return ScenarioKind::Custom;
  throw ScenarioError("unknown scenario_kind '" + name + "'");
}

ScenarioConfig sample_circle_crossing(const CircleCrossingParams& params, bool homogeneous,
                                      Rng& rng) {
  if (params.n_agents < 2) throw ScenarioError("circle crossing needs n_agents >= 2");
  if (!(params.circle_radius > 0.0)) throw ScenarioError("circle_radius must be > 0");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double jitter = params.jitter_deg * std::numbers::pi / 180.0;
  const SamplingRanges& ranges = params.ranges;

  ScenarioConfig scenario;
  scenario.kind = homogeneous ? ScenarioKind::CircleCrossingHO : ScenarioKind::CircleCrossingHE;
  scenario.circle_radius = params.circle_radius;
  scenario.ranges = ranges;

  const double shared_r_prox = rng.uniform(ranges.r_prox_min, ranges.r_prox_max);

  for (int i = 0; i < params.n_agents; ++i) {
    Vec2 start;
    Vec2 goal;
    bool placed = false;
    const char* violated = "";
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double angle = rng.uniform(0.0, two_pi);
      const double goal_angle = angle + std::numbers::pi + rng.uniform(-jitter, jitter);
      start = params.circle_radius * Vec2{std::cos(angle), std::sin(angle)};
      goal = params.circle_radius * Vec2{std::cos(goal_angle), std::sin(goal_angle)};
      placed = true;
      for (const AgentSpec& other : scenario.agents) {
        if (gap_between(start, params.agent_radius, other.start, other.radius) <= params.min_gap) {
          violated = "start positions closer than min_gap";
          placed = false;
          break;
        }
        if (gap_between(goal, params.agent_radius, other.goal, other.radius) <= params.min_gap) {
          violated = "goal positions closer than min_gap";
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw ScenarioError("placement of agent " + std::to_string(i) + " failed after " +
                          std::to_string(kMaxPlacementAttempts) + " attempts: " + violated);
    }

    if (i == 0) {
      scenario.agents.push_back(make_robot(start, goal, params.agent_radius, params.robot_v_pref));
      continue;
    }
    AgentSpec human;
    human.kind = AgentKind::Human;
    human.start = start;
    human.goal = goal;
    human.radius = params.agent_radius;
    human.v_pref = rng.uniform(ranges.v_pref_min, ranges.v_pref_max);
    human.cooperation = rng.uniform(ranges.cooperation_min, ranges.cooperation_max);
    human.r_prox = homogeneous ? shared_r_prox : rng.uniform(ranges.r_prox_min, ranges.r_prox_max);
    human.psi_pref = std::atan2(goal.y - start.y, goal.x - start.x);
    scenario.agents.push_back(human);
  }
  return scenario;
}

ScenarioConfig sample_passing(const PassingParams& params, Rng& rng) {
  if (params.n_oncoming < 1) throw ScenarioError("passing needs n_oncoming >= 1");
  if (!(params.corridor_length > 0.0)) throw ScenarioError("corridor_length must be > 0");

  const double half = params.corridor_length / 2.0;
  ScenarioConfig scenario;
  scenario.kind = ScenarioKind::Passing;
  scenario.ranges = params.ranges;
  scenario.agents.push_back(
      make_robot({-half, 0.0}, {half, 0.0}, params.agent_radius, params.robot_v_pref));

  for (int i = 0; i < params.n_oncoming; ++i) {
    const double offset = i * params.lateral_gap;
    const double y = rng.uniform(-params.lateral_jitter, params.lateral_jitter);
    AgentSpec human;
    human.kind = AgentKind::Human;
    human.start = {half + offset, y};
    human.goal = {-half - 1.0 - offset, y};
    human.radius = params.agent_radius;
    human.v_pref = rng.uniform(params.ranges.v_pref_min, params.ranges.v_pref_max);
    human.cooperation = rng.uniform(params.ranges.cooperation_min, params.ranges.cooperation_max);
    human.r_prox = params.r_prox_oncoming;
    human.psi_pref = std::numbers::pi;
    scenario.agents.push_back(human);
  }
  scenario.validate();
  return scenario;
}

ScenarioConfig ScenarioSource::generate(std::uint64_t seed) const {
  Rng rng(seed);
  ScenarioConfig out;
  switch (type) {
    case Type::Fixed:
      out = fixed;
      break;
    case Type::CircleHO:
      out = sample_circle_crossing(circle, true, rng);
      break;
    case Type::CircleHE:
      out = sample_circle_crossing(circle, false, rng);
      break;
    case Type::Passing:
      out = sample_passing(passing, rng);
      break;
  }
  out.seed = seed;
  return out;
}

void to_json(json& j, const ScenarioConfig& scenario) {
  json agents = json::array();
  for (const AgentSpec& a : scenario.agents) {
    agents.push_back({{"kind", kind_name(a.kind)},
                      {"start", vec_to_json(a.start)},
                      {"goal", vec_to_json(a.goal)},
                      {"radius", a.radius},
                      {"v_pref", a.v_pref},
                      {"r_prox", a.r_prox},
                      {"cooperation", a.cooperation},
                      {"psi_pref", a.psi_pref}});
  }
  j = json{{"schema", ScenarioConfig::kSchemaVersion},
           {"scenario_kind", to_string(scenario.kind)},
           {"circle_radius", scenario.circle_radius},
           {"metadata", {{"seed", scenario.seed}, {"ranges", ranges_to_json(scenario.ranges)}}},
           {"agents", std::move(agents)}};
}

void from_json(const json& j, ScenarioConfig& scenario) {
  try {
    const int schema = j.at("schema").get<int>();
    if (schema != ScenarioConfig::kSchemaVersion) {
      throw ScenarioError("unsupported scenario schema " + std::to_string(schema));
    }
    scenario = ScenarioConfig{};
    scenario.kind = scenario_kind_from_string(j.value("scenario_kind", std::string("custom")));
    scenario.circle_radius = j.value("circle_radius", 0.0);
    if (j.contains("metadata")) {
      const json& meta = j.at("metadata");
      scenario.seed = meta.value("seed", std::uint64_t{0});
      if (meta.contains("ranges")) scenario.ranges = ranges_from_json(meta.at("ranges"));
    }
    for (const json& a : j.at("agents")) {
      AgentSpec spec;
      spec.kind = agent_kind_from_string(a.at("kind").get<std::string>());
      spec.start = vec_from_json(a.at("start"));
      spec.goal = vec_from_json(a.at("goal"));
      spec.radius = a.value("radius", 0.3);
      spec.v_pref = a.value("v_pref", 1.0);
      spec.r_prox = a.value("r_prox", 0.0);
      spec.cooperation = a.value("cooperation", 0.5);
      spec.psi_pref = a.value("psi_pref", std::atan2(spec.goal.y - spec.start.y,
                                                     spec.goal.x - spec.start.x));
      scenario.agents.push_back(spec);
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioSource scenario_source_from_json(const json& j) {
  ScenarioSource source;
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  if (j.contains("agents")) {
    source.type = ScenarioSource::Type::Fixed;
    source.fixed = j.get<ScenarioConfig>();
    source.fixed.validate();
    return source;
  }
  try {
    const std::string generator = j.at("generator").get<std::string>();
    SamplingRanges ranges = j.contains("ranges") ? ranges_from_json(j.at("ranges")) : SamplingRanges{};
    if (generator == "circle-ho" || generator == "circle-he") {
      source.type = generator == "circle-ho" ? ScenarioSource::Type::CircleHO
                                             : ScenarioSource::Type::CircleHE;
      auto& c = source.circle;
      c.n_agents = j.value("n_agents", c.n_agents);
      c.circle_radius = j.value("circle_radius", c.circle_radius);
      c.robot_v_pref = j.value("robot_v_pref", c.robot_v_pref);
      c.agent_radius = j.value("agent_radius", c.agent_radius);
      c.jitter_deg = j.value("jitter_deg", c.jitter_deg);
      c.ranges = ranges;
    } else if (generator == "passing") {
      source.type = ScenarioSource::Type::Passing;
      auto& p = source.passing;
      p.n_oncoming = j.value("n_oncoming", p.n_oncoming);
      p.corridor_length = j.value("corridor_length", p.corridor_length);
      p.lateral_gap = j.value("lateral_gap", p.lateral_gap);
      p.r_prox_oncoming = j.value("r_prox_oncoming", p.r_prox_oncoming);
      p.robot_v_pref = j.value("robot_v_pref", p.robot_v_pref);
      p.agent_radius = j.value("agent_radius", p.agent_radius);
      p.lateral_jitter = j.value("lateral_jitter", p.lateral_jitter);
      p.ranges = ranges;
    } else {
      throw ScenarioError("unknown generator '" + generator + "'");
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario generator: ") + e.what());
  }
  return source;
}

json to_json(const ScenarioSource& source) {
  switch (source.type) {
    case ScenarioSource::Type::Fixed:
      return json(source.fixed);
    case ScenarioSource::Type::CircleHO:
    case ScenarioSource::Type::CircleHE: {
      const auto& c = source.circle;
      return {{"generator", source.type == ScenarioSource::Type::CircleHO ? "circle-ho" : "circle-he"},
              {"n_agents", c.n_agents},
              {"circle_radius", c.circle_radius},
              {"robot_v_pref", c.robot_v_pref},
              {"agent_radius", c.agent_radius},
              {"jitter_deg", c.jitter_deg},
              {"ranges", ranges_to_json(c.ranges)}};
    }
    case ScenarioSource::Type::Passing: {
      const auto& p = source.passing;
      return {{"generator", "passing"},
              {"n_oncoming", p.n_oncoming},
              {"corridor_length", p.corridor_length},
              {"lateral_gap", p.lateral_gap},
              {"r_prox_oncoming", p.r_prox_oncoming},
              {"robot_v_pref", p.robot_v_pref},
              {"agent_radius", p.agent_radius},
              {"lateral_jitter", p.lateral_jitter},
              {"ranges", ranges_to_json(p.ranges)}};
    }
  }
  return {};
}

}  // namespace crowdsim
