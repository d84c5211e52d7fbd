#include "crowdsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace crowdsim {

using nlohmann::json;

namespace {

json breakdown_to_json(const RewardBreakdown& b) {
  json per_human = json::array();
  for (const HumanRewardEntry& e : b.per_human) {
    per_human.push_back({{"index", e.index},
                         {"R", e.reward},
                         {"lambda", e.lambda},
                         {"in_radius", e.in_radius},
                         {"violated", e.violated}});
  }
  return {{"total", b.total()}, {"r_nav", b.r_nav}, {"r_sa", b.r_sa}, {"per_human", per_human}};
}

RewardBreakdown breakdown_from_json(const json& j) {
  RewardBreakdown b;
  b.r_nav = j.at("r_nav").get<double>();
  b.r_sa = j.at("r_sa").get<double>();
  for (const json& e : j.at("per_human")) {
    b.per_human.push_back({e.at("index").get<std::size_t>(), e.at("R").get<double>(),
                           e.at("lambda").get<double>(), e.at("in_radius").get<bool>(),
                           e.at("violated").get<bool>()});
  }
  return b;
}

json step_to_json(const StepRecord& r) {
  json agents = json::array();
  for (const AgentSnapshot& a : r.agents) {
    agents.push_back({a.position.x, a.position.y, a.velocity.x, a.velocity.y, a.heading});
  }
  json violations = json::array();
  for (bool v : r.violations) violations.push_back(v);
  return {{"type", "step"},
          {"step", r.step},
          {"time", r.time},
          {"action", {r.action.v, r.action.dtheta}},
          {"agents", std::move(agents)},
          {"reward", breakdown_to_json(r.breakdown)},
          {"human_rewards", r.human_rewards},
          {"violations", std::move(violations)}};
}

StepRecord step_from_json(const json& j) {
  StepRecord r;
  r.step = j.at("step").get<long>();
  r.time = j.at("time").get<double>();
  const json& action = j.at("action");
  r.action = {action.at(0).get<double>(), action.at(1).get<double>()};
  for (const json& a : j.at("agents")) {
    if (a.size() != 5) throw LogError("agent snapshot must have 5 entries");
    r.agents.push_back({{a.at(0).get<double>(), a.at(1).get<double>()},
                        {a.at(2).get<double>(), a.at(3).get<double>()},
                        a.at(4).get<double>()});
  }
  r.breakdown = breakdown_from_json(j.at("reward"));
  r.human_rewards = j.at("human_rewards").get<std::vector<double>>();
  for (const json& v : j.at("violations")) r.violations.push_back(v.get<bool>());
  return r;
}

double path_length(std::span<const Vec2> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) length += norm(points[i] - points[i - 1]);
  return length;
}

struct Ratios {
  double distance;
  double time;
};

// Ratios for a trajectory that arrived at `arrival` (index into points).
std::optional<Ratios> arrival_ratios(std::span<const Vec2> points, std::size_t arrival,
                                     const Vec2& goal, double v_pref, double dt) {
  const double straight = norm(goal - points.front());
  if (!(straight > 0.0)) return std::nullopt;
  const double residual = norm(goal - points[arrival]);
  const double traveled = path_length(points.subspan(0, arrival + 1)) + residual;
  const double elapsed = static_cast<double>(arrival) * dt + residual / v_pref;
  return Ratios{traveled / straight, elapsed / (straight / v_pref)};
}

std::string fmt_optional(const MeanStd& m, bool std_part) {
  if (m.count == 0) return "";
  return fmt::format("{}", std_part ? m.std : m.mean);
}

}  // namespace

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::Running:
      return "running";
    case Termination::Goal:
      return "goal";
    case Termination::Collision:
      return "collision";
    case Termination::Timeout:
      return "timeout";
  }
  return "running";
}

Termination termination_from_string(const std::string& name) {
  if (name == "running") return Termination::Running;
  if (name == "goal") return Termination::Goal;
  if (name == "collision") return Termination::Collision;
  if (name == "timeout") return Termination::Timeout;
  throw LogError("unknown termination '" + name + "'");
}

StepRecord make_step_record(const WorldState& world, const Action& applied,
                            const StepResult& result) {
  StepRecord record;
  record.step = world.step;
  record.time = world.time;
  record.action = applied;
  for (const AgentState& a : world.agents) {
    record.agents.push_back({a.position(), a.velocity(), a.heading});
  }
  record.breakdown = result.breakdown;
  record.human_rewards = result.info.human_rewards;
  record.violations = result.info.violations;
  return record;
}

EpisodeLog run_episode(const EnvConfig& config, const ScenarioConfig& scenario,
                       std::uint64_t seed, const RobotPolicy& policy,
                       const std::string& policy_name) {
  Environment env(config);
  env.reset(scenario, seed);
  EpisodeLog log;
  log.config = env.config();
  log.scenario = scenario;
  log.seed = seed;
  log.policy = policy_name;
  while (env.running()) {
    const StepResult result = env.step(policy(env.world(), env.config()));
    log.steps.push_back(make_step_record(env.world(), result.info.applied_action, result));
  }
  log.termination = env.termination();
  return log;
}

void write_jsonl(std::ostream& out, const EpisodeLog& log) {
  const json header{{"type", "header"},
                    {"schema", EpisodeLog::kSchemaVersion},
                    {"seed", log.seed},
                    {"policy", log.policy},
                    {"config", json(log.config)},
                    {"scenario", json(log.scenario)}};
  out << header.dump() << '\n';
  for (const StepRecord& r : log.steps) out << step_to_json(r).dump() << '\n';
  const json footer{{"type", "end"},
                    {"termination", to_string(log.termination)},
                    {"steps", log.steps.size()}};
  out << footer.dump() << '\n';
}

std::string to_jsonl(const EpisodeLog& log) {
  std::ostringstream out;
  write_jsonl(out, log);
  return out.str();
}

EpisodeLog read_jsonl(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false;
  bool have_footer = false;
  long line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (have_footer) throw LogError("content after end record");
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw LogError("duplicate header");
        if (j.at("schema").get<int>() != EpisodeLog::kSchemaVersion) {
          throw LogError("unsupported log schema");
        }
        log.seed = j.at("seed").get<std::uint64_t>();
        log.policy = j.value("policy", std::string{});
        log.config = j.at("config").get<EnvConfig>();
        log.scenario = j.at("scenario").get<ScenarioConfig>();
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw LogError("step before header");
        StepRecord record = step_from_json(j);
        if (record.agents.size() != log.scenario.agents.size()) {
          throw LogError("agent count differs from scenario");
        }
        if (record.step != static_cast<long>(log.steps.size()) + 1) {
          throw LogError("steps are not consecutive");
        }
        log.steps.push_back(std::move(record));
      } else if (type == "end") {
        if (!have_header) throw LogError("end before header");
        log.termination = termination_from_string(j.at("termination").get<std::string>());
        if (j.at("steps").get<std::size_t>() != log.steps.size()) {
          throw LogError("step count mismatch");
        }
        have_footer = true;
      } else {
        throw LogError("unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw LogError(fmt::format("line {}: {}", line_no, e.what()));
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const LogError*>(&e) != nullptr) throw;
    throw LogError(fmt::format("line {}: {}", line_no, e.what()));
  }
  if (!have_header) throw LogError("missing header");
  if (!have_footer) throw LogError("missing end record");
  return log;
}

std::vector<WorldState> replay_states(const EpisodeLog& log) {
  std::vector<WorldState> states;
  states.reserve(log.steps.size() + 1);
  states.push_back(make_world(log.scenario, log.config.mode, log.config.reward.robot_min_distance));
  for (const StepRecord& r : log.steps) {
    WorldState world = states.front();
    world.step = r.step;
    world.time = r.time;
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
      world.agents[i].observable.position = r.agents[i].position;
      world.agents[i].observable.velocity = r.agents[i].velocity;
      world.agents[i].heading = r.agents[i].heading;
    }
    states.push_back(std::move(world));
  }
  return states;
}

EpisodeMetrics episode_metrics(const EpisodeLog& log) {
  if (log.termination == Termination::Running) throw LogError("episode has not terminated");
  EpisodeMetrics m;
  m.success = log.termination == Termination::Goal;
  m.collision = log.termination == Termination::Collision;
  m.timeout = log.termination == Termination::Timeout;
  m.steps = static_cast<long>(log.steps.size());

  const std::vector<WorldState> states = replay_states(log);
  const double dt = log.config.dt;
  const std::size_t n_agents = log.scenario.agents.size();

  for (std::size_t t = 1; t < states.size(); ++t) {
    const WorldState& world = states[t];
    for (std::size_t i = 1; i < n_agents; ++i) {
      if (proxemic_violation(world.robot(), world.agents[i])) ++m.proxemic_violations;
      m.human_return += human_reward(world.agents[i], world.robot(), log.config.reward);
    }
  }

  std::vector<std::vector<Vec2>> tracks(n_agents);
  for (const WorldState& world : states) {
    for (std::size_t i = 0; i < n_agents; ++i) tracks[i].push_back(world.agents[i].position());
  }

  if (m.success) {
    const AgentSpec& robot = log.scenario.agents.front();
    if (auto r = arrival_ratios(tracks.front(), tracks.front().size() - 1, robot.goal,
                                robot.v_pref, dt)) {
      m.robot_distance_ratio = r->distance;
      m.robot_time_ratio = r->time;
    }
  }

  std::vector<double> human_distance;
  std::vector<double> human_time;
  for (std::size_t i = 1; i < n_agents; ++i) {
    const AgentSpec& spec = log.scenario.agents[i];
    const auto& track = tracks[i];
    std::optional<std::size_t> arrival;
    for (std::size_t t = 0; t < track.size(); ++t) {
      if (norm(track[t] - spec.goal) <= orca::kGoalTolerance) {
        arrival = t;
        break;
      }
    }
    if (!arrival) {
      ++m.humans_unfinished;
      continue;
    }
    ++m.humans_finished;
    if (auto r = arrival_ratios(track, *arrival, spec.goal, spec.v_pref, dt)) {
      human_distance.push_back(r->distance);
      human_time.push_back(r->time);
    }
  }
  if (!human_distance.empty()) {
    m.human_distance_ratio = mean_std(human_distance).mean;
    m.human_time_ratio = mean_std(human_time).mean;
  }
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = static_cast<long>(values.size());
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / n);
  return out;
}

MetricsSummary aggregate(std::span<const EpisodeMetrics> metrics, std::string group) {
  if (metrics.empty()) throw std::invalid_argument("aggregate needs at least one episode");
  MetricsSummary s;
  s.group = std::move(group);
  s.episodes = static_cast<long>(metrics.size());
  std::vector<double> rd, rt, hd, ht, ret;
  for (const EpisodeMetrics& m : metrics) {
    s.successes += m.success;
    s.collisions += m.collision;
    s.timeouts += m.timeout;
    s.proxemic_violations += m.proxemic_violations;
    if (m.robot_distance_ratio) rd.push_back(*m.robot_distance_ratio);
    if (m.robot_time_ratio) rt.push_back(*m.robot_time_ratio);
    if (m.human_distance_ratio) hd.push_back(*m.human_distance_ratio);
    if (m.human_time_ratio) ht.push_back(*m.human_time_ratio);
    ret.push_back(m.human_return);
  }
  s.robot_distance_ratio = mean_std(rd);
  s.robot_time_ratio = mean_std(rt);
  s.human_distance_ratio = mean_std(hd);
  s.human_time_ratio = mean_std(ht);
  s.human_return = mean_std(ret);
  return s;
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> columns{
      "group",
      "episodes",
      "success",
      "collisions",
      "timeouts",
      "proxemic_violations",
      "robot_distance_ratio_mean",
      "robot_distance_ratio_std",
      "robot_time_ratio_mean",
      "robot_time_ratio_std",
      "human_distance_ratio_mean",
      "human_distance_ratio_std",
      "human_time_ratio_mean",
      "human_time_ratio_std",
      "human_return_mean",
      "human_return_std"};
  return columns;
}

void write_summary_csv(std::ostream& out, std::span<const MetricsSummary> rows) {
  const auto& columns = summary_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const MetricsSummary& s : rows) {
    out << s.group << ',' << s.episodes << ',' << s.successes << ',' << s.collisions << ','
        << s.timeouts << ',' << s.proxemic_violations;
    for (const MeanStd* m : {&s.robot_distance_ratio, &s.robot_time_ratio,
                             &s.human_distance_ratio, &s.human_time_ratio, &s.human_return}) {
      out << ',' << fmt_optional(*m, false) << ',' << fmt_optional(*m, true);
    }
    out << '\n';
  }
}

void write_summary_table(std::ostream& out, std::span<const MetricsSummary> rows) {
  auto cell = [](const MeanStd& m) {
    return m.count == 0 ? std::string("-") : fmt::format("{:.2f} ± {:.2f}", m.mean, m.std);
  };
  out << fmt::format("{:<22} {:>5} {:>7} {:>5} {:>7} {:>7}  {:<13} {:<13} {:<13} {:<13} {:<15}\n",
                     "group", "eps", "success", "coll", "timeout", "prox", "robot dist", "robot time",
                     "human dist", "human time", "human return");
  for (const MetricsSummary& s : rows) {
    out << fmt::format("{:<22} {:>5} {:>7} {:>5} {:>7} {:>7}  {:<13} {:<13} {:<13} {:<13} {:<15}\n",
                       s.group, s.episodes, s.successes, s.collisions, s.timeouts,
                       s.proxemic_violations, cell(s.robot_distance_ratio),
                       cell(s.robot_time_ratio), cell(s.human_distance_ratio),
                       cell(s.human_time_ratio), cell(s.human_return));
  }
}

const std::vector<std::string>& episode_columns() {
  static const std::vector<std::string> columns{
      "episode",          "success",           "collision",         "timeout",
      "steps",            "proxemic_violations", "robot_distance_ratio", "robot_time_ratio",
      "human_distance_ratio", "human_time_ratio", "humans_finished",   "humans_unfinished",
      "human_return"};
  return columns;
}

void write_episode_csv(std::ostream& out, std::span<const std::string> names,
                       std::span<const EpisodeMetrics> metrics) {
  const auto& columns = episode_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const EpisodeMetrics& m = metrics[i];
    out << names[i] << ',' << m.success << ',' << m.collision << ',' << m.timeout << ',' << m.steps
        << ',' << m.proxemic_violations << ',' << opt(m.robot_distance_ratio) << ','
        << opt(m.robot_time_ratio) << ',' << opt(m.human_distance_ratio) << ','
        << opt(m.human_time_ratio) << ',' << m.humans_finished << ',' << m.humans_unfinished
        << ',' << fmt::format("{}", m.human_return) << '\n';
  }
}

void write_plot_data(std::ostream& out, const EpisodeLog& log) {
  out << "step,time,agent,kind,x,y,vx,vy,heading,radius,r_prox,event\n";
  const std::vector<WorldState> states = replay_states(log);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const WorldState& world = states[t];
    const AgentState& robot = world.robot();
    const bool last = t + 1 == states.size();
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
      const AgentState& a = world.agents[i];
      std::string event;
      if (i == 0) {
        if (last && log.termination != Termination::Running) event = to_string(log.termination);
      } else if (surface_distance(robot, a) <= 0.0) {
        event = "collision";
      } else if (proxemic_violation(robot, a)) {
        event = "violation";
      }
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", world.step, world.time, i,
                         a.kind == AgentKind::Robot ? "robot" : "human", a.position().x,
                         a.position().y, a.velocity().x, a.velocity().y, a.heading, a.radius(),
                         log.scenario.agents[i].r_prox, event);
    }
  }
}

}  // namespace crowdsim
