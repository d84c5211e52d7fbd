#include "crowdsim/orca.hpp"

#include <algorithm>
#include <stdexcept>

namespace crowdsim::orca {

namespace {

constexpr double kEpsilon = 1e-10;

Vec2 normalized(const Vec2& v) { return v / norm(v); }

// Optimizes along line `line_no`, honoring lines [0, line_no). Returns false
// when the line segment inside the disc is cut away entirely.
bool solve_on_line(std::span<const HalfPlane> lines, std::size_t line_no, double radius,
                   const Vec2& optimum, bool direction_opt, Vec2& result) {
  const HalfPlane& line = lines[line_no];
  const double dot_product = dot(line.point, line.direction);
  const double discriminant = dot_product * dot_product + radius * radius - norm_sq(line.point);
  if (discriminant < 0.0) return false;  // line misses the speed disc

  const double sqrt_discriminant = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_discriminant;
  double t_right = -dot_product + sqrt_discriminant;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = det(line.direction, lines[i].direction);
    const double numerator = det(lines[i].direction, line.point - lines[i].point);
    if (std::fabs(denominator) <= kEpsilon) {
      // Parallel lines.
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = dot(optimum, line.direction) > 0.0 ? line.point + t_right * line.direction
                                                : line.point + t_left * line.direction;
  } else {
    const double t = dot(line.direction, optimum - line.point);
    result = line.point + std::clamp(t, t_left, t_right) * line.direction;
  }
  return true;
}

// Incremental LP over all lines. Returns lines.size() on success, otherwise
// the index of the first line that could not be satisfied.
std::size_t solve_incremental(std::span<const HalfPlane> lines, double radius,
                              const Vec2& optimum, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = optimum * radius;  // optimum is a unit direction here
  } else if (norm_sq(optimum) > radius * radius) {
    result = normalized(optimum) * radius;
  } else {
    result = optimum;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].penetration(result) > 0.0) {
      const Vec2 previous = result;
      if (!solve_on_line(lines, i, radius, optimum, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

// Infeasible fallback: minimizes the largest penetration over lines from
// `begin_line` on, starting from the partial result of solve_incremental.
void minimize_max_penetration(std::span<const HalfPlane> lines, std::size_t begin_line,
                              double radius, Vec2& result) {
  double distance = 0.0;
  std::vector<HalfPlane> projected;

  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (lines[i].penetration(result) <= distance) continue;

    projected.clear();
    for (std::size_t j = 0; j < i; ++j) {
      HalfPlane line;
      const double determinant = det(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kEpsilon) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (det(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 inward{-lines[i].direction.y, lines[i].direction.x};
    if (solve_incremental(projected, radius, inward, true, result) < projected.size()) {
      // Can only fail from floating-point error; keep the previous point.
      result = previous;
    }
    distance = lines[i].penetration(result);
  }
}

}  // namespace

double effective_combined_radius(const AgentState& ego, const AgentState& other,
                                 RadiusMode mode) {
  const double bodies = ego.radius() + other.radius();
  if (mode == RadiusMode::Plain) return bodies;
  if (ego.kind != AgentKind::Human) {
    throw std::invalid_argument("socially integrated radius requested for the robot");
  }
  if (other.kind == AgentKind::Robot) return bodies + ego.hidden.r_prox;
  return bodies + std::max(ego.hidden.r_prox, other.hidden.r_prox);
}

std::vector<HalfPlane> compute_orca_lines(const AgentState& ego,
                                          std::span<const Neighbor> neighbors,
                                          const OrcaParams& params) {
  std::vector<HalfPlane> lines;
  lines.reserve(neighbors.size());
  const double inv_horizon = 1.0 / params.time_horizon;

  for (const Neighbor& neighbor : neighbors) {
    const Vec2 relative_position = neighbor.agent.position() - ego.position();
    const Vec2 relative_velocity = ego.velocity() - neighbor.agent.velocity();
    const double dist_sq = norm_sq(relative_position);
    const double radius = neighbor.combined_radius;
    const double radius_sq = radius * radius;

    HalfPlane line;
    Vec2 u;

    if (dist_sq > radius_sq) {
      // Vector from the cutoff center to the relative velocity.
      const Vec2 w = relative_velocity - inv_horizon * relative_position;
      const double w_length_sq = norm_sq(w);
      const double dot_product = dot(w, relative_position);

      if (dot_product < 0.0 && dot_product * dot_product > radius_sq * w_length_sq) {
        // Closest boundary point is on the cutoff circle.
        const double w_length = std::sqrt(w_length_sq);
        const Vec2 unit_w = w / w_length;
        line.direction = {unit_w.y, -unit_w.x};
        u = (radius * inv_horizon - w_length) * unit_w;
      } else {
        // Closest boundary point is on one of the legs.
        const double leg = std::sqrt(dist_sq - radius_sq);
        if (det(relative_position, w) > 0.0) {
          line.direction = Vec2{relative_position.x * leg - relative_position.y * radius,
                                relative_position.x * radius + relative_position.y * leg} /
                           dist_sq;
        } else {
          line.direction = -Vec2{relative_position.x * leg + relative_position.y * radius,
                                 -relative_position.x * radius + relative_position.y * leg} /
                           dist_sq;
        }
        u = dot(relative_velocity, line.direction) * line.direction - relative_velocity;
      }
    } else {
      // Already overlapping: resolve within one step.
      const double inv_dt = 1.0 / params.dt;
      const Vec2 w = relative_velocity - inv_dt * relative_position;
      const double w_length = norm(w);
      const Vec2 unit_w = w_length > kEpsilon ? w / w_length : Vec2{1.0, 0.0};
      line.direction = {unit_w.y, -unit_w.x};
      u = (radius * inv_dt - w_length) * unit_w;
    }

    line.point = ego.velocity() + params.cooperation * u;
    lines.push_back(line);
  }
  return lines;
}

SolveResult solve(std::span<const HalfPlane> lines, const Vec2& preferred, double v_max) {
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be positive");
  SolveResult out;
  const std::size_t failed = solve_incremental(lines, v_max, preferred, false, out.velocity);
  if (failed < lines.size()) {
    out.feasible = false;
    minimize_max_penetration(lines, failed, v_max, out.velocity);
  }
  return out;
}

Vec2 preferred_velocity(const AgentState& agent, double goal_tolerance) {
  const Vec2 to_goal = agent.hidden.goal - agent.position();
  const double distance = norm(to_goal);
  if (distance <= goal_tolerance) return {};
  return to_goal * (agent.hidden.v_pref / distance);
}

SolveResult orca_step(const WorldState& world, std::size_t agent_index,
                      std::span<const OrcaParams> params, RadiusMode mode,
                      double goal_tolerance) {
  const AgentState& ego = world.agents.at(agent_index);
  const RadiusMode ego_mode = ego.kind == AgentKind::Robot ? RadiusMode::Plain : mode;

  std::vector<Neighbor> neighbors;
  neighbors.reserve(world.agents.size());
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    if (j == agent_index) continue;
    const AgentState& other = world.agents[j];
    neighbors.push_back({other, effective_combined_radius(ego, other, ego_mode)});
  }

  const OrcaParams& own = params[agent_index];
  const auto lines = compute_orca_lines(ego, neighbors, own);
  return solve(lines, preferred_velocity(ego, goal_tolerance), own.v_max);
}

Vec2 human_policy_step(const WorldState& world, std::size_t agent_index,
                       std::span<const OrcaParams> params, RadiusMode mode,
                       double goal_tolerance) {
  if (world.agents.at(agent_index).kind != AgentKind::Human) {
    throw std::invalid_argument("human_policy_step called for a non-human agent");
  }
  return orca_step(world, agent_index, params, mode, goal_tolerance).velocity;
}

}  // namespace crowdsim::orca
