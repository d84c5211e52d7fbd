#pragma once

#include <span>
#include <vector>

#include "crowdsim/core.hpp"

namespace crowdsim::orca {

/// One linear velocity constraint. Permitted velocities lie on the left of
/// `direction` (counter-clockwise side) when standing at `point`.
struct HalfPlane {
  Vec2 point;
  Vec2 direction;

  /// Signed distance of v into the forbidden side; <= 0 when v is permitted.
  double penetration(const Vec2& v) const { return det(direction, point - v); }
  bool permits(const Vec2& v) const { return penetration(v) <= 0.0; }
};

struct OrcaParams {
  double time_horizon{5.0};
  double dt{0.2};
  /// Fraction of the pairwise avoidance correction this agent takes on itself.
  double cooperation{0.5};
  double v_max{1.0};
};

/// How an agent inflates the combined radius of a pair.
enum class RadiusMode { SociallyIntegrated, Plain };

struct Neighbor {
  AgentState agent;
  double combined_radius;
};

double effective_combined_radius(const AgentState& ego, const AgentState& other,
                                 RadiusMode mode);

/// Builds one ORCA half-plane per neighbor from the truncated velocity obstacle.
///
/// When the pair already overlaps at the combined radius the cutoff disc is
/// taken over one time step instead of the horizon. Coincident centers with
/// equal velocities have no defined escape direction; +x is used.
std::vector<HalfPlane> compute_orca_lines(const AgentState& ego,
                                          std::span<const Neighbor> neighbors,
                                          const OrcaParams& params);

struct SolveResult {
  Vec2 velocity;
  /// False when the half-planes had no common point inside the speed disc and
  /// the maximum penetration was minimized instead.
  bool feasible{true};
};

/// Velocity within the v_max disc closest to `preferred` that satisfies all
/// half-planes, by incremental 2D linear programming.
SolveResult solve(std::span<const HalfPlane> lines, const Vec2& preferred, double v_max);

inline Vec2 solve_velocity(std::span<const HalfPlane> lines, const Vec2& preferred,
                           double v_max) {
  return solve(lines, preferred, v_max).velocity;
}

/// Agents within this distance of their goal hold still.
inline constexpr double kGoalTolerance = 0.3;

Vec2 preferred_velocity(const AgentState& agent, double goal_tolerance = kGoalTolerance);

/// ORCA step for one agent against every other agent in the world.
///
/// `params` is indexed like world.agents. Works for any agent kind; callers
/// use Plain mode for the robot since it never knows proxemic radii.
SolveResult orca_step(const WorldState& world, std::size_t agent_index,
                      std::span<const OrcaParams> params, RadiusMode mode,
                      double goal_tolerance = kGoalTolerance);

/// The human policy: orca_step restricted to humans.
Vec2 human_policy_step(const WorldState& world, std::size_t agent_index,
                       std::span<const OrcaParams> params, RadiusMode mode,
                       double goal_tolerance = kGoalTolerance);

}  // namespace crowdsim::orca
