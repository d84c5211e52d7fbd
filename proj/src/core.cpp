#include "crowdsim/core.hpp"

#include <numbers>

namespace crowdsim {

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod maps +pi onto -pi; the interval is closed on the right.
  if (wrapped <= -std::numbers::pi) wrapped = std::numbers::pi;
  return wrapped;
}

double surface_distance(const AgentState& a, const AgentState& b) {
  return norm(a.position() - b.position()) - (a.radius() + b.radius());
}

bool proxemic_violation(const AgentState& robot, const AgentState& human) {
  return surface_distance(robot, human) < human.hidden.r_prox;
}

double heading_from_velocity(const Vec2& velocity, double previous) {
  if (norm(velocity) < 1e-6) return previous;
  return std::atan2(velocity.y, velocity.x);
}

}  // namespace crowdsim
