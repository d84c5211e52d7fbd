#pragma once

#include <cmath>
#include <vector>

namespace crowdsim {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product; > 0 when b is counter-clockwise of a.
constexpr double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

constexpr double norm_sq(const Vec2& v) { return dot(v, v); }

inline double norm(const Vec2& v) { return std::sqrt(norm_sq(v)); }

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

enum class AgentKind { Robot, Human };

struct ObservableState {
  Vec2 position;
  Vec2 velocity;
  double radius{0.3};
};

/// Known only to the agent itself.
struct HiddenState {
  Vec2 goal;
  double v_pref{1.0};
  double psi_pref{0.0};
  double r_prox{0.0};
};

struct AgentState {
  ObservableState observable;
  HiddenState hidden;
  double heading{0.0};
  AgentKind kind{AgentKind::Human};

  const Vec2& position() const { return observable.position; }
  const Vec2& velocity() const { return observable.velocity; }
  double radius() const { return observable.radius; }
  double speed() const { return norm(observable.velocity); }
};

/// Index 0 is always the robot.
struct WorldState {
  std::vector<AgentState> agents;
  double time{0.0};
  long step{0};

  const AgentState& robot() const { return agents.front(); }
  std::size_t num_humans() const { return agents.empty() ? 0 : agents.size() - 1; }
};

/// Center distance minus both body radii; <= 0 means the bodies overlap.
double surface_distance(const AgentState& a, const AgentState& b);

/// True iff the robot is strictly inside the human's personal space.
bool proxemic_violation(const AgentState& robot, const AgentState& human);

/// Heading of a holonomic agent: direction of motion, or `previous` when nearly still.
double heading_from_velocity(const Vec2& velocity, double previous);

}  // namespace crowdsim
