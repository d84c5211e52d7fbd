#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdsim/core.hpp"
#include "crowdsim/random.hpp"

namespace crowdsim {

/// Invalid scenario or generator parameters.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { CircleCrossingHO, CircleCrossingHE, Passing, Custom };

struct AgentSpec {
  AgentKind kind{AgentKind::Human};
  Vec2 start;
  Vec2 goal;
  double radius{0.3};
  double v_pref{1.0};
  double r_prox{0.0};
  double cooperation{0.5};
  double psi_pref{0.0};
};

struct SamplingRanges {
  double r_prox_min{0.0}, r_prox_max{0.8};
  double v_pref_min{0.5}, v_pref_max{1.0};
  double cooperation_min{0.3}, cooperation_max{0.7};
};

struct ScenarioConfig {
  static constexpr int kSchemaVersion = 1;

  ScenarioKind kind{ScenarioKind::Custom};
  std::vector<AgentSpec> agents;  // index 0 is the robot
  double circle_radius{0.0};      // 0 for non-circle scenarios
  std::uint64_t seed{0};
  SamplingRanges ranges;

  /// Throws ScenarioError for a missing robot, overlapping starts or a start
  /// placed on its own goal.
  void validate() const;
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

struct CircleCrossingParams {
  int n_agents{8};
  double circle_radius{4.0};
  double robot_v_pref{1.0};
  double agent_radius{0.3};
  double jitter_deg{10.0};
  double min_gap{0.1};  // surface gap between starts, and between goals
  SamplingRanges ranges;
};

ScenarioConfig sample_circle_crossing(const CircleCrossingParams& params, bool homogeneous,
                                      Rng& rng);

struct PassingParams {
  int n_oncoming{2};
  double corridor_length{8.0};
  /// Longitudinal spacing between consecutive oncoming humans.
  double lateral_gap{1.5};
  double r_prox_oncoming{0.8};
  double robot_v_pref{1.0};
  double agent_radius{0.3};
  double lateral_jitter{0.15};
  SamplingRanges ranges;
};

ScenarioConfig sample_passing(const PassingParams& params, Rng& rng);

/// Generator recipe: either a fixed scenario or a kind plus parameters that
/// is resampled from each seed.
struct ScenarioSource {
  enum class Type { Fixed, CircleHO, CircleHE, Passing };
  Type type{Type::CircleHE};
  ScenarioConfig fixed;
  CircleCrossingParams circle;
  PassingParams passing;

  ScenarioConfig generate(std::uint64_t seed) const;
};

void to_json(nlohmann::json& j, const ScenarioConfig& scenario);
void from_json(const nlohmann::json& j, ScenarioConfig& scenario);

/// Accepts a full scenario (`schema` + `agents`) or a generator recipe
/// (`generator`: "circle-ho" | "circle-he" | "passing", plus parameters).
ScenarioSource scenario_source_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSource& source);

}  // namespace crowdsim
