#include <doctest.h>

#include <cmath>
#include <cstring>

#include "crowdsim/environment.hpp"
#include "crowdsim/orca.hpp"
#include "oracles.hpp"

using namespace crowdsim;
using namespace crowdsim::orca;

namespace {

AgentState make_agent(Vec2 p, Vec2 v, double r, double r_prox, AgentKind kind) {
  AgentState a;
  a.observable = {p, v, r};
  a.hidden.r_prox = r_prox;
  a.hidden.goal = p;
  a.kind = kind;
  return a;
}

Vec2 left_normal(const HalfPlane& l) { return {-l.direction.y, l.direction.x}; }

}  // namespace

TEST_CASE("effective_combined_radius rules") {
  const auto robot = make_agent({0, 0}, {}, 0.3, 0.0, AgentKind::Robot);
  const auto human = make_agent({1, 0}, {}, 0.3, 0.8, AgentKind::Human);
  const auto calm = make_agent({1, 0}, {}, 0.3, 0.0, AgentKind::Human);
  const auto other = make_agent({2, 0}, {}, 0.3, 0.4, AgentKind::Human);
  CHECK(effective_combined_radius(human, robot, RadiusMode::SociallyIntegrated) ==
        doctest::Approx(1.4));
  CHECK(effective_combined_radius(calm, robot, RadiusMode::SociallyIntegrated) ==
        doctest::Approx(0.6));
  CHECK(effective_combined_radius(human, other, RadiusMode::SociallyIntegrated) ==
        doctest::Approx(1.4));
  CHECK(effective_combined_radius(other, human, RadiusMode::SociallyIntegrated) ==
        doctest::Approx(1.4));
  CHECK(effective_combined_radius(human, robot, RadiusMode::Plain) == doctest::Approx(0.6));
  CHECK_THROWS_AS(effective_combined_radius(robot, human, RadiusMode::SociallyIntegrated),
                  std::invalid_argument);
}

TEST_CASE("compute_orca_lines basics") {
  const auto ego = make_agent({0, 0}, {0.5, 0.2}, 0.3, 0, AgentKind::Human);
  const OrcaParams params{5.0, 0.2, 0.5, 1.0};
  CHECK(compute_orca_lines(ego, {}, params).empty());

  SUBCASE("distant stationary neighbor keeps the current velocity admissible") {
    const Neighbor far{make_agent({0, 6}, {}, 0.3, 0, AgentKind::Human), 0.6};
    const auto lines = compute_orca_lines(ego, std::span(&far, 1), params);
    REQUIRE(lines.size() == 1);
    CHECK(std::fabs(norm(lines[0].direction) - 1.0) < 1e-9);
    // Relative velocity outside the truncated VO.
    REQUIRE_FALSE(oracle::collides_within(far.agent.position() - ego.position(),
                                          ego.velocity() - far.agent.velocity(), 0.6, 5.0));
    CHECK(lines[0].permits(ego.velocity()));
  }

  SUBCASE("coincident centers fall back to +x") {
    const Neighbor same{make_agent({0, 0}, {0.5, 0.2}, 0.3, 0, AgentKind::Human), 0.6};
    const auto lines = compute_orca_lines(ego, std::span(&same, 1), params);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].direction.x == doctest::Approx(0.0));
    CHECK(lines[0].direction.y == doctest::Approx(-1.0));
    CHECK(is_finite(lines[0].point));
  }
}

TEST_CASE("head-on pair splits the correction evenly") {
  // Gap 4 m, combined radius 0.6, horizon 5 s; approach speed sits inside the
  // cutoff disc so the closest VO boundary point lies on the cutoff circle.
  const auto a = make_agent({0, 0}, {0.375, 0}, 0.3, 0, AgentKind::Human);
  const auto b = make_agent({4, 0}, {-0.375, 0}, 0.3, 0, AgentKind::Human);
  const OrcaParams params{5.0, 0.2, 0.5, 1.0};
  const Neighbor nb{b, 0.6};
  const Neighbor na{a, 0.6};
  const HalfPlane la = compute_orca_lines(a, std::span(&nb, 1), params).at(0);
  const HalfPlane lb = compute_orca_lines(b, std::span(&na, 1), params).at(0);

  // Line perpendicular to the connecting axis.
  CHECK(std::fabs(la.direction.x) < 1e-12);
  CHECK(std::fabs(lb.direction.x) < 1e-12);
  // Full correction: relative velocity 0.75 must drop to 0.8 - 0.12 = 0.68.
  CHECK(la.point.x == doctest::Approx(0.375 - 0.035).epsilon(1e-12));
  CHECK(lb.point.x == doctest::Approx(-0.375 + 0.035).epsilon(1e-12));
  CHECK(left_normal(la).x < 0.0);  // A may only slow down or back off
  CHECK(left_normal(lb).x > 0.0);

  // Brute force: any pair of admissible velocities avoids the truncated VO,
  // and A just outside its line paired with B on its line collides.
  const Vec2 rel_pos = b.position() - a.position();
  int checked = 0;
  for (double ax = -1.0; ax <= 1.0; ax += 0.05) {
    for (double ay = -1.0; ay <= 1.0; ay += 0.05) {
      const Vec2 va{ax, ay};
      if (!la.permits(va)) continue;
      for (double bx = -1.0; bx <= 1.0; bx += 0.1) {
        for (double by = -1.0; by <= 1.0; by += 0.1) {
          const Vec2 vb{bx, by};
          if (!lb.permits(vb)) continue;
          ++checked;
          const bool hit = oracle::collides_within(rel_pos, va - vb, 0.6 - 1e-9, 5.0);
          CHECK_FALSE(hit);
        }
      }
    }
  }
  CHECK(checked > 1000);
  // Stay close to the touching point: the cutoff circle bends away from the line.
  for (double s = -0.002; s <= 0.002; s += 0.0005) {
    const Vec2 va = la.point - 1e-4 * left_normal(la) + s * la.direction;
    CHECK(oracle::collides_within(rel_pos, va - lb.point, 0.6, 5.0));
  }
}

TEST_CASE("cooperation scales the correction") {
  const auto a = make_agent({0, 0}, {0.375, 0}, 0.3, 0, AgentKind::Human);
  const Neighbor nb{make_agent({4, 0}, {-0.375, 0}, 0.3, 0, AgentKind::Human), 0.6};
  for (double c : {0.3, 0.5, 0.7, 1.0}) {
    const HalfPlane l = compute_orca_lines(a, std::span(&nb, 1), {5.0, 0.2, c, 1.0}).at(0);
    CHECK(l.point.x == doctest::Approx(0.375 - c * 0.07).epsilon(1e-12));
  }
}

TEST_CASE("reciprocal socially integrated choices keep the plain clearance") {
  Rng rng(21);
  int pairs = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto a = make_agent({0, 0}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}, 0.3,
                              rng.uniform(0.05, 0.8), AgentKind::Human);
    const double angle = rng.uniform(-M_PI, M_PI);
    const double dist = rng.uniform(2.0, 6.0);
    const auto b = make_agent({dist * std::cos(angle), dist * std::sin(angle)},
                              {rng.uniform(-1, 1), rng.uniform(-1, 1)}, 0.3,
                              rng.uniform(0, 0.8), AgentKind::Human);
    const double social = effective_combined_radius(a, b, RadiusMode::SociallyIntegrated);
    if (dist <= social) continue;
    const OrcaParams params{5.0, 0.2, 0.5, 1.0};
    const Neighbor nb{b, social};
    const Neighbor na{a, social};
    const HalfPlane la = compute_orca_lines(a, std::span(&nb, 1), params).at(0);
    const HalfPlane lb = compute_orca_lines(b, std::span(&na, 1), params).at(0);
    for (int k = 0; k < 50; ++k) {
      const Vec2 va{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Vec2 vb{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      if (!la.permits(va) || !lb.permits(vb)) continue;
      ++pairs;
      CHECK_FALSE(oracle::collides_within(b.position() - a.position(), va - vb, social - 1e-9, 5.0));
      CHECK_FALSE(oracle::collides_within(b.position() - a.position(), va - vb, 0.6, 5.0));
    }
  }
  CHECK(pairs > 10000);
}

TEST_CASE("solve_velocity examples and invariants") {
  SUBCASE("unconstrained") {
    CHECK(solve_velocity({}, {0.3, -0.4}, 1.0) == Vec2{0.3, -0.4});
    const Vec2 v = solve_velocity({}, {3.0, 4.0}, 1.0);
    CHECK(v.x == doctest::Approx(0.6));
    CHECK(v.y == doctest::Approx(0.8));
  }
  SUBCASE("satisfied constraint leaves the preference untouched") {
    const HalfPlane l{{0, -1}, {1, 0}};  // permits y >= -1
    CHECK(solve_velocity(std::span(&l, 1), {0.2, 0.1}, 1.0) == Vec2{0.2, 0.1});
  }
  SUBCASE("single active constraint projects onto the line") {
    const HalfPlane l{{0, 0.5}, {1, 0}};  // permits y >= 0.5
    const Vec2 v = solve_velocity(std::span(&l, 1), {0.2, 0.0}, 1.0);
    CHECK(v.x == doctest::Approx(0.2));
    CHECK(v.y == doctest::Approx(0.5));
  }
  SUBCASE("infeasible pair settles between the lines") {
    const HalfPlane lines[] = {{{0, 0.5}, {1, 0}}, {{0, -0.5}, {-1, 0}}};  // y >= .5 and y <= -.5
    const SolveResult r = solve(lines, {0.0, 0.0}, 1.0);
    CHECK_FALSE(r.feasible);
    CHECK(std::fabs(r.velocity.y) < 1e-9);
  }
  SUBCASE("random properties") {
    Rng rng(5);
    for (int i = 0; i < 3000; ++i) {
      const auto inst = oracle::random_lp_instance(rng);
      const SolveResult r = solve(inst.lines, inst.preferred, inst.v_max);
      CHECK(norm(r.velocity) <= inst.v_max + 1e-9);
      const SolveResult again = solve(inst.lines, inst.preferred, inst.v_max);
      CHECK(std::memcmp(&r.velocity, &again.velocity, sizeof(Vec2)) == 0);
      bool pref_ok = norm(inst.preferred) <= inst.v_max;
      for (const auto& l : inst.lines) pref_ok = pref_ok && l.permits(inst.preferred);
      if (pref_ok) CHECK(r.velocity == inst.preferred);
      if (r.feasible) {
        for (const auto& l : inst.lines) CHECK(l.penetration(r.velocity) < 1e-9);
      }
    }
  }
}

TEST_CASE("solve_velocity matches the exact vertex-enumeration oracle") {
  Rng rng(99);
  int compared = 0;
  for (int i = 0; i < 500; ++i) {
    const auto inst = oracle::random_lp_instance(rng);
    const auto expected = oracle::reference_solve(inst.lines, inst.preferred, inst.v_max);
    const SolveResult got = solve(inst.lines, inst.preferred, inst.v_max);
    CHECK(got.feasible == expected.feasible);
    if (!expected.feasible) {
      CHECK(std::fabs(oracle::max_penetration(inst.lines, got.velocity) -
                      expected.min_max_penetration) < 1e-6);
    }
    if (expected.unique) CHECK(norm(got.velocity - expected.velocity) < 1e-3);
    ++compared;
  }
  CHECK(compared == 500);
}

TEST_CASE("human policy") {
  EnvConfig config;
  auto human = make_agent({5, 0}, {}, 0.3, 0.0, AgentKind::Human);
  human.hidden.goal = {0, 0};
  human.hidden.v_pref = 1.0;
  auto robot = make_agent({-20, 0}, {}, 0.3, 0.0, AgentKind::Robot);
  robot.hidden.goal = {-25, 0};
  std::vector<OrcaParams> params(2, {5.0, 0.2, 0.5, 1.0});

  SUBCASE("free walk toward the goal") {
    WorldState world{{robot, human}, 0.0, 0};
    const Vec2 v = human_policy_step(world, 1, params, RadiusMode::SociallyIntegrated);
    CHECK(v.x == doctest::Approx(-1.0));
    CHECK(v.y == doctest::Approx(0.0));
  }
  SUBCASE("at the goal") {
    human.observable.position = {0.1, 0.1};
    WorldState world{{robot, human}, 0.0, 0};
    CHECK(human_policy_step(world, 1, params, RadiusMode::SociallyIntegrated) == Vec2{});
  }
  SUBCASE("robot is not a human") {
    WorldState world{{robot, human}, 0.0, 0};
    CHECK_THROWS_AS(human_policy_step(world, 0, params, RadiusMode::Plain), std::invalid_argument);
  }
}

namespace {

// Surface distance at the first step where the human deviates sideways while
// approaching a robot that stands still.
double first_deviation_distance(double r_prox, RadiusMode mode) {
  ScenarioConfig scenario;
  AgentSpec robot;
  robot.kind = AgentKind::Robot;
  robot.start = {0, 0};
  robot.goal = {0, -6};
  AgentSpec human;
  // A small lateral offset breaks the head-on symmetry, which would otherwise
  // only make the human slow down.
  human.start = {6, 0.2};
  human.goal = {-6, 0.2};
  human.v_pref = 1.0;
  human.r_prox = r_prox;
  human.cooperation = 0.5;
  scenario.agents = {robot, human};

  EnvConfig config;
  config.human_radius_mode = mode;
  Environment env(config);
  env.reset(scenario, 0);
  while (env.running()) {
    const double before = surface_distance(env.world().agents[0], env.world().agents[1]);
    env.step({0.0, 0.0});
    if (std::fabs(env.world().agents[1].velocity().y) > 0.05) return before;
  }
  return -1.0;
}

}  // namespace

TEST_CASE("humans start evading a standing robot outside their personal space") {
  const double social = first_deviation_distance(0.8, RadiusMode::SociallyIntegrated);
  const double plain = first_deviation_distance(0.8, RadiusMode::Plain);
  CHECK(social > 0.8);
  CHECK(plain > 0.0);
  CHECK(social > plain);
}

TEST_CASE("grid oracle agrees with vertex enumeration") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto inst = oracle::random_lp_instance(rng);
    const auto grid = oracle::brute_force_solve(inst.lines, inst.preferred, inst.v_max);
    const auto exact = oracle::reference_solve(inst.lines, inst.preferred, inst.v_max);
    CHECK(grid.feasible == exact.feasible);
    CHECK(std::fabs(grid.min_max_penetration - exact.min_max_penetration) < 1e-6);
    if (exact.feasible || exact.unique) CHECK(norm(grid.velocity - exact.velocity) < 1e-3);
  }
}
