#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdsim/c_api.h"
#include "crowdsim/evaluation.hpp"

namespace {

const char* kRecipe = R"({"generator": "circle-he"})";

struct Handle {
  crowdsim_env* env;
  explicit Handle(crowdsim_env* e) : env(e) {}
  ~Handle() { crowdsim_destroy(env); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
};

}  // namespace

TEST_CASE("layout and sizes") {
  CHECK(crowdsim_layout_version() == CROWDSIM_LAYOUT_VERSION);
  Handle h(crowdsim_create(nullptr, kRecipe, 1));
  REQUIRE(h.env != nullptr);
  CHECK(crowdsim_history(h.env) == 15);
  CHECK(crowdsim_num_humans(h.env) == 7);
  CHECK(crowdsim_observation_size(h.env) == 6 + 7 * 82);

  const auto config = nlohmann::json::parse(crowdsim_config_json(h.env));
  CHECK(config.at("layout_version") == CROWDSIM_LAYOUT_VERSION);
  CHECK(config.at("config").at("k") == 15);
}

TEST_CASE("observation reshapes into robot block and per-human blocks") {
  Handle h(crowdsim_create(R"({"k": 3})", kRecipe, 2));
  REQUIRE(h.env != nullptr);
  const std::size_t n = crowdsim_num_humans(h.env);
  const int k = crowdsim_history(h.env);
  const std::size_t block = 2 + 5 * static_cast<std::size_t>(k + 1);
  std::vector<double> obs(crowdsim_observation_size(h.env));
  REQUIRE(obs.size() == 6 + n * block);
  REQUIRE(crowdsim_reset(h.env, 2, obs.data(), obs.size()) == 0);

  for (int s = 0; s < 3; ++s) {
    double reward = 0.0;
    int term = -1;
    std::vector<double> previous = obs;
    REQUIRE(crowdsim_step(h.env, 0.5, 0.1, obs.data(), obs.size(), &reward, &term, nullptr, 0) ==
            0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* human = obs.data() + 6 + i * block;
      CHECK(human[1] == doctest::Approx(human[0] + obs[5]));
      // Frame distance is the norm of the relative position.
      CHECK(human[2] == doctest::Approx(std::hypot(human[3], human[4])));
      // The previous newest frame moved one slot back.
      const double* before = previous.data() + 6 + i * block;
      CHECK(std::memcmp(human + 2 + 5, before + 2, 5 * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("step reports rewards and terminations") {
  const char* lone = R"({
    "schema": 1, "scenario_kind": "custom", "circle_radius": 0,
    "agents": [
      {"kind": "robot", "start": [0, 0], "goal": [1, 0], "radius": 0.3, "v_pref": 1,
       "r_prox": 0, "cooperation": 0.5, "psi_pref": 0},
      {"kind": "human", "start": [0, 5], "goal": [-5, 5], "radius": 0.3, "v_pref": 1,
       "r_prox": 0.5, "cooperation": 0.5, "psi_pref": 3.14159}
    ]})";
  Handle h(crowdsim_create(nullptr, lone, 0));
  REQUIRE(h.env != nullptr);
  double reward = 0.0;
  int term = -1;
  double human_reward[1] = {1.0};
  int steps = 0;
  while (term != 1 && steps < 20) {
    REQUIRE(crowdsim_step(h.env, 1.0, 0.0, nullptr, 0, &reward, &term, human_reward, 1) == 0);
    ++steps;
  }
  CHECK(term == 1);
  CHECK(reward == 4.0);
  CHECK(human_reward[0] <= 0.0);
  // The episode is over.
  CHECK(crowdsim_step(h.env, 1.0, 0.0, nullptr, 0, &reward, &term, nullptr, 0) < 0);
  CHECK(std::string(crowdsim_last_error()).size() > 0);

  REQUIRE(crowdsim_reset(h.env, 0, nullptr, 0) == 0);
  CHECK(crowdsim_step(h.env, 0.0, 0.0, nullptr, 0, &reward, &term, nullptr, 0) == 0);
  CHECK(term == 0);
}

TEST_CASE("errors") {
  CHECK(crowdsim_create(nullptr, "{ nope", 0) == nullptr);
  CHECK(std::string(crowdsim_last_error()).size() > 0);
  CHECK(crowdsim_create(R"({"dt": -1})", kRecipe, 0) == nullptr);
  CHECK(std::string(crowdsim_last_error()).find("dt") != std::string::npos);
  CHECK(crowdsim_create(nullptr, nullptr, 0) == nullptr);

  Handle h(crowdsim_create(nullptr, kRecipe, 0));
  REQUIRE(h.env != nullptr);
  std::vector<double> small(3);
  CHECK(crowdsim_reset(h.env, 0, small.data(), small.size()) < 0);
  CHECK(crowdsim_step(h.env, 0.5, 0.0, small.data(), small.size(), nullptr, nullptr, nullptr, 0) <
        0);
  CHECK(crowdsim_step(h.env, NAN, 0.0, nullptr, 0, nullptr, nullptr, nullptr, 0) < 0);
  CHECK(crowdsim_reset(nullptr, 0, nullptr, 0) < 0);
  CHECK(crowdsim_observation_size(nullptr) == 0);
}

TEST_CASE("recipes resample on reset and logs round-trip") {
  Handle h(crowdsim_create(nullptr, kRecipe, 5));
  REQUIRE(h.env != nullptr);
  std::vector<double> a(crowdsim_observation_size(h.env));
  std::vector<double> b(a.size());
  REQUIRE(crowdsim_reset(h.env, 5, a.data(), a.size()) == 0);
  REQUIRE(crowdsim_reset(h.env, 6, b.data(), b.size()) == 0);
  CHECK(a != b);
  REQUIRE(crowdsim_reset(h.env, 5, b.data(), b.size()) == 0);
  CHECK(a == b);

  double reward = 0.0;
  int term = 0;
  int steps = 0;
  while (term == 0) {
    REQUIRE(crowdsim_step(h.env, 0.8, 0.05, nullptr, 0, &reward, &term, nullptr, 0) == 0);
    ++steps;
  }
  const auto path = std::filesystem::temp_directory_path() / "crowdsim_c_api_log.jsonl";
  REQUIRE(crowdsim_write_log(h.env, path.string().c_str(), "driver") == 0);
  std::ifstream in(path);
  const crowdsim::EpisodeLog log = crowdsim::read_jsonl(in);
  CHECK(log.policy == "driver");
  CHECK(log.seed == 5);
  CHECK(static_cast<int>(log.steps.size()) == steps);
  CHECK(static_cast<int>(log.termination) == term);
  CHECK(crowdsim::episode_metrics(log).steps == steps);
  CHECK(crowdsim_write_log(h.env, "/nonexistent/dir/log.jsonl", "x") < 0);
}
