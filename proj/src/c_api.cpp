#include "crowdsim/c_api.h"

#include <algorithm>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "crowdsim/environment.hpp"
#include "crowdsim/evaluation.hpp"

struct crowdsim_env {
  crowdsim::Environment env;
  crowdsim::ScenarioSource source;
  crowdsim::EpisodeLog log;
  std::string config_text;
};

namespace {

thread_local std::string last_error;

int fail(const std::string& message) {
  last_error = message;
  return -1;
}

int copy_observation(const crowdsim::Observation& obs, double* out, std::size_t capacity) {
  const std::vector<double> flat = obs.flatten();
  if (out == nullptr) return 0;
  if (capacity < flat.size()) {
    return fail("observation buffer too small: need " + std::to_string(flat.size()));
  }
  std::copy(flat.begin(), flat.end(), out);
  return 0;
}

int start_episode(crowdsim_env* handle, std::uint64_t seed, double* out, std::size_t capacity) {
  const crowdsim::ScenarioConfig scenario = handle->source.generate(seed);
  const crowdsim::Observation obs = handle->env.reset(scenario, seed);
  handle->log = crowdsim::EpisodeLog{};
  handle->log.config = handle->env.config();
  handle->log.scenario = scenario;
  handle->log.seed = seed;
  return copy_observation(obs, out, capacity);
}

}  // namespace

extern "C" {

int crowdsim_layout_version(void) { return CROWDSIM_LAYOUT_VERSION; }

const char* crowdsim_last_error(void) { return last_error.c_str(); }

crowdsim_env* crowdsim_create(const char* config_json, const char* scenario_json, uint64_t seed) {
  try {
    crowdsim::EnvConfig config;
    if (config_json != nullptr && *config_json != '\0') {
      config = nlohmann::json::parse(config_json).get<crowdsim::EnvConfig>();
    }
    if (scenario_json == nullptr) {
      fail("scenario_json is required");
      return nullptr;
    }
    auto source = crowdsim::scenario_source_from_json(nlohmann::json::parse(scenario_json));
    auto* handle = new crowdsim_env{crowdsim::Environment(config), std::move(source), {}, {}};
    if (start_episode(handle, seed, nullptr, 0) != 0) {
      delete handle;
      return nullptr;
    }
    return handle;
  } catch (const std::exception& e) {
    fail(e.what());
    return nullptr;
  }
}

void crowdsim_destroy(crowdsim_env* env) { delete env; }

size_t crowdsim_observation_size(const crowdsim_env* env) {
  return env == nullptr ? 0 : env->env.observation_size();
}

size_t crowdsim_num_humans(const crowdsim_env* env) {
  return env == nullptr ? 0 : env->env.world().num_humans();
}

int crowdsim_history(const crowdsim_env* env) {
  return env == nullptr ? -1 : env->env.config().history;
}

int crowdsim_reset(crowdsim_env* env, uint64_t seed, double* observation, size_t capacity) {
  if (env == nullptr) return fail("null env");
  try {
    return start_episode(env, seed, observation, capacity);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int crowdsim_step(crowdsim_env* env, double v, double dtheta, double* observation,
                  size_t capacity, double* reward, int* termination, double* human_rewards,
                  size_t human_capacity) {
  if (env == nullptr) return fail("null env");
  try {
    const std::size_t humans = env->env.world().num_humans();
    if (observation != nullptr && capacity < env->env.observation_size()) {
      return fail("observation buffer too small");
    }
    if (human_rewards != nullptr && human_capacity < humans) {
      return fail("human reward buffer too small");
    }
    const crowdsim::StepResult result = env->env.step({v, dtheta});
    env->log.steps.push_back(
        crowdsim::make_step_record(env->env.world(), result.info.applied_action, result));
    env->log.termination = result.termination;
    if (reward != nullptr) *reward = result.reward;
    if (termination != nullptr) *termination = static_cast<int>(result.termination);
    if (human_rewards != nullptr) {
      std::copy(result.info.human_rewards.begin(), result.info.human_rewards.end(), human_rewards);
    }
    return copy_observation(result.observation, observation, capacity);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int crowdsim_write_log(const crowdsim_env* env, const char* path, const char* policy_name) {
  if (env == nullptr || path == nullptr) return fail("null argument");
  try {
    crowdsim::EpisodeLog log = env->log;
    log.policy = policy_name != nullptr ? policy_name : "external";
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(std::string("cannot open ") + path);
    crowdsim::write_jsonl(out, log);
    if (!out) return fail(std::string("write failed: ") + path);
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

const char* crowdsim_config_json(crowdsim_env* env) {
  if (env == nullptr) return nullptr;
  nlohmann::json j{{"layout_version", CROWDSIM_LAYOUT_VERSION},
                   {"config", nlohmann::json(env->env.config())},
                   {"scenario", crowdsim::to_json(env->source)}};
  env->config_text = j.dump();
  return env->config_text.c_str();
}

}  // extern "C"
