/*
 * C boundary of the crowd navigation environment.
 *
 * Observation layout (version CROWDSIM_LAYOUT_VERSION), all doubles:
 *   robot block (6):  d_g, dp_g.x, dp_g.y, theta, v_pref, r_0
 *   per human, in agent index order:
 *     static (2):     r_i, r_i + r_0
 *     frames (k + 1), newest first, 5 each:
 *                     d, dp.x, dp.y, dv.x, dv.y   (robot minus human)
 *
 * Termination codes: 0 running, 1 goal, 2 collision, 3 timeout.
 * Per-human rewards are the rewards each human gives the robot, without the
 * social-radius gating.
 *
 * Functions returning int yield 0 on success and a negative value on
 * failure; crowdsim_last_error() then describes the failure. The error
 * string is thread-local.
 */
#ifndef CROWDSIM_C_API_H_
#define CROWDSIM_C_API_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CROWDSIM_LAYOUT_VERSION 1

typedef struct crowdsim_env crowdsim_env;

int crowdsim_layout_version(void);
const char* crowdsim_last_error(void);

/* scenario_json is a full scenario or a generator recipe; a recipe is
 * resampled from the seed on every reset. NULL config_json means defaults. */
crowdsim_env* crowdsim_create(const char* config_json, const char* scenario_json, uint64_t seed);
void crowdsim_destroy(crowdsim_env* env);

/* Sizes of the current episode (valid after create or reset). */
size_t crowdsim_observation_size(const crowdsim_env* env);
size_t crowdsim_num_humans(const crowdsim_env* env);
int crowdsim_history(const crowdsim_env* env);

int crowdsim_reset(crowdsim_env* env, uint64_t seed, double* observation, size_t capacity);

int crowdsim_step(crowdsim_env* env, double v, double dtheta, double* observation,
                  size_t capacity, double* reward, int* termination, double* human_rewards,
                  size_t human_capacity);

/* Writes the current episode as a JSONL log readable by the evaluation tools. */
int crowdsim_write_log(const crowdsim_env* env, const char* path, const char* policy_name);

/* Resolved configuration as JSON; the pointer stays valid until the next call
 * on the same env. */
const char* crowdsim_config_json(crowdsim_env* env);

#ifdef __cplusplus
}
#endif

#endif /* CROWDSIM_C_API_H_ */
