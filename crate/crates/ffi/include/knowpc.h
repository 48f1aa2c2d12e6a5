#ifndef KNOWPC_H
#define KNOWPC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KpStatus {
  KP_STATUS_OK = 0,
  KP_STATUS_NULL_POINTER = 1,
  KP_STATUS_INVALID_UTF8 = 2,
  KP_STATUS_LAYOUT = 3,
  KP_STATUS_PARSE = 4,
  KP_STATUS_INVALID_ARGUMENT = 5,
  KP_STATUS_EPISODE_OVER = 6,
  KP_STATUS_IO = 7,
  KP_STATUS_PANIC = 8,
} KpStatus;

typedef struct KpEpisode KpEpisode;

typedef struct KpLayout KpLayout;

typedef struct KpProgram KpProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *kp_last_error_message(void);

void kp_string_free(char *s);

/**
 * Reads a `.layout` file; its stem becomes the layout name.
 */
enum KpStatus kp_layout_load(const char *path, struct KpLayout **out);

/**
 * One of the ten layouts shipped with the library, e.g. `cramped_room`.
 */
enum KpStatus kp_layout_bundled(const char *name, struct KpLayout **out);

enum KpStatus kp_layout_size(const struct KpLayout *layout, size_t *width, size_t *height);

void kp_layout_free(struct KpLayout *layout);

enum KpStatus kp_program_parse(const char *source, struct KpProgram **out);

/**
 * Canonical source text; free with [`kp_string_free`].
 */
enum KpStatus kp_program_render(const struct KpProgram *program, char **out);

/**
 * Number of condition occurrences.
 */
enum KpStatus kp_program_complexity(const struct KpProgram *program, size_t *out);

void kp_program_free(struct KpProgram *program);

/**
 * A fresh episode of `horizon` steps. `seed` drives the random choices
 * of [`kp_episode_policy_action`].
 */
enum KpStatus kp_episode_new(const struct KpLayout *layout,
                             uint32_t horizon,
                             uint64_t seed,
                             struct KpEpisode **out);

/**
 * Applies one joint action; `reward` receives this step's reward and may
 * be null.
 */
enum KpStatus kp_episode_step(struct KpEpisode *episode,
                              uint8_t action1,
                              uint8_t action2,
                              uint32_t *reward);

/**
 * The action `program` picks for chef `chef` (0 or 1) in the current
 * state, ε = 0.
 */
enum KpStatus kp_episode_policy_action(struct KpEpisode *episode,
                                       const struct KpProgram *program,
                                       uint32_t chef,
                                       uint8_t *out);

/**
 * Current time step, accumulated score and whether the horizon is reached.
 */
enum KpStatus kp_episode_status(const struct KpEpisode *episode,
                                uint32_t *t,
                                uint32_t *score,
                                bool *done);

/**
 * JSON snapshot of chefs, pots and counters; free with [`kp_string_free`].
 */
enum KpStatus kp_episode_snapshot_json(const struct KpEpisode *episode, char **out);

void kp_episode_free(struct KpEpisode *episode);

/**
 * Mean greedy self-play reward over `episodes` episodes of `horizon` steps.
 */
enum KpStatus kp_evaluate_selfplay(const struct KpLayout *layout,
                                   const struct KpProgram *program,
                                   uint32_t episodes,
                                   uint32_t horizon,
                                   uint64_t seed,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KNOWPC_H */
