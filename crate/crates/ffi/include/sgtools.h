#ifndef SGTOOLS_H
#define SGTOOLS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_ARGUMENT = 1,
  SG_STATUS_INVALID_UTF8 = 2,
  SG_STATUS_IO = 3,
  SG_STATUS_PARSE = 4,
  SG_STATUS_INVALID_SCENE = 5,
  SG_STATUS_TOOL_ERROR = 6,
  SG_STATUS_INVALID_ARGUMENT = 7,
  SG_STATUS_PANIC = 8,
} SgStatus;

/**
 * Loaded, validated scene graph.
 */
typedef struct SgScene SgScene;

/**
 * Tool session bound to one scene, with its call trace.
 */
typedef struct SgSession SgSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into this library from the same thread.
 */
const char *sg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Loads and validates a scene file.
 */
enum SgStatus sg_scene_load(const char *path, struct SgScene **out);

/**
 * Loads and validates a scene from JSON text.
 */
enum SgStatus sg_scene_load_json(const char *json, struct SgScene **out);

/**
 * Releases a scene. Sessions created from it stay valid. NULL is a no-op.
 */
void sg_scene_free(struct SgScene *scene);

/**
 * Number of structural violations (0 for any scene this library loaded).
 */
enum SgStatus sg_scene_validate(const struct SgScene *scene, size_t *out_violations);

/**
 * Scene context table as text.
 */
enum SgStatus sg_scene_context(const struct SgScene *scene, char **out);

/**
 * Opens a session bound to `scene` under the id `scene_id`.
 */
enum SgStatus sg_session_new(const struct SgScene *scene,
                             const char *scene_id,
                             struct SgSession **out);

void sg_session_free(struct SgSession *session);

/**
 * Calls a tool with JSON arguments. On success `*out_json` holds the
 * result; on `SG_STATUS_TOOL_ERROR` it holds `{"code", "message"}`.
 */
enum SgStatus sg_session_call(struct SgSession *session,
                              const char *tool,
                              const char *args_json,
                              char **out_json);

/**
 * Handles one protocol request line and returns the response line.
 * Protocol-level failures are reported inside the response, not as status.
 */
enum SgStatus sg_session_handle_line(struct SgSession *session, const char *line, char **out_line);

/**
 * Call trace so far as a JSON array of entries.
 */
enum SgStatus sg_session_trace(const struct SgSession *session, char **out_json);

/**
 * Releases a string returned by this library. NULL is a no-op.
 */
void sg_string_free(char *s);

/**
 * Mean relative accuracy of `pred` against a positive `gt`.
 */
enum SgStatus sg_score_numeric(double pred, double gt, double *out_score);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGTOOLS_H */
