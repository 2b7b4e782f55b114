#ifndef INNEO_H
#define INNEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call. Values mirror the HTTP error classes.
 */
typedef enum InneoStatus {
  INNEO_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  INNEO_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  INNEO_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed request: unknown route, kind, parameter or weights.
   */
  INNEO_STATUS_BAD_REQUEST = 3,
  /**
   * Unknown entity or area.
   */
  INNEO_STATUS_NOT_FOUND = 4,
  /**
   * Class change, duplicate layer or name collision.
   */
  INNEO_STATUS_CONFLICT = 5,
  /**
   * Schema violation or unparseable input.
   */
  INNEO_STATUS_INVALID = 6,
  /**
   * Result above the response cap.
   */
  INNEO_STATUS_TOO_LARGE = 7,
  INNEO_STATUS_IO = 8,
  /**
   * A bug: the call panicked. The store is left as it was before the call.
   */
  INNEO_STATUS_INTERNAL = 9,
} InneoStatus;

/**
 * Opaque store handle.
 */
typedef struct InneoStore InneoStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * New empty store using the base schema. Never returns null.
 */
struct InneoStore *inneo_store_new(void);

/**
 * Release a store. Null is ignored.
 *
 * # Safety
 * `store` must come from [`inneo_store_new`] and not be used afterwards.
 */
void inneo_store_free(struct InneoStore *store);

/**
 * Register an extension layer given as a JSON layer definition.
 *
 * # Safety
 * `store` must be a live handle; `layer_json` a NUL-terminated string.
 */
enum InneoStatus inneo_store_register_layer(struct InneoStore *store, const char *layer_json);

/**
 * Replace the store's contents with a canonical JSONL graph. On error the
 * store is unchanged.
 *
 * # Safety
 * `store` must be a live handle; `jsonl` a NUL-terminated string.
 */
enum InneoStatus inneo_store_load_jsonl(struct InneoStore *store, const char *jsonl);

/**
 * Ingest a CSV source. `kind` is one of `patents`, `articles`, `projects`,
 * `organizations`. On success `*report_out` receives the JSON ingest report.
 *
 * # Safety
 * `store` must be a live handle, `kind` NUL-terminated, `data` readable for
 * `len` bytes (it may be null when `len` is 0), `report_out` writable.
 */
enum InneoStatus inneo_ingest(struct InneoStore *store,
                              const char *kind,
                              const uint8_t *data,
                              size_t len,
                              char **report_out);

/**
 * Run a read given as an HTTP-style target, e.g.
 * `/query/funded-orgs?year=2000` or `/entities/org%3Aupm/neighbors`.
 * `*out` receives exactly the body the HTTP service would return.
 *
 * # Safety
 * `store` must be a live handle, `target` NUL-terminated, `out` writable.
 */
enum InneoStatus inneo_get(const struct InneoStore *store, const char *target, char **out);

/**
 * Explain how `src` relates to `dst`; `*out` receives the path as JSON.
 *
 * # Safety
 * `store` must be a live handle, `src`/`dst` NUL-terminated, `out` writable.
 */
enum InneoStatus inneo_explain_path(const struct InneoStore *store,
                                    const char *src,
                                    const char *dst,
                                    char **out);

/**
 * Canonical JSONL export of the current graph.
 *
 * # Safety
 * `store` must be a live handle and `out` writable.
 */
enum InneoStatus inneo_export_jsonl(const struct InneoStore *store, char **out);

/**
 * Delete an entity and its incident edges; `*out` receives
 * `{"id":…,"removed_edges":…}`.
 *
 * # Safety
 * `store` must be a live handle, `id` NUL-terminated, `out` writable.
 */
enum InneoStatus inneo_delete_entity(struct InneoStore *store, const char *id, char **out);

/**
 * Message for the last failed call on this thread, or null if the last
 * call succeeded. Valid until the next call on the same thread.
 */
const char *inneo_last_error_message(void);

/**
 * Stable error token (`UnknownEntity`, `SchemaViolation`, …) for the last
 * failed call on this thread, or null.
 */
const char *inneo_last_error_code(void);

/**
 * Release a string returned through an `out` parameter. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void inneo_string_free(char *s);

/**
 * Library version, statically allocated.
 */
const char *inneo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INNEO_H */
