#ifndef FRAISSE_H
#define FRAISSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrStatus {
  FR_STATUS_OK = 0,
  FR_STATUS_NULL_POINTER = 1,
  FR_STATUS_INVALID_UTF8 = 2,
  FR_STATUS_PARSE = 3,
  FR_STATUS_INVALID_INPUT = 4,
  FR_STATUS_IO = 5,
  FR_STATUS_PANIC = 6,
} FrStatus;

/**
 * Opaque finite structure.
 */
typedef struct FrStructure FrStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after success.
 * Valid until the next call on the same thread.
 */
const char *fr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fr_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void fr_string_free(char *s);

/**
 * Parses a structure in the text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FrStatus fr_structure_parse(const char *text, struct FrStructure **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, freed at most once.
 */
void fr_structure_free(struct FrStructure *s);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum FrStatus fr_structure_size(const struct FrStructure *s, size_t *out);

/**
 * Text form of `s`; free with `fr_string_free`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum FrStatus fr_structure_to_text(const struct FrStructure *s, char **out);

/**
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum FrStatus fr_isomorphic(const struct FrStructure *a, const struct FrStructure *b, bool *out);

/**
 * Disjoint union of `a` and `b` with no relations between them.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum FrStatus fr_free_join(const struct FrStructure *a,
                           const struct FrStructure *b,
                           struct FrStructure **out);

/**
 * Number of embeddings of `pattern` into `host`.
 *
 * # Safety
 * `host` and `pattern` must be live handles; `out` must be writable.
 */
enum FrStatus fr_count_embeddings(const struct FrStructure *host,
                                  const struct FrStructure *pattern,
                                  size_t *out);

/**
 * Class-property report as JSON. `class` is a builtin class name or a
 * path to a class file.
 *
 * # Safety
 * `class` must be a NUL-terminated string; `out` must be writable.
 */
enum FrStatus fr_check_class_json(const char *class_, size_t max_size, char **out);

/**
 * Runs a `[null-witness]` config and returns the report as JSON.
 * `negative` (optional) is set when the outcome is insufficient copies.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out` must be writable;
 * `negative` must be null or writable.
 */
enum FrStatus fr_null_witness_json(const char *config, uint64_t seed, char **out, bool *negative);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAISSE_H */
