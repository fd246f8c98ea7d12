#ifndef HUMBERT_H
#define HUMBERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HumbertStatus {
  HUMBERT_STATUS_OK = 0,
  HUMBERT_STATUS_NULL_POINTER = 1,
  HUMBERT_STATUS_INVALID_UTF8 = 2,
  HUMBERT_STATUS_UNKNOWN_FIELD = 3,
  HUMBERT_STATUS_INVALID_FIELD = 4,
  HUMBERT_STATUS_INVALID_ARGUMENT = 5,
  HUMBERT_STATUS_COMPUTATION = 6,
  HUMBERT_STATUS_PANIC = 7,
} HumbertStatus;

// Opaque handle to a validated quartic CM field.
typedef struct HumbertField HumbertField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Look up a bundled fixture such as "dt29".
//
// # Safety
// `name` must be a valid C string; `out` must be writable.
enum HumbertStatus humbert_field_from_fixture(const char *name, struct HumbertField **out);

// Build a field from eta^2 - (alpha0 + alpha1 w) eta + (beta0 + beta1 w) = 0
// over Q(sqrt d).
//
// # Safety
// `out` must be writable.
enum HumbertStatus humbert_field_from_generators(int64_t d,
                                                 int64_t alpha0,
                                                 int64_t alpha1,
                                                 int64_t beta0,
                                                 int64_t beta1,
                                                 struct HumbertField **out);

// # Safety
// `field` must come from this library and not be freed twice. Null is ignored.
void humbert_field_free(struct HumbertField *field);

// Discriminant D of the real quadratic subfield and the norm D~ of the
// relative discriminant.
//
// # Safety
// `field` must be a live handle; both out-pointers must be writable.
enum HumbertStatus humbert_field_invariants(const struct HumbertField *field,
                                            int64_t *disc,
                                            int64_t *dtilde);

// The Bruinier-Yang tally as JSON, e.g. {"5":"2"}.
//
// # Safety
// `field` must be a live handle; `out_json` must be writable.
enum HumbertStatus humbert_by_tally_json(const struct HumbertField *field,
                                         int64_t max_prime,
                                         bool correction_mod16,
                                         char **out_json);

// Number of embeddings up to isomorphism at the prime p.
//
// # Safety
// `field` must be a live handle; `out` must be writable.
enum HumbertStatus humbert_embedding_count(const struct HumbertField *field,
                                           int64_t p,
                                           uint64_t *out);

// Embedding counts for every prime up to `max_prime`, as JSON.
//
// # Safety
// `field` must be a live handle; `out_json` must be writable.
enum HumbertStatus humbert_embedding_tally_json(const struct HumbertField *field,
                                                int64_t max_prime,
                                                char **out_json);

// # Safety
// `s` must come from this library. Null is ignored.
void humbert_string_free(char *s);

// Message for the most recent failure on this thread, or null. Valid
// until the next failing call on the same thread.
const char *humbert_last_error(void);

// Static description of a status code.
const char *humbert_status_str(enum HumbertStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HUMBERT_H */
