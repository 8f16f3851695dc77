#ifndef THINORBITS_H
#define THINORBITS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ThinorbitsStatus {
  THINORBITS_STATUS_OK = 0,
  THINORBITS_STATUS_NULL_ARGUMENT = 1,
  THINORBITS_STATUS_INVALID_UTF8 = 2,
  THINORBITS_STATUS_PARSE = 3,
  THINORBITS_STATUS_OUT_OF_RANGE = 4,
  THINORBITS_STATUS_PANIC = 5,
  THINORBITS_STATUS_SQUARE_DISCRIMINANT = 10,
  THINORBITS_STATUS_INVALID_DIGIT = 11,
  THINORBITS_STATUS_NOT_PROPER = 12,
  THINORBITS_STATUS_LEADING_ZERO = 13,
  THINORBITS_STATUS_WRONG_SIGN = 14,
  THINORBITS_STATUS_BAD_DISCRIMINANT = 15,
  THINORBITS_STATUS_IMPRIMITIVE = 16,
  THINORBITS_STATUS_NOT_HYPERBOLIC = 17,
  THINORBITS_STATUS_PARABOLIC_AXIS = 18,
  THINORBITS_STATUS_DEGENERATE_HIT = 19,
  THINORBITS_STATUS_BAD_GRID = 20,
  THINORBITS_STATUS_BAD_BOUND = 21,
  THINORBITS_STATUS_BAD_LENGTH = 22,
  THINORBITS_STATUS_ZERO_FUNCTIONAL = 23,
  THINORBITS_STATUS_BAD_KERNEL = 24,
  THINORBITS_STATUS_OVERFLOW = 25,
  THINORBITS_STATUS_CONFIG = 26,
  THINORBITS_STATUS_NOT_FOUND = 27,
} ThinorbitsStatus;

// Narrow classes of primitive forms of one discriminant.
typedef struct ThinorbitsClassGroup ThinorbitsClassGroup;

// Fundamental solution of `t^2 - D s^2 = sign * 4`.
typedef struct ThinorbitsPell ThinorbitsPell;

// `(P + sqrt D) / Q`.
typedef struct ThinorbitsSurd ThinorbitsSurd;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next
// call into the library from the same thread.
const char *thinorbits_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void thinorbits_string_free(char *s);

// # Safety
// `p`, `q`, `d` must be nul-terminated strings; `out` must be writable.
enum ThinorbitsStatus thinorbits_surd_new(const char *p,
                                          const char *q,
                                          const char *d,
                                          struct ThinorbitsSurd **out);

// # Safety
// `h` must be null or a live handle from [`thinorbits_surd_new`].
void thinorbits_surd_free(struct ThinorbitsSurd *h);

// Truncated decimal expansion with `digits` places.
//
// # Safety
// `h` must be a live surd handle; `out` must be writable.
enum ThinorbitsStatus thinorbits_surd_decimal(const struct ThinorbitsSurd *h,
                                              uint32_t digits,
                                              char **out);

// Continued fraction in the form `[a0;a1,...,(b1,...,bk)]`.
//
// # Safety
// `h` must be a live surd handle; `out` must be writable.
enum ThinorbitsStatus thinorbits_surd_continued_fraction(const struct ThinorbitsSurd *h,
                                                         char **out);

// # Safety
// `d` must be a nul-terminated string; `out` must be writable.
enum ThinorbitsStatus thinorbits_class_group_new(const char *d, struct ThinorbitsClassGroup **out);

// # Safety
// `h` must be null or a live class group handle.
void thinorbits_class_group_free(struct ThinorbitsClassGroup *h);

// Class number; 0 for a null handle.
//
// # Safety
// `h` must be null or a live class group handle.
uintptr_t thinorbits_class_group_h(const struct ThinorbitsClassGroup *h);

// Representative of class `i` as `[A,B,C]`.
//
// # Safety
// `h` must be a live class group handle; `out` must be writable.
enum ThinorbitsStatus thinorbits_class_group_rep(const struct ThinorbitsClassGroup *h,
                                                 uintptr_t i,
                                                 char **out);

// Least solution with `sign = 4` or `sign = -4`. For `-4` without a solution the
// status is `NotFound`.
//
// # Safety
// `d` must be a nul-terminated string; `out` must be writable.
enum ThinorbitsStatus thinorbits_pell_solve(const char *d,
                                            int32_t sign,
                                            struct ThinorbitsPell **out);

// # Safety
// `h` must be null or a live Pell handle.
void thinorbits_pell_free(struct ThinorbitsPell *h);

// Writes `t` and `s` as decimal strings, each released with [`thinorbits_string_free`].
//
// # Safety
// `h` must be a live Pell handle; `t` and `s` must be writable.
enum ThinorbitsStatus thinorbits_pell_get(const struct ThinorbitsPell *h, char **t, char **s);

// Number of `Gamma_A` words with top-left entry at most `x`.
//
// # Safety
// `out` must be writable.
enum ThinorbitsStatus thinorbits_ball_count(uint32_t alphabet, uint64_t x, uint64_t *out);

// Least `b` with `b / d` having partial quotients at most `alphabet`. `NotFound`
// when `d` is an exception.
//
// # Safety
// `out` must be writable.
enum ThinorbitsStatus thinorbits_zaremba(uint64_t d, uint32_t alphabet, uint64_t *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* THINORBITS_H */
