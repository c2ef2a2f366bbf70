#ifndef DYADLAB_H
#define DYADLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DyadStatus {
  DYAD_STATUS_OK = 0,
  DYAD_STATUS_NULL_POINTER = 1,
  DYAD_STATUS_INVALID_ARGUMENT = 2,
  DYAD_STATUS_IO = 3,
  DYAD_STATUS_FORMAT = 4,
  DYAD_STATUS_PRECONDITION = 5,
  DYAD_STATUS_BUFFER_TOO_SMALL = 6,
  DYAD_STATUS_PANIC = 7,
} DyadStatus;

/**
 * A dyadic cell set.
 */
typedef struct DyadCellSet DyadCellSet;

/**
 * A parsed pair-selection instance.
 */
typedef struct DyadSelection DyadSelection;

typedef struct DyadDimensionEstimate {
  double slope;
  double stderr;
  double intercept;
  double min_step_slope;
} DyadDimensionEstimate;

typedef struct DyadBoundPoint {
  double s;
  double ours;
  double sw;
  double fs;
} DyadBoundPoint;

/**
 * One sector of an annulus intersection cover. Angles are in turns.
 */
typedef struct DyadArc {
  double start;
  double length;
  double arc_length;
} DyadArc;

typedef struct DyadPair {
  size_t u;
  size_t v;
  size_t witnesses;
} DyadPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread. Valid until the next call
 * into this library from the same thread.
 */
const char *dyad_last_error(void);

/**
 * Digit Cantor set in base `2^digit_bits` at precision `depth`.
 *
 * # Safety
 * `digits` must point to `n_digits` values; `out` must be writable.
 */
enum DyadStatus dyad_cellset_cantor(uint32_t digit_bits,
                                    const uint32_t *digits,
                                    size_t n_digits,
                                    uint32_t depth,
                                    struct DyadCellSet **out);

/**
 * Product of a digit Cantor set with itself.
 *
 * # Safety
 * As [`dyad_cellset_cantor`].
 */
enum DyadStatus dyad_cellset_cantor_product(uint32_t digit_bits,
                                            const uint32_t *digits,
                                            size_t n_digits,
                                            uint32_t depth,
                                            struct DyadCellSet **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DyadStatus dyad_cellset_square(uint32_t depth, struct DyadCellSet **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DyadStatus dyad_cellset_segment(uint32_t depth, struct DyadCellSet **out);

/**
 * Seeded random tree with target dimension `dim` in ambient dimension 1 or 2.
 *
 * # Safety
 * `out` must be writable.
 */
enum DyadStatus dyad_cellset_random_tree(double dim,
                                         uint32_t ambient,
                                         uint64_t seed,
                                         uint32_t depth,
                                         struct DyadCellSet **out);

/**
 * Reads a DYCS file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DyadStatus dyad_cellset_read(const char *path, struct DyadCellSet **out);

/**
 * Writes a DYCS file.
 *
 * # Safety
 * `set` must be a live handle; `path` a NUL-terminated string.
 */
enum DyadStatus dyad_cellset_write(const struct DyadCellSet *set, const char *path);

/**
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_cellset_len(const struct DyadCellSet *set, size_t *out);

/**
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_cellset_precision(const struct DyadCellSet *set, uint32_t *out);

/**
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_cellset_ambient_dim(const struct DyadCellSet *set, uint32_t *out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void dyad_cellset_free(struct DyadCellSet *set);

/**
 * `log2` of the number of occupied cells at precision `r`.
 *
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_surrogate_bits(const struct DyadCellSet *set, uint32_t r, double *out);

/**
 * Least-squares box-dimension slope over precisions `lo..=hi`.
 *
 * # Safety
 * `set` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_dimension_estimate(const struct DyadCellSet *set,
                                        uint32_t lo,
                                        uint32_t hi,
                                        struct DyadDimensionEstimate *out);

/**
 * The three pinned-distance lower bounds at `s` in `(0, 1]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum DyadStatus dyad_bound_curve_point(double s, struct DyadBoundPoint *out);

/**
 * Covers the intersection of two annuli by sectors of the first. Writes at
 * most `capacity` arcs to `out` and the full count to `count`; returns
 * `DYAD_STATUS_BUFFER_TOO_SMALL` when the buffer is short.
 *
 * # Safety
 * `out` must point to `capacity` writable arcs (may be null when
 * `capacity` is 0); `count` must be writable.
 */
enum DyadStatus dyad_annulus_cover(double c1_x,
                                   double c1_y,
                                   double radius1,
                                   double eps1,
                                   double c2_x,
                                   double c2_y,
                                   double radius2,
                                   double eps2,
                                   struct DyadArc *out,
                                   size_t capacity,
                                   size_t *count);

/**
 * Mantissas of the floor of `(x, y)` on the grid of spacing `2^-r`.
 *
 * # Safety
 * `mx` and `my` must be writable.
 */
enum DyadStatus dyad_floor_point(double x, double y, uint32_t r, int64_t *mx, int64_t *my);

/**
 * Parses an instance in the plain-text interchange format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` writable.
 */
enum DyadStatus dyad_selection_parse(const char *text, struct DyadSelection **out);

/**
 * Whether the neighborhood-size and similarity-cap hypotheses hold. The
 * first violation, if any, is left in `dyad_last_error`.
 *
 * # Safety
 * `sel` must be a live handle; `out` writable.
 */
enum DyadStatus dyad_selection_hypotheses_hold(const struct DyadSelection *sel, bool *out);

/**
 * Lexicographically least qualifying pair. `found` is false when there is none.
 *
 * # Safety
 * `sel` must be a live handle; `pair` and `found` writable.
 */
enum DyadStatus dyad_selection_find_pair(const struct DyadSelection *sel,
                                         struct DyadPair *pair,
                                         bool *found);

/**
 * # Safety
 * `sel` must be null or a handle not yet freed.
 */
void dyad_selection_free(struct DyadSelection *sel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYADLAB_H */
