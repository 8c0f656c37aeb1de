/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SUMOFDM_H
#define SUMOFDM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SumStatus {
  SUM_STATUS_OK = 0,
  SUM_STATUS_NULL_POINTER = 1,
  SUM_STATUS_CONFIG = 2,
  SUM_STATUS_DOMAIN = 3,
  SUM_STATUS_CODEC = 4,
  SUM_STATUS_ILLEGAL_COMBINATION = 5,
  SUM_STATUS_SIZE = 6,
  SUM_STATUS_SYNC_FAILURE = 7,
  SUM_STATUS_PARSE = 8,
  SUM_STATUS_IO = 9,
  // A string argument was not valid UTF-8.
  SUM_STATUS_UTF8 = 10,
  // A Rust panic was caught at the boundary.
  SUM_STATUS_PANIC = 11,
} SumStatus;

// Detector selection for [`sum_detector_new`].
typedef enum SumDetectorKind {
  // Exhaustive search over the subblock codebook.
  SUM_DETECTOR_KIND_ML = 0,
  // Reduced-complexity detector with max-log combining.
  SUM_DETECTOR_KIND_LLR_MAX_LOG = 1,
  // Reduced-complexity detector with exact log-sum combining.
  SUM_DETECTOR_KIND_LLR_JACOBIAN = 2,
} SumDetectorKind;

// Experiment selection for [`sum_experiment_run`].
typedef enum SumRunKind {
  SUM_RUN_KIND_BER = 0,
  SUM_RUN_KIND_BOUND = 1,
  SUM_RUN_KIND_SYNC_DEMO = 2,
} SumRunKind;

// Subblock encoder for one `(modes, n, q)` configuration.
typedef struct SumCodec SumCodec;

// Subblock detector bound to a codec.
typedef struct SumDetector SumDetector;

// Experiment description, built from `key=value` text.
typedef struct SumExperiment SumExperiment;

// Owned NUL-terminated text returned by the library.
typedef struct SumText SumText;

// One complex sample, laid out as two doubles.
typedef struct SumComplex {
  double re;
  double im;
} SumComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread; never null.
const char *sum_last_error(void);

// Library version as a static string.
const char *sum_version(void);

// Creates a codec for `modes` constellation modes of size `q` on subblocks
// of `n` subcarriers, with the built-in mode partition.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SumStatus sum_codec_new(size_t modes, size_t n, size_t q, struct SumCodec **out);

// # Safety
// `codec` must come from [`sum_codec_new`] and not be used afterwards.
void sum_codec_free(struct SumCodec *codec);

// Bits per subblock: total `p`, index bits `p1`, data bits `p2`.
//
// # Safety
// `codec` must be a live handle; the outputs may be null.
enum SumStatus sum_codec_bits(const struct SumCodec *codec, size_t *p, size_t *p1, size_t *p2);

// Subblock length `n`.
//
// # Safety
// `codec` must be a live handle or null (returns 0).
size_t sum_codec_subcarriers(const struct SumCodec *codec);

// Maps `bits_len == p` bits (each 0 or 1) to `out_len == n` subcarrier values.
//
// # Safety
// `bits` and `out` must point to arrays of the given lengths.
enum SumStatus sum_codec_encode(const struct SumCodec *codec,
                                const uint8_t *bits,
                                size_t bits_len,
                                struct SumComplex *out,
                                size_t out_len);

// Creates a detector for `codec`. The codec may be freed afterwards.
//
// # Safety
// `codec` must be a live handle and `out` writable.
enum SumStatus sum_detector_new(const struct SumCodec *codec,
                                enum SumDetectorKind kind,
                                struct SumDetector **out);

// # Safety
// `det` must come from [`sum_detector_new`] and not be used afterwards.
void sum_detector_free(struct SumDetector *det);

// Detects one subblock from observations `y` and channel gains `c`
// (`len == n` each) at noise variance `n0`, writing `p` bits. `cm_count`
// receives the complex multiplications spent and may be null.
//
// A detector handle is not safe for concurrent use; create one per thread.
//
// # Safety
// All pointers must reference arrays of the stated lengths.
enum SumStatus sum_detector_detect(struct SumDetector *det,
                                   const struct SumComplex *y,
                                   const struct SumComplex *c,
                                   size_t len,
                                   double n0,
                                   uint8_t *bits_out,
                                   size_t bits_len,
                                   uint64_t *cm_count);

// Creates an experiment from `key=value` lines (`#` starts a comment).
// An empty string gives the defaults.
//
// # Safety
// `config` must be a NUL-terminated string and `out` writable.
enum SumStatus sum_experiment_new(const char *config, struct SumExperiment **out);

// # Safety
// `exp` must come from [`sum_experiment_new`] and not be used afterwards.
void sum_experiment_free(struct SumExperiment *exp);

// Overrides one key, as in the configuration text.
//
// # Safety
// `exp` must be live; `key` and `value` NUL-terminated.
enum SumStatus sum_experiment_set(struct SumExperiment *exp, const char *key, const char *value);

// Worker threads for subsequent runs; 0 uses every core. Results do not
// depend on this value.
//
// # Safety
// `exp` must be live.
enum SumStatus sum_experiment_set_workers(struct SumExperiment *exp, size_t workers);

// Runs the experiment and returns its CSV output as a text handle.
//
// # Safety
// `exp` must be live and `out` writable.
enum SumStatus sum_experiment_run(const struct SumExperiment *exp,
                                  enum SumRunKind kind,
                                  struct SumText **out);

// NUL-terminated contents, valid while the handle lives.
//
// # Safety
// `text` must be a live handle or null (returns null).
const char *sum_text_data(const struct SumText *text);

// Length in bytes, excluding the terminator.
//
// # Safety
// `text` must be a live handle or null (returns 0).
size_t sum_text_len(const struct SumText *text);

// # Safety
// `text` must come from this library and not be used afterwards.
void sum_text_free(struct SumText *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUMOFDM_H */
