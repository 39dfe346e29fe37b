#ifndef VARDEF_H
#define VARDEF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VardefClass {
  VARDEF_CLASS_TRUE_POSITIVE = 0,
  VARDEF_CLASS_FP1_WIDE = 1,
  VARDEF_CLASS_FP1_NARROW = 2,
  VARDEF_CLASS_FP1_OTHER = 3,
  VARDEF_CLASS_FP2 = 4,
  VARDEF_CLASS_FALSE_NEGATIVE = 5,
  VARDEF_CLASS_TRUE_NEGATIVE = 6,
} VardefClass;

typedef enum VardefStatus {
  VARDEF_STATUS_OK = 0,
  VARDEF_STATUS_NULL_POINTER = 1,
  VARDEF_STATUS_INVALID_UTF8 = 2,
  VARDEF_STATUS_IO = 3,
  VARDEF_STATUS_PARSE = 4,
  VARDEF_STATUS_VALIDATION = 5,
  VARDEF_STATUS_INFEASIBLE = 6,
  VARDEF_STATUS_USAGE = 7,
  VARDEF_STATUS_INTERNAL = 8,
} VardefStatus;

/**
 * Opaque corpus handle.
 */
typedef struct VardefCorpus VardefCorpus;

/**
 * Opaque template-set handle.
 */
typedef struct VardefTemplateSet VardefTemplateSet;

typedef struct VardefStats {
  uint64_t num_docs;
  uint64_t num_variables;
  uint64_t num_with_definition;
} VardefStats;

/**
 * Decoder output. `start` and `end` are inclusive 1-based token positions
 * and are 0 when `no_definition` is set.
 */
typedef struct VardefDecoded {
  bool no_definition;
  uint64_t start;
  uint64_t end;
  double score;
} VardefDecoded;

/**
 * Half-open character interval.
 */
typedef struct VardefSpan {
  uint64_t start;
  uint64_t end;
} VardefSpan;

typedef struct VardefCounts {
  uint64_t tp;
  uint64_t fp1_wide;
  uint64_t fp1_narrow;
  uint64_t fp1_other;
  uint64_t fp2;
  uint64_t fn_;
  uint64_t tn;
} VardefCounts;

/**
 * Each ratio is meaningful only when its `*_defined` flag is set; an
 * undefined ratio (zero denominator) is reported as 0.
 */
typedef struct VardefMetrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
  bool accuracy_defined;
  bool precision_defined;
  bool recall_defined;
  bool f1_defined;
} VardefMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *vardef_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *vardef_last_error_message(void);

/**
 * Loads and validates a JSONL corpus.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum VardefStatus vardef_corpus_load(const char *path, struct VardefCorpus **out);

/**
 * # Safety
 * `corpus` must come from this library; `path` must be NUL-terminated.
 */
enum VardefStatus vardef_corpus_save(const struct VardefCorpus *corpus, const char *path);

/**
 * # Safety
 * `corpus` must come from this library and `out` must be writable.
 */
enum VardefStatus vardef_corpus_stats(const struct VardefCorpus *corpus, struct VardefStats *out);

/**
 * Stats restricted to one process tag; all zero when the tag is absent.
 *
 * # Safety
 * `corpus` must come from this library, `process` must be NUL-terminated
 * and `out` writable.
 */
enum VardefStatus vardef_corpus_process_stats(const struct VardefCorpus *corpus,
                                              const char *process,
                                              struct VardefStats *out);

/**
 * # Safety
 * `corpus` must come from this library and not be used afterwards. NULL
 * is ignored.
 */
void vardef_corpus_free(struct VardefCorpus *corpus);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
enum VardefStatus vardef_templates_load(const char *path, struct VardefTemplateSet **out);

/**
 * Number of templates, or 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or come from this library.
 */
size_t vardef_templates_len(const struct VardefTemplateSet *set);

/**
 * Writes the definition-slot histogram (buckets 0..=6) into `out`, which
 * must hold 7 values.
 *
 * # Safety
 * `set` must come from this library and `out` must point to 7 writable u64.
 */
enum VardefStatus vardef_templates_histogram(const struct VardefTemplateSet *set, uint64_t *out);

/**
 * # Safety
 * `set` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void vardef_templates_free(struct VardefTemplateSet *set);

/**
 * Generates a template corpus from the definition pairs of `source`.
 *
 * # Safety
 * Handles must come from this library and `out` must be writable.
 */
enum VardefStatus vardef_augment(const struct VardefCorpus *source,
                                 const struct VardefTemplateSet *templates,
                                 uint64_t seed,
                                 struct VardefCorpus **out);

/**
 * Best span for one pair of score vectors of length `len`.
 *
 * # Safety
 * `s_start` and `s_end` must each point to `len` readable doubles and
 * `out` must be writable.
 */
enum VardefStatus vardef_decode(const double *s_start,
                                const double *s_end,
                                size_t len,
                                struct VardefDecoded *out);

/**
 * Classifies a prediction against gold. NULL `gold` or `predicted` means
 * absent.
 *
 * # Safety
 * Non-NULL span pointers must be readable and `out` writable.
 */
enum VardefStatus vardef_classify(const struct VardefSpan *gold,
                                  const struct VardefSpan *predicted,
                                  enum VardefClass *out);

/**
 * # Safety
 * `counts` must be readable and `out` writable.
 */
enum VardefStatus vardef_metrics(const struct VardefCounts *counts, struct VardefMetrics *out);

/**
 * Simpson coefficient between the definition vocabularies of two corpora
 * with the default stop words. `*defined` is false when either vocabulary
 * is empty.
 *
 * # Safety
 * Handles must come from this library; `out` and `defined` must be writable.
 */
enum VardefStatus vardef_simpson(const struct VardefCorpus *a,
                                 const struct VardefCorpus *b,
                                 double *out,
                                 bool *defined);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARDEF_H */
