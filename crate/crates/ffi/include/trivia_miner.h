#ifndef TRIVIA_MINER_H
#define TRIVIA_MINER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TmEmbeddingFormat {
  TM_EMBEDDING_FORMAT_TEXT = 0,
  TM_EMBEDDING_FORMAT_BINARY = 1,
} TmEmbeddingFormat;

// Result of every call.
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  // Unreadable or malformed input file.
  TM_STATUS_IO = 2,
  // Unknown article or category, or no answer for it.
  TM_STATUS_LOOKUP = 3,
  // Invalid configuration value.
  TM_STATUS_CONFIG = 4,
  TM_STATUS_NULL_ARGUMENT = 10,
  TM_STATUS_INVALID_UTF8 = 11,
  // Internal error; the session should not be used further.
  TM_STATUS_PANIC = 12,
} TmStatus;

// Loaded corpus, embeddings and similarity cache.
typedef struct TmSession TmSession;

// Tunables for [`tm_session_open`]. Start from [`tm_config_default`].
typedef struct TmConfig {
  size_t k;
  uint64_t min_df;
  size_t sample_cap;
  uint64_t seed;
  size_t workers;
  enum TmEmbeddingFormat embeddings_format;
  // Non-zero to drop categories scoring below `threshold`.
  int32_t use_threshold;
  double threshold;
} TmConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct TmConfig tm_config_default(void);

// Open a session.
//
// `corpus` and `embeddings` are required. `idf_corpus`, `index`,
// `stopwords` and `cache` may be NULL. `config` may be NULL for defaults.
// On success `*out` owns a session to be released with [`tm_session_free`].
//
// # Safety
// Non-NULL string arguments must be valid NUL-terminated strings and `out`
// must be valid for writes.
enum TmStatus tm_session_open(const char *corpus,
                              const char *idf_corpus,
                              const char *index,
                              const char *stopwords,
                              const char *cache,
                              const char *embeddings,
                              const struct TmConfig *config,
                              struct TmSession **out);

// Release a session. NULL is ignored.
//
// # Safety
// `session` must come from [`tm_session_open`] and not be used afterwards.
void tm_session_free(struct TmSession *session);

// Similarity of two articles, in [-1, 1].
//
// # Safety
// Pointers must be valid; `out` must be valid for writes.
enum TmStatus tm_similarity(const struct TmSession *session,
                            const char *first,
                            const char *second,
                            double *out);

// Ranked categories of an article as JSON Lines, best first.
//
// # Safety
// Pointers must be valid; free `*out` with [`tm_string_free`].
enum TmStatus tm_top_trivia(const struct TmSession *session, const char *article, char **out);

// Members of a category as JSON Lines, most surprising first.
//
// # Safety
// Pointers must be valid; free `*out` with [`tm_string_free`].
enum TmStatus tm_outliers(const struct TmSession *session, const char *category, char **out);

// The paragraph of an article closest to a category title, as one JSON
// object with fields `paragraph`, `score` and `text`.
//
// # Safety
// Pointers must be valid; free `*out` with [`tm_string_free`].
enum TmStatus tm_explain(const struct TmSession *session,
                         const char *article,
                         const char *category,
                         char **out);

// Write the similarity cache to the file given at open time, if any.
//
// # Safety
// `session` must be valid.
enum TmStatus tm_session_save_cache(const struct TmSession *session);

// Release a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void tm_string_free(char *s);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into the library on the same thread.
const char *tm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIVIA_MINER_H */
