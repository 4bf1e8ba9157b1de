/* C interface to the fictdet library.
 *
 * Every function that can fail returns an fd_status; on failure the message
 * is available from fd_last_error() on the calling thread until the next
 * call. Strings returned through char** out-parameters are owned by the
 * caller and released with fd_string_free(). Handles are opaque and released
 * with their matching *_free function; passing NULL to a free function is a
 * no-op. */
#ifndef FICTDET_H
#define FICTDET_H

#include <stddef.h>
#include <stdint.h>

#if defined(FICTDET_BUILDING_LIBRARY)
#define FD_API __attribute__((visibility("default")))
#else
#define FD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fd_status {
  FD_OK = 0,
  FD_ERR_INVALID_ARGUMENT = 1,
  FD_ERR_IO = 2,
  FD_ERR_PARSE = 3,
  FD_ERR_VOCABULARY_MISMATCH = 4,
  FD_ERR_NUMERIC = 5,
  FD_ERR_TRANSPORT = 6,
  FD_ERR_MISSING_INPUT = 7,
  FD_ERR_INTERNAL = 8
} fd_status;

typedef enum fd_model_kind { FD_MODEL_LINEAR = 0, FD_MODEL_LOGREG = 1, FD_MODEL_NB = 2 } fd_model_kind;

typedef struct fd_dataset fd_dataset;
typedef struct fd_model fd_model;
typedef struct fd_stats fd_stats;

FD_API const char* fd_version(void);
FD_API const char* fd_last_error(void);
FD_API const char* fd_status_name(fd_status status);
FD_API void fd_string_free(char* s);

/* Text processing. fd_tokenize returns the tokens joined by single spaces
 * (tokens never contain whitespace). */
FD_API fd_status fd_normalize_punctuation(const char* text, char** out);
FD_API fd_status fd_tokenize(const char* text, char** out, size_t* n_tokens);
FD_API fd_status fd_clean_source(const char* raw_text, char** out);
FD_API fd_status fd_build_prompt(const char* excerpt, char** out);

/* Datasets. */
FD_API fd_status fd_dataset_load(const char* path, fd_dataset** out);
FD_API fd_status fd_dataset_parse(const char* contents, fd_dataset** out);
FD_API fd_status fd_dataset_save(const fd_dataset* dataset, const char* path);
FD_API size_t fd_dataset_size(const fd_dataset* dataset);
/* Borrowed pointers valid until the dataset is freed; any out-pointer may be NULL. */
FD_API fd_status fd_dataset_get(const fd_dataset* dataset, size_t index, const char** id, const char** text,
                                int* label, const char** source);
FD_API void fd_dataset_free(fd_dataset* dataset);

FD_API fd_status fd_chunk_text(const char* clean_text, uint64_t seed, int min_words, int max_words,
                               const char* id_prefix, const char* source, fd_dataset** out);
FD_API fd_status fd_split_dataset(const fd_dataset* dataset, double train_ratio, double validation_ratio,
                                  double test_ratio, uint64_t seed, fd_dataset** train, fd_dataset** validation,
                                  fd_dataset** test);
/* Mean and population standard deviation of token counts for one class. */
FD_API fd_status fd_length_stats(const fd_dataset* dataset, int label, double* mean_tokens, double* std_tokens);

/* Models. validation is required for FD_MODEL_LINEAR and ignored otherwise. */
FD_API fd_status fd_model_train(fd_model_kind kind, const fd_dataset* train, const fd_dataset* validation,
                                uint64_t seed, fd_model** out);
FD_API fd_status fd_model_load(const char* path, fd_model** out);
FD_API fd_status fd_model_save(const fd_model* model, const char* path);
FD_API fd_model_kind fd_model_get_kind(const fd_model* model);
FD_API size_t fd_model_vocabulary_size(const fd_model* model);
/* Weight of a token (linear kinds only); 0 with FD_OK for out-of-vocabulary tokens. */
FD_API fd_status fd_model_weight(const fd_model* model, const char* token, double* weight);
FD_API fd_status fd_model_score_text(const fd_model* model, const char* text, double* score, int* label);
FD_API fd_status fd_model_evaluate(const fd_model* model, const fd_dataset* data, double* accuracy);
/* Self-contained HTML report for one text (linear kinds only). */
FD_API fd_status fd_model_explain_html(const fd_model* model, const char* text, const char* sample_id, char** html);
FD_API void fd_model_free(fd_model* model);

/* Per-class relative frequencies over a training set. */
FD_API fd_status fd_stats_compute(const fd_dataset* train, fd_stats** out);
FD_API size_t fd_stats_size(const fd_stats* stats);
FD_API fd_status fd_stats_get(const fd_stats* stats, size_t index, const char** token, double* f0, double* f1,
                              double* ratio);
FD_API fd_status fd_stats_select_count(const fd_stats* stats, double threshold_f, double threshold_r, size_t* count);
FD_API void fd_stats_free(fd_stats* stats);

/* Shannon entropy in bits of all tokens of one class. */
FD_API fd_status fd_class_entropy(const fd_dataset* dataset, int label, double* bits);

/* Runs one named stage with string parameters; the JSON summary (with
 * "inputs" and "outputs") is returned in *report_json when non-NULL. */
FD_API fd_status fd_stage_run(const char* stage, const char* const* keys, const char* const* values, size_t n,
                              char** report_json);
/* Runs a pipeline config file and returns its manifest as JSON. */
FD_API fd_status fd_pipeline_run(const char* config_path, int force, char** manifest_json);

#ifdef __cplusplus
}
#endif

#endif /* FICTDET_H */
