/* gaitscreen: lameness screening from leg-mounted IMU recordings.
 *
 * Plain C interface over the C++ core. Objects are opaque handles created
 * and destroyed through this API. Every fallible call returns a gs_status;
 * on failure gs_last_error() describes the problem for the calling thread.
 * Strings returned as `const char*` are owned by the handle they came from
 * and stay valid until the next call on that handle or its destruction.
 */
#ifndef GAITSCREEN_GAITSCREEN_H
#define GAITSCREEN_GAITSCREEN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GAITSCREEN_BUILDING_DLL)
#    define GS_API __declspec(dllexport)
#  else
#    define GS_API __declspec(dllimport)
#  endif
#else
#  define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_INVALID_ARGUMENT,
  GS_IO,
  GS_WRONG_COLUMN_COUNT,
  GS_NON_MONOTONIC_TIME,
  GS_EMPTY_FILE,
  GS_MALFORMED_NAME,
  GS_SCORE_OUT_OF_RANGE,
  GS_BAD_TIMESTAMP,
  GS_CONFLICTING_SCORE,
  GS_EMPTY_DATASET,
  GS_UNKNOWN_COW,
  GS_EVEN_ORDER,
  GS_ORDER_EXCEEDS_LENGTH,
  GS_TOO_SHORT,
  GS_CUTOFF_OUT_OF_RANGE,
  GS_EMPTY_SIGNAL,
  GS_BAD_DIMENSIONS,
  GS_DIMENSION_MISMATCH,
  GS_SINGLE_CLASS,
  GS_NON_FINITE_FEATURE,
  GS_TOO_FEW_COWS,
  GS_EMPTY_CONFUSION,
  GS_BAD_SPEC,
  GS_CONFIG,
  GS_FORMAT,
  GS_INTERNAL = 100
} gs_status;

GS_API const char* gs_version(void);
GS_API const char* gs_status_name(gs_status status);
/* Message of the last failure on this thread; "" when none. */
GS_API const char* gs_last_error(void);

/* ---- configuration ---------------------------------------------------- */

typedef struct gs_config gs_config;

GS_API gs_status gs_config_create(gs_config** out);
GS_API void gs_config_destroy(gs_config* cfg);
GS_API gs_status gs_config_set(gs_config* cfg, const char* key, const char* value);
/* Copies the current value into buf (NUL-terminated, truncated to cap). */
GS_API gs_status gs_config_get(const gs_config* cfg, const char* key, char* buf, size_t cap);
GS_API gs_status gs_config_load_file(gs_config* cfg, const char* path);
GS_API gs_status gs_config_validate(const gs_config* cfg);
/* "key = value" lines for every key. */
GS_API const char* gs_config_render(gs_config* cfg);

GS_API size_t gs_config_key_count(void);
GS_API const char* gs_config_key_name(size_t i);
GS_API const char* gs_config_key_default(size_t i);
GS_API const char* gs_config_key_help(size_t i);

/* ---- synthetic data --------------------------------------------------- */

typedef enum gs_synth_preset {
  GS_SYNTH_DEFAULT = 0,
  GS_SYNTH_EASY,
  GS_SYNTH_NULL,
  GS_SYNTH_GYRO_ONLY
} gs_synth_preset;

typedef struct gs_synth_options {
  gs_synth_preset preset;
  uint64_t seed;
  /* Cows per lameness score 1..5; all zero selects the preset default
   * (19/7/6/6/5 for DEFAULT, 10 healthy and 10 lame otherwise). */
  size_t cows_per_score[5];
  size_t files_per_cow;
  size_t samples_per_file; /* 0 keeps the preset default */
  int significant_digits;  /* 0 keeps the default */
  unsigned jobs;
} gs_synth_options;

GS_API void gs_synth_options_init(gs_synth_options* opts);
/* Writes sample files and manifest.csv into out_dir. */
GS_API gs_status gs_synth_generate(const gs_synth_options* opts, const char* out_dir);

/* ---- dataset manifest ------------------------------------------------- */

typedef struct gs_manifest gs_manifest;

/* Scans root recursively for sample files. cfg may be NULL for defaults. */
GS_API gs_status gs_manifest_build(const char* root, const gs_config* cfg, gs_manifest** out);
GS_API void gs_manifest_destroy(gs_manifest* m);
GS_API size_t gs_manifest_file_count(const gs_manifest* m);
GS_API size_t gs_manifest_skipped_count(const gs_manifest* m);
GS_API size_t gs_manifest_cow_count(const gs_manifest* m);
GS_API const char* gs_manifest_cow_id(const gs_manifest* m, size_t i);
GS_API int gs_manifest_cow_score(const gs_manifest* m, size_t i);
/* Number of cows with lameness score 1..5. */
GS_API gs_status gs_manifest_score_histogram(const gs_manifest* m, size_t out[5]);
GS_API gs_status gs_manifest_write_csv(const gs_manifest* m, const char* path);
GS_API const char* gs_manifest_stats_text(gs_manifest* m);
GS_API gs_status gs_manifest_write_stats_csv(const gs_manifest* m, const char* path);

/* ---- features --------------------------------------------------------- */

typedef struct gs_features gs_features;

/* One 4440-wide row per cow (12 channels x 370). */
GS_API gs_status gs_features_extract(const gs_manifest* m, const gs_config* cfg, gs_features** out);
GS_API gs_status gs_features_load_csv(const char* path, gs_features** out);
GS_API void gs_features_destroy(gs_features* f);
GS_API gs_status gs_features_write_csv(const gs_features* f, const char* path);
GS_API size_t gs_features_rows(const gs_features* f);
GS_API size_t gs_features_cols(const gs_features* f);
GS_API const double* gs_features_row(const gs_features* f, size_t i);
GS_API const char* gs_features_cow_id(const gs_features* f, size_t i);
GS_API int gs_features_score(const gs_features* f, size_t i);

/* ---- binary classifier ------------------------------------------------ */

typedef struct gs_model gs_model;

/* Healthy (score 1) = +1, lame = -1, on the columns selected by the
 * configured channel group and feature family. */
GS_API gs_status gs_model_train(const gs_features* f, const gs_config* cfg, gs_model** out);
GS_API gs_status gs_model_save(const gs_model* model, const char* path);
GS_API gs_status gs_model_load(const char* path, gs_model** out);
GS_API void gs_model_destroy(gs_model* model);
/* Decision value for a full 4440-wide feature row. */
GS_API gs_status gs_model_decision(const gs_model* model, const double* row, size_t n, double* out);
/* CSV cow_id,score,decision,predicted (1 healthy, -1 lame). */
GS_API gs_status gs_model_predict_csv(const gs_model* model, const gs_features* f, const char* path);

/* ---- evaluation ------------------------------------------------------- */

typedef enum gs_protocol {
  GS_PROTOCOL_SPLITS = 1,   /* repeated healthy/lame splits */
  GS_PROTOCOL_ABLATION = 2, /* per channel group and feature family */
  GS_PROTOCOL_MULTICLASS = 3
} gs_protocol;

typedef enum gs_scenario { GS_WORST = 0, GS_AVERAGE = 1, GS_BEST = 2 } gs_scenario;

typedef enum gs_metric {
  GS_METRIC_TP = 0,
  GS_METRIC_FP,
  GS_METRIC_FN,
  GS_METRIC_TN,
  GS_METRIC_PRECISION,
  GS_METRIC_SENSITIVITY,
  GS_METRIC_SPECIFICITY,
  GS_METRIC_ACCURACY
} gs_metric;

typedef struct gs_report gs_report;

GS_API gs_status gs_evaluate(const gs_features* f, const gs_config* cfg, gs_protocol protocol, gs_report** out);
GS_API void gs_report_destroy(gs_report* r);
/* Writes report.csv, report.txt and per-fold ROC files into out_dir. */
GS_API gs_status gs_report_write(const gs_report* r, const char* out_dir);
GS_API const char* gs_report_text(gs_report* r);
GS_API size_t gs_report_arm_count(const gs_report* r);
GS_API const char* gs_report_arm_name(const gs_report* r, size_t arm);
GS_API size_t gs_report_fold_count(const gs_report* r, size_t arm);
/* orientation: "H", "L", "Avg", "S1".."S5" or "Macro". Percent for rates. */
GS_API gs_status gs_report_scenario_metric(const gs_report* r, size_t arm, gs_scenario scenario,
                                           const char* orientation, gs_metric metric, double* out);
GS_API gs_status gs_report_scenario_auc(const gs_report* r, size_t arm, gs_scenario scenario, double* out);

/* ---- signal processing ------------------------------------------------ */

/* Segmentation of one channel: motion[i] is 1 where motion was detected;
 * normalized receives the min-max normalized baseline. Either may be NULL. */
GS_API gs_status gs_dsp_segment(const double* x, size_t n, double sample_rate_hz, const gs_config* cfg,
                                unsigned char* motion, double* normalized);
/* Per-sample CSV of every intermediate stage. */
GS_API gs_status gs_dsp_trace_write(const double* x, size_t n, double sample_rate_hz, const gs_config* cfg,
                                    const char* path);
/* One channel of one cow, concatenated over its files. */
GS_API gs_status gs_manifest_cow_channel(const gs_manifest* m, const char* cow_id, size_t channel,
                                         const gs_config* cfg, double* out, size_t cap, size_t* len);

/* ---- metrics ---------------------------------------------------------- */

typedef struct gs_metrics {
  double precision;
  double sensitivity;
  double specificity;
  double accuracy;
} gs_metrics;

/* Percentages from confusion counts; rates with a zero denominator are 0. */
GS_API gs_status gs_metrics_compute(double tp, double fp, double fn, double tn, gs_metrics* out);

#ifdef __cplusplus
}
#endif

#endif /* GAITSCREEN_GAITSCREEN_H */
