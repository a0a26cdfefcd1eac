/*
 * fairboost C API: fairness-aware gradient-boosted trees for binary
 * classification over tabular cohorts with a binary sensitive attribute.
 *
 * Every function that can fail returns fb_status; on failure a thread-local
 * message is available from fb_last_error(). Objects returned through
 * fb_*** out-parameters are owned by the caller and released with the
 * matching fb_*_free function. All handles are opaque.
 */
#ifndef FAIRBOOST_H
#define FAIRBOOST_H

#include <stdint.h>

#if defined(_WIN32)
#define FB_API __declspec(dllexport)
#else
#define FB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
  FB_OK = 0,
  FB_ERROR_INVALID_ARGUMENT = 1,
  FB_ERROR_IO = 2,
  FB_ERROR_DATA = 3,
  FB_ERROR_NUMERIC = 4
} fb_status;

typedef struct fb_dataset fb_dataset;
typedef struct fb_model fb_model;
typedef struct fb_attribution fb_attribution;
typedef struct fb_bo_result fb_bo_result;

FB_API const char* fb_version(void);
FB_API const char* fb_last_error(void);

typedef struct fb_train_config {
  int32_t rounds;
  double learning_rate;
  int32_t max_depth;
  double min_child_cover;
  double l2_leaf_reg;
  uint64_t seed;
} fb_train_config;

FB_API void fb_train_config_defaults(fb_train_config* cfg);

/* theta = (lambda, w1, w2, w3): penalty strength and per-metric weights. */
typedef struct fb_fairness_config {
  double lambda;
  double w1;
  double w2;
  double w3;
} fb_fairness_config;

typedef struct fb_search_space {
  double lambda_lo; /* log-scaled bounds for lambda */
  double lambda_hi;
  double alpha; /* objective mix: alpha*AUC - (1-alpha)*L_fair */
  int32_t budget;
  int32_t init_points;
  uint64_t seed;
} fb_search_space;

FB_API void fb_search_space_defaults(fb_search_space* space);

typedef struct fb_fairness_snapshot {
  double spd;
  double theil;
  double theil_normalized;
  double wasserstein;
  double rate_group0;
  double rate_group1;
  int64_t m0;
  int64_t m1;
} fb_fairness_snapshot;

typedef struct fb_eval_result {
  double auc_roc;
  double accuracy;
  double threshold;
  int64_t m;
} fb_eval_result;

/* ---- datasets ---------------------------------------------------------- */

FB_API fb_status fb_dataset_load_csv(const char* csv_path, const char* schema_path,
                                     fb_dataset** out);
FB_API fb_status fb_dataset_synth(int64_t rows, int32_t cols, double bias_strength,
                                  uint64_t seed, fb_dataset** out);
FB_API fb_status fb_dataset_save_csv(const fb_dataset* d, const char* csv_path,
                                     const char* schema_path);
/* Fits encoders/standardizers on d. */
FB_API fb_status fb_dataset_preprocess(const fb_dataset* d, fb_dataset** out);
/* Applies the parameters fitted on another dataset (train -> test). */
FB_API fb_status fb_dataset_preprocess_like(const fb_dataset* d, const fb_dataset* fitted,
                                            fb_dataset** out);
FB_API fb_status fb_dataset_split(const fb_dataset* d, double test_fraction, uint64_t seed,
                                  fb_dataset** train, fb_dataset** test);
FB_API int64_t fb_dataset_rows(const fb_dataset* d);
FB_API int32_t fb_dataset_cols(const fb_dataset* d);
FB_API int64_t fb_dataset_dropped_rows(const fb_dataset* d);
FB_API void fb_dataset_free(fb_dataset* d);

/* ---- training and prediction ------------------------------------------ */

FB_API fb_status fb_train_baseline(const fb_dataset* train, const fb_train_config* cfg,
                                   fb_model** out);
/* trace_csv_path may be NULL; otherwise a per-round loss trace is written. */
FB_API fb_status fb_train_fair(const fb_dataset* train, const fb_train_config* cfg,
                               const fb_fairness_config* fcfg, const char* trace_csv_path,
                               fb_model** out);
FB_API fb_status fb_model_save(const fb_model* m, const char* path);
FB_API fb_status fb_model_load(const char* path, fb_model** out);
FB_API int32_t fb_model_num_trees(const fb_model* m);
/* out_probs must hold fb_dataset_rows(d) doubles. */
FB_API fb_status fb_model_predict_proba(const fb_model* m, const fb_dataset* d,
                                        double* out_probs, int64_t len);
FB_API void fb_model_free(fb_model* m);

/* ---- fairness metrics and evaluation ----------------------------------- */

FB_API fb_status fb_snapshot(const fb_model* m, const fb_dataset* d, double threshold,
                             fb_fairness_snapshot* out);
FB_API fb_status fb_evaluate(const fb_model* m, const fb_dataset* d, double threshold,
                             fb_eval_result* out);

/* ---- attribution -------------------------------------------------------- */

FB_API fb_status fb_attribution_compute(const fb_model* m, const fb_dataset* d,
                                        fb_attribution** out);
FB_API double fb_attribution_base_value(const fb_attribution* attr);
FB_API fb_status fb_attribution_write_csv(const fb_attribution* attr, const char* path);
FB_API fb_status fb_attribution_write_disparity_csv(const fb_attribution* attr,
                                                    const fb_dataset* d, const char* path);
FB_API void fb_attribution_free(fb_attribution* attr);

/* ---- hyperparameter search ---------------------------------------------- */

FB_API fb_status fb_optimize(const fb_dataset* train, const fb_search_space* space,
                             const fb_train_config* cfg, int32_t folds, int32_t threads,
                             fb_bo_result** out);
FB_API fb_status fb_bo_result_best(const fb_bo_result* r, fb_fairness_config* out_theta,
                                   double* out_j);
FB_API int32_t fb_bo_result_size(const fb_bo_result* r);
FB_API fb_status fb_bo_result_write_csv(const fb_bo_result* r, const char* path);
FB_API void fb_bo_result_free(fb_bo_result* r);

/* ---- pipelines ----------------------------------------------------------- */

typedef struct fb_pipeline_options {
  const char* csv_path; /* NULL when use_synth is set */
  const char* schema_path;
  int32_t use_synth;
  int64_t synth_rows;
  int32_t synth_cols;
  double synth_bias;
  uint64_t seed;
  double test_fraction;
  double threshold;
  fb_train_config train;
  fb_search_space space;
  int32_t folds;
  fb_fairness_config fixed_theta; /* used when skip_bo is set */
  int32_t skip_bo;
  int32_t threads;
  const char* out_dir;
  const char* cohort_name;
} fb_pipeline_options;

FB_API void fb_pipeline_options_defaults(fb_pipeline_options* opts);

/* Baseline audit: snapshot + evaluation + SHAP exports under out_dir. */
FB_API fb_status fb_run_audit(const fb_pipeline_options* opts,
                              fb_fairness_snapshot* out_snapshot, fb_eval_result* out_eval);

/* Full pipeline: audit, search (unless skip_bo), penalized retraining,
 * post snapshot/SHAP, and the comparison report under out_dir. Output
 * pointers may be NULL when the caller only wants the files. */
FB_API fb_status fb_run_mitigate(const fb_pipeline_options* opts,
                                 fb_fairness_snapshot* out_pre,
                                 fb_fairness_snapshot* out_post,
                                 fb_eval_result* out_pre_eval, fb_eval_result* out_post_eval,
                                 fb_fairness_config* out_theta);

/* Renders the human-readable table from a report.json; out_text_path NULL
 * prints to stdout. */
FB_API fb_status fb_report_render_text(const char* report_json_path,
                                       const char* out_text_path);

#ifdef __cplusplus
}
#endif

#endif /* FAIRBOOST_H */
