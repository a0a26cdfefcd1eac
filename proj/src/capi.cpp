#include "fairboost.h"

#include <cstdio>
#include <cstring>
#include <exception>
#include <string>

#include "fairboost/dataset.hpp"
#include "fairboost/error.hpp"
#include "fairboost/evaluate.hpp"
#include "fairboost/fair_training.hpp"
#include "fairboost/fairness.hpp"
#include "fairboost/gbt.hpp"
#include "fairboost/pipeline.hpp"
#include "fairboost/report.hpp"
#include "fairboost/shap.hpp"

struct fb_dataset {
  fairboost::Dataset d;
};
struct fb_model {
  fairboost::TreeEnsemble m;
};
struct fb_attribution {
  fairboost::ShapAttribution attr;
};
struct fb_bo_result {
  fairboost::OptimizeResult res;
  fairboost::SearchSpace space;
};

namespace {

thread_local std::string g_last_error;

fb_status map_error(const fairboost::Error& e) {
  switch (e.kind()) {
    case fairboost::ErrorKind::invalid_argument: return FB_ERROR_INVALID_ARGUMENT;
    case fairboost::ErrorKind::io: return FB_ERROR_IO;
    case fairboost::ErrorKind::data: return FB_ERROR_DATA;
    case fairboost::ErrorKind::numeric: return FB_ERROR_NUMERIC;
  }
  return FB_ERROR_NUMERIC;
}

template <typename Fn>
fb_status guarded(Fn&& fn) {
  try {
    fn();
    return FB_OK;
  } catch (const fairboost::Error& e) {
    g_last_error = e.what();
    return map_error(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FB_ERROR_NUMERIC;
  } catch (...) {
    g_last_error = "unknown failure";
    return FB_ERROR_NUMERIC;
  }
}

fb_status require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return FB_ERROR_INVALID_ARGUMENT;
  }
  return FB_OK;
}

fairboost::TrainConfig to_cpp(const fb_train_config& c) {
  fairboost::TrainConfig out;
  out.rounds = c.rounds;
  out.learning_rate = c.learning_rate;
  out.max_depth = c.max_depth;
  out.min_child_cover = c.min_child_cover;
  out.l2_leaf_reg = c.l2_leaf_reg;
  out.seed = c.seed;
  return out;
}

fairboost::FairnessConfig to_cpp(const fb_fairness_config& c) {
  return {c.lambda, c.w1, c.w2, c.w3};
}

fairboost::SearchSpace to_cpp(const fb_search_space& s) {
  fairboost::SearchSpace out;
  out.lambda_lo = s.lambda_lo;
  out.lambda_hi = s.lambda_hi;
  out.alpha = s.alpha;
  out.budget = s.budget;
  out.init_points = s.init_points;
  out.seed = s.seed;
  return out;
}

fb_fairness_snapshot to_c(const fairboost::FairnessSnapshot& s) {
  return {s.spd, s.theil, s.theil_normalized, s.wasserstein,
          s.rate_group0, s.rate_group1, s.m0, s.m1};
}

fb_eval_result to_c(const fairboost::EvalResult& e) {
  return {e.auc_roc, e.accuracy, e.threshold, e.m};
}

fairboost::PipelineOptions to_cpp(const fb_pipeline_options& o) {
  fairboost::PipelineOptions out;
  out.csv_path = o.csv_path ? o.csv_path : "";
  out.schema_path = o.schema_path ? o.schema_path : "";
  out.use_synth = o.use_synth != 0;
  out.synth_rows = static_cast<std::size_t>(o.synth_rows);
  out.synth_cols = static_cast<std::size_t>(o.synth_cols);
  out.synth_bias = o.synth_bias;
  out.seed = o.seed;
  out.test_fraction = o.test_fraction;
  out.threshold = o.threshold;
  out.train = to_cpp(o.train);
  out.space = to_cpp(o.space);
  out.folds = o.folds;
  out.fixed_theta = to_cpp(o.fixed_theta);
  out.skip_bo = o.skip_bo != 0;
  out.threads = o.threads;
  out.out_dir = o.out_dir ? o.out_dir : ".";
  out.cohort_name = o.cohort_name ? o.cohort_name : "cohort";
  return out;
}

}  // namespace

extern "C" {

const char* fb_version(void) { return "1.0.0"; }

const char* fb_last_error(void) { return g_last_error.c_str(); }

void fb_train_config_defaults(fb_train_config* cfg) {
  if (!cfg) return;
  const fairboost::TrainConfig d;
  *cfg = {d.rounds, d.learning_rate, d.max_depth, d.min_child_cover, d.l2_leaf_reg, d.seed};
}

void fb_search_space_defaults(fb_search_space* space) {
  if (!space) return;
  const fairboost::SearchSpace d;
  *space = {d.lambda_lo, d.lambda_hi, d.alpha, d.budget, d.init_points, d.seed};
}

fb_status fb_dataset_load_csv(const char* csv_path, const char* schema_path,
                              fb_dataset** out) {
  if (auto s = require(csv_path && schema_path && out, "fb_dataset_load_csv: null argument"))
    return s;
  return guarded([&] {
    const auto schema = fairboost::load_schema(schema_path);
    *out = new fb_dataset{fairboost::load_csv(csv_path, schema)};
  });
}

fb_status fb_dataset_synth(int64_t rows, int32_t cols, double bias_strength, uint64_t seed,
                           fb_dataset** out) {
  if (auto s = require(out != nullptr, "fb_dataset_synth: null output")) return s;
  if (auto s = require(rows > 0 && cols > 0, "fb_dataset_synth: nonpositive shape")) return s;
  return guarded([&] {
    *out = new fb_dataset{fairboost::synth_biased(static_cast<std::size_t>(rows),
                                                  static_cast<std::size_t>(cols),
                                                  bias_strength, seed)};
  });
}

fb_status fb_dataset_save_csv(const fb_dataset* d, const char* csv_path,
                              const char* schema_path) {
  if (auto s = require(d && csv_path, "fb_dataset_save_csv: null argument")) return s;
  return guarded([&] {
    fairboost::save_csv(d->d, csv_path);
    if (schema_path) fairboost::save_schema(d->d.schema, schema_path);
  });
}

fb_status fb_dataset_preprocess(const fb_dataset* d, fb_dataset** out) {
  if (auto s = require(d && out, "fb_dataset_preprocess: null argument")) return s;
  return guarded([&] { *out = new fb_dataset{fairboost::preprocess(d->d)}; });
}

fb_status fb_dataset_preprocess_like(const fb_dataset* d, const fb_dataset* fitted,
                                     fb_dataset** out) {
  if (auto s = require(d && fitted && out, "fb_dataset_preprocess_like: null argument"))
    return s;
  return guarded([&] {
    *out = new fb_dataset{
        fairboost::preprocess_with(d->d, fitted->d.encoders, fitted->d.standardizers)};
  });
}

fb_status fb_dataset_split(const fb_dataset* d, double test_fraction, uint64_t seed,
                           fb_dataset** train, fb_dataset** test) {
  if (auto s = require(d && train && test, "fb_dataset_split: null argument")) return s;
  return guarded([&] {
    auto pair = fairboost::stratified_split(d->d, test_fraction, seed);
    *train = new fb_dataset{std::move(pair.train)};
    *test = new fb_dataset{std::move(pair.test)};
  });
}

int64_t fb_dataset_rows(const fb_dataset* d) {
  return d ? static_cast<int64_t>(d->d.rows()) : -1;
}

int32_t fb_dataset_cols(const fb_dataset* d) {
  return d ? static_cast<int32_t>(d->d.cols()) : -1;
}

int64_t fb_dataset_dropped_rows(const fb_dataset* d) { return d ? d->d.dropped_rows : -1; }

void fb_dataset_free(fb_dataset* d) { delete d; }

fb_status fb_train_baseline(const fb_dataset* train, const fb_train_config* cfg,
                            fb_model** out) {
  if (auto s = require(train && cfg && out, "fb_train_baseline: null argument")) return s;
  return guarded([&] {
    *out = new fb_model{fairboost::train_baseline(train->d, to_cpp(*cfg))};
  });
}

fb_status fb_train_fair(const fb_dataset* train, const fb_train_config* cfg,
                        const fb_fairness_config* fcfg, const char* trace_csv_path,
                        fb_model** out) {
  if (auto s = require(train && cfg && fcfg && out, "fb_train_fair: null argument")) return s;
  return guarded([&] {
    std::vector<fairboost::RoundTrace> trace;
    auto model = fairboost::train_fair(train->d, to_cpp(*cfg), to_cpp(*fcfg),
                                       trace_csv_path ? &trace : nullptr);
    if (trace_csv_path) fairboost::write_trace_csv(trace, trace_csv_path);
    *out = new fb_model{std::move(model)};
  });
}

fb_status fb_model_save(const fb_model* m, const char* path) {
  if (auto s = require(m && path, "fb_model_save: null argument")) return s;
  return guarded([&] { fairboost::save_model(m->m, path); });
}

fb_status fb_model_load(const char* path, fb_model** out) {
  if (auto s = require(path && out, "fb_model_load: null argument")) return s;
  return guarded([&] { *out = new fb_model{fairboost::load_model(path)}; });
}

int32_t fb_model_num_trees(const fb_model* m) {
  return m ? static_cast<int32_t>(m->m.trees.size()) : -1;
}

fb_status fb_model_predict_proba(const fb_model* m, const fb_dataset* d, double* out_probs,
                                 int64_t len) {
  if (auto s = require(m && d && out_probs, "fb_model_predict_proba: null argument")) return s;
  if (auto s = require(len >= static_cast<int64_t>(d->d.rows()),
                       "fb_model_predict_proba: buffer too small"))
    return s;
  return guarded([&] {
    const auto p = fairboost::predict_proba(m->m, d->d.X);
    std::memcpy(out_probs, p.data(), p.size() * sizeof(double));
  });
}

void fb_model_free(fb_model* m) { delete m; }

fb_status fb_snapshot(const fb_model* m, const fb_dataset* d, double threshold,
                      fb_fairness_snapshot* out) {
  if (auto s = require(m && d && out, "fb_snapshot: null argument")) return s;
  return guarded([&] {
    const auto p = fairboost::predict_proba(m->m, d->d.X);
    const fairboost::GroupView view(p, d->d.a, threshold);
    *out = to_c(fairboost::snapshot(view));
  });
}

fb_status fb_evaluate(const fb_model* m, const fb_dataset* d, double threshold,
                      fb_eval_result* out) {
  if (auto s = require(m && d && out, "fb_evaluate: null argument")) return s;
  return guarded([&] {
    const auto p = fairboost::predict_proba(m->m, d->d.X);
    *out = to_c(fairboost::evaluate(p, d->d.y, threshold));
  });
}

fb_status fb_attribution_compute(const fb_model* m, const fb_dataset* d,
                                 fb_attribution** out) {
  if (auto s = require(m && d && out, "fb_attribution_compute: null argument")) return s;
  return guarded([&] {
    std::vector<std::string> names;
    for (const auto& c : d->d.schema.columns) names.push_back(c.name);
    *out = new fb_attribution{fairboost::treeshap_ensemble(m->m, d->d.X, names)};
  });
}

double fb_attribution_base_value(const fb_attribution* attr) {
  return attr ? attr->attr.base_value : 0.0;
}

fb_status fb_attribution_write_csv(const fb_attribution* attr, const char* path) {
  if (auto s = require(attr && path, "fb_attribution_write_csv: null argument")) return s;
  return guarded([&] { fairboost::write_attribution_csv(attr->attr, path); });
}

fb_status fb_attribution_write_disparity_csv(const fb_attribution* attr, const fb_dataset* d,
                                             const char* path) {
  if (auto s = require(attr && d && path, "fb_attribution_write_disparity_csv: null argument"))
    return s;
  return guarded([&] {
    const auto disparity = fairboost::group_disparity(attr->attr, d->d.a);
    fairboost::write_disparity_csv(attr->attr, disparity, path);
  });
}

void fb_attribution_free(fb_attribution* attr) { delete attr; }

fb_status fb_optimize(const fb_dataset* train, const fb_search_space* space,
                      const fb_train_config* cfg, int32_t folds, int32_t threads,
                      fb_bo_result** out) {
  if (auto s = require(train && space && cfg && out, "fb_optimize: null argument")) return s;
  return guarded([&] {
    const auto cpp_space = to_cpp(*space);
    auto res = fairboost::optimize(train->d, cpp_space, to_cpp(*cfg), folds,
                                   threads > 0 ? threads : 1);
    *out = new fb_bo_result{std::move(res), cpp_space};
  });
}

fb_status fb_bo_result_best(const fb_bo_result* r, fb_fairness_config* out_theta,
                            double* out_j) {
  if (auto s = require(r != nullptr, "fb_bo_result_best: null result")) return s;
  if (out_theta)
    *out_theta = {r->res.config_star.lambda, r->res.config_star.w1, r->res.config_star.w2,
                  r->res.config_star.w3};
  if (out_j) *out_j = r->res.j_star;
  return FB_OK;
}

int32_t fb_bo_result_size(const fb_bo_result* r) {
  return r ? static_cast<int32_t>(r->res.history.size()) : -1;
}

fb_status fb_bo_result_write_csv(const fb_bo_result* r, const char* path) {
  if (auto s = require(r && path, "fb_bo_result_write_csv: null argument")) return s;
  return guarded([&] { fairboost::write_history_csv(r->res.history, r->space, path); });
}

void fb_bo_result_free(fb_bo_result* r) { delete r; }

void fb_pipeline_options_defaults(fb_pipeline_options* opts) {
  if (!opts) return;
  std::memset(opts, 0, sizeof(*opts));
  fb_train_config_defaults(&opts->train);
  fb_search_space_defaults(&opts->space);
  opts->synth_rows = 5000;
  opts->synth_cols = 10;
  opts->synth_bias = 2.0;
  opts->test_fraction = 0.2;
  opts->threshold = 0.5;
  opts->folds = 5;
  opts->threads = 1;
  opts->out_dir = ".";
  opts->cohort_name = "cohort";
}

fb_status fb_run_audit(const fb_pipeline_options* opts, fb_fairness_snapshot* out_snapshot,
                       fb_eval_result* out_eval) {
  if (auto s = require(opts != nullptr, "fb_run_audit: null options")) return s;
  return guarded([&] {
    const auto result = fairboost::run_audit(to_cpp(*opts));
    if (out_snapshot) *out_snapshot = to_c(result.stage.snapshot);
    if (out_eval) *out_eval = to_c(result.stage.eval);
  });
}

fb_status fb_run_mitigate(const fb_pipeline_options* opts, fb_fairness_snapshot* out_pre,
                          fb_fairness_snapshot* out_post, fb_eval_result* out_pre_eval,
                          fb_eval_result* out_post_eval, fb_fairness_config* out_theta) {
  if (auto s = require(opts != nullptr, "fb_run_mitigate: null options")) return s;
  return guarded([&] {
    const auto result = fairboost::run_mitigate(to_cpp(*opts));
    if (out_pre) *out_pre = to_c(result.report.pre.snapshot);
    if (out_post) *out_post = to_c(result.report.post.snapshot);
    if (out_pre_eval) *out_pre_eval = to_c(result.report.pre.eval);
    if (out_post_eval) *out_post_eval = to_c(result.report.post.eval);
    if (out_theta)
      *out_theta = {result.report.theta_star.lambda, result.report.theta_star.w1,
                    result.report.theta_star.w2, result.report.theta_star.w3};
  });
}

fb_status fb_report_render_text(const char* report_json_path, const char* out_text_path) {
  if (auto s = require(report_json_path != nullptr, "fb_report_render_text: null path"))
    return s;
  return guarded([&] {
    const auto report = fairboost::load_report(report_json_path);
    const std::string text = fairboost::render_report_text(report);
    if (out_text_path) {
      std::FILE* f = std::fopen(out_text_path, "wb");
      if (!f) fairboost::throw_io(std::string("cannot write: ") + out_text_path);
      std::fwrite(text.data(), 1, text.size(), f);
      std::fclose(f);
    } else {
      std::fwrite(text.data(), 1, text.size(), stdout);
    }
  });
}

}  // extern "C"
