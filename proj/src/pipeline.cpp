#include "fairboost/pipeline.hpp"

#include <cstdio>
#include <filesystem>

#include "fairboost/error.hpp"
#include "fairboost/evaluate.hpp"
#include "fairboost/fairness.hpp"
#include "fairboost/shap.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;

namespace {

struct PreparedData {
  Dataset train;
  Dataset test;
  std::string source;
  std::string hash_hex;
};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

PreparedData prepare(const PipelineOptions& opts) {
  Dataset raw;
  std::string source;
  if (opts.use_synth) {
    raw = synth_biased(opts.synth_rows, opts.synth_cols, opts.synth_bias, opts.seed);
    source = "synth(rows=" + std::to_string(opts.synth_rows) +
             ",cols=" + std::to_string(opts.synth_cols) +
             ",bias=" + format_g17(opts.synth_bias) + ",seed=" + std::to_string(opts.seed) +
             ")";
  } else {
    if (opts.csv_path.empty() || opts.schema_path.empty())
      throw_invalid("pipeline: either a CSV + schema pair or --synth is required");
    const FeatureSchema schema = load_schema(opts.schema_path);
    raw = load_csv(opts.csv_path, schema);
    source = opts.csv_path;
  }

  PreparedData out;
  out.hash_hex = hex64(dataset_hash(raw));
  out.source = std::move(source);

  SplitPair split = stratified_split(raw, opts.test_fraction, opts.seed);
  out.train = preprocess(split.train);
  out.test = preprocess_with(split.test, out.train.encoders, out.train.standardizers);
  return out;
}

std::vector<std::string> feature_names(const Dataset& d) {
  std::vector<std::string> names;
  names.reserve(d.cols());
  for (const auto& c : d.schema.columns) names.push_back(c.name);
  return names;
}

StageResult stage_on_test(const TreeEnsemble& model, const Dataset& test, double threshold) {
  const auto p = predict_proba(model, test.X);
  const GroupView view(p, test.a, threshold);
  StageResult s;
  s.snapshot = snapshot(view);
  s.eval = evaluate(p, test.y, threshold);
  return s;
}

FeatureSchema continuous_view(const FeatureSchema& schema) {
  FeatureSchema out = schema;
  for (auto& c : out.columns) c.kind = ColumnKind::continuous;
  return out;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

RunProvenance base_provenance(const PipelineOptions& opts, const PreparedData& data) {
  RunProvenance prov;
  prov.seed = opts.seed;
  prov.train = opts.train;
  prov.space = opts.space;
  prov.folds = opts.folds;
  prov.bo_used = !opts.skip_bo;
  prov.threads = opts.threads;
  prov.threshold = opts.threshold;
  prov.test_fraction = opts.test_fraction;
  prov.dataset_hash = data.hash_hex;
  prov.dataset_source = data.source;
  prov.shap_pre_path = "shap_pre.csv";
  prov.disparity_pre_path = "shap_disparity_pre.csv";
  prov.model_baseline_path = "model_baseline.txt";
  return prov;
}

void write_test_cohort(const Dataset& test, const PipelineOptions& opts) {
  Dataset emitted = test;
  emitted.schema = continuous_view(test.schema);
  save_csv(emitted, join(opts.out_dir, "test_preprocessed.csv"));
  save_schema(emitted.schema, join(opts.out_dir, "test_preprocessed.schema"));
}

}  // namespace

AuditOutputs run_audit(const PipelineOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  const PreparedData data = prepare(opts);

  const TreeEnsemble baseline = train_baseline(data.train, opts.train);
  const StageResult stage = stage_on_test(baseline, data.test, opts.threshold);

  const auto names = feature_names(data.test);
  const ShapAttribution attr = treeshap_ensemble(baseline, data.test.X, names);
  const GroupDisparity disparity = group_disparity(attr, data.test.a);

  RunProvenance prov = base_provenance(opts, data);
  save_model(baseline, join(opts.out_dir, prov.model_baseline_path));
  write_attribution_csv(attr, join(opts.out_dir, prov.shap_pre_path));
  write_disparity_csv(attr, disparity, join(opts.out_dir, prov.disparity_pre_path));
  write_test_cohort(data.test, opts);

  AuditOutputs out;
  out.stage = stage;
  out.report_path = join(opts.out_dir, "audit_report.json");
  emit_audit_report(stage, prov, opts.cohort_name, out.report_path);
  return out;
}

MitigateOutputs run_mitigate(const PipelineOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  const PreparedData data = prepare(opts);
  const auto names = feature_names(data.test);

  RunProvenance prov = base_provenance(opts, data);
  prov.bo_history_path = "bo_history.csv";
  prov.trace_path = "trace_fair.csv";
  prov.shap_post_path = "shap_post.csv";
  prov.disparity_post_path = "shap_disparity_post.csv";
  prov.model_fair_path = "model_fair.txt";

  // Pre-mitigation stage.
  const TreeEnsemble baseline = train_baseline(data.train, opts.train);
  const StageResult pre = stage_on_test(baseline, data.test, opts.threshold);
  const ShapAttribution attr_pre = treeshap_ensemble(baseline, data.test.X, names);
  save_model(baseline, join(opts.out_dir, prov.model_baseline_path));
  write_attribution_csv(attr_pre, join(opts.out_dir, prov.shap_pre_path));
  write_disparity_csv(attr_pre, group_disparity(attr_pre, data.test.a),
                      join(opts.out_dir, prov.disparity_pre_path));
  write_test_cohort(data.test, opts);

  // Hyperparameter selection.
  FairnessConfig theta_star = opts.fixed_theta;
  std::vector<Trial> history;
  if (!opts.skip_bo) {
    const OptimizeResult bo =
        optimize(data.train, opts.space, opts.train, opts.folds, opts.threads);
    theta_star = bo.config_star;
    history = bo.history;
  }
  write_history_csv(history, opts.space, join(opts.out_dir, prov.bo_history_path));

  // Final training with theta*.
  std::vector<RoundTrace> trace;
  const TreeEnsemble fair_model = train_fair(data.train, opts.train, theta_star, &trace);
  write_trace_csv(trace, join(opts.out_dir, prov.trace_path));
  save_model(fair_model, join(opts.out_dir, prov.model_fair_path));

  const StageResult post = stage_on_test(fair_model, data.test, opts.threshold);
  const ShapAttribution attr_post = treeshap_ensemble(fair_model, data.test.X, names);
  write_attribution_csv(attr_post, join(opts.out_dir, prov.shap_post_path));
  write_disparity_csv(attr_post, group_disparity(attr_post, data.test.a),
                      join(opts.out_dir, prov.disparity_post_path));

  MitigateOutputs out;
  out.report = compare(pre, post, theta_star, prov, opts.cohort_name);
  out.report_json_path = join(opts.out_dir, "report.json");
  out.report_text_path = join(opts.out_dir, "report.txt");
  emit_report(out.report, out.report_json_path, out.report_text_path);
  return out;
}

}  // namespace fairboost
