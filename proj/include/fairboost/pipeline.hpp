#pragma once

#include <cstdint>
#include <string>

#include "fairboost/bayes_opt.hpp"
#include "fairboost/report.hpp"

namespace fairboost {

// Shared options for the audit and mitigate pipelines. The master seed drives
// synthesis, the split, and cross-validation fold assignment; sub-seeds are
// derived deterministically and echoed in every report.
struct PipelineOptions {
  // Data source: a CSV + schema pair, or the synthetic generator.
  std::string csv_path;
  std::string schema_path;
  bool use_synth = false;
  std::size_t synth_rows = 5000;
  std::size_t synth_cols = 10;
  double synth_bias = 2.0;

  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double threshold = 0.5;

  TrainConfig train;
  SearchSpace space;
  int folds = 5;

  FairnessConfig fixed_theta;    // used when skip_bo is set
  bool skip_bo = false;

  int threads = 1;
  std::string out_dir = ".";
  std::string cohort_name = "cohort";
};

// Baseline training plus fairness snapshot, evaluation, and SHAP exports on
// the test partition. Writes audit_report.json, shap_pre.csv,
// shap_disparity_pre.csv, model_baseline.txt, test_preprocessed.csv(+schema).
struct AuditOutputs {
  StageResult stage;
  std::string report_path;
};

AuditOutputs run_audit(const PipelineOptions& opts);

// Full pipeline: audit, hyperparameter search (or a fixed theta), final
// fairness-aware training, post snapshot/SHAP, comparison report.
struct MitigateOutputs {
  ComparisonReport report;
  std::string report_json_path;
  std::string report_text_path;
};

MitigateOutputs run_mitigate(const PipelineOptions& opts);

}  // namespace fairboost
