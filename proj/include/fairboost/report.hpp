#pragma once

#include <cstdint>
#include <string>

#include "fairboost/bayes_opt.hpp"
#include "fairboost/evaluate.hpp"
#include "fairboost/fair_training.hpp"
#include "fairboost/fairness.hpp"
#include "fairboost/gbt.hpp"

namespace fairboost {

struct MetricReduction {
  double pct = 0.0;        // (|pre| - |post|)/|pre| * 100; negative means worsened
  bool applicable = true;  // false when the pre value is 0
};

struct Reductions {
  MetricReduction spd;
  MetricReduction theil;
  MetricReduction wasserstein;
  double theil_collapse_orders = 0.0;  // log10(pre/post) when both positive
  bool theil_collapsed = false;        // set at >= 4 orders of magnitude
  double auc_drop = 0.0;               // pre AUC - post AUC
};

// Everything needed to reproduce a run from the report alone.
struct RunProvenance {
  std::uint64_t seed = 0;
  TrainConfig train;
  SearchSpace space;
  int folds = 5;
  bool bo_used = true;
  int threads = 1;
  double threshold = 0.5;
  double test_fraction = 0.2;
  std::string dataset_hash;    // hex FNV-1a of the preprocessed cohort
  std::string dataset_source;  // csv path or synth parameters

  // Companion files, relative to the report's directory.
  std::string bo_history_path;
  std::string trace_path;
  std::string shap_pre_path;
  std::string shap_post_path;
  std::string disparity_pre_path;
  std::string disparity_post_path;
  std::string model_baseline_path;
  std::string model_fair_path;
};

struct StageResult {
  FairnessSnapshot snapshot;
  EvalResult eval;
};

struct ComparisonReport {
  int schema_version = 1;
  std::string cohort_name;
  StageResult pre;
  StageResult post;
  FairnessConfig theta_star;
  Reductions reductions;
  RunProvenance provenance;
};

// Populates the per-metric reductions; worsenings stay negative, and a zero
// pre-metric marks that reduction not applicable instead of dividing by zero.
ComparisonReport compare(const StageResult& pre, const StageResult& post,
                         const FairnessConfig& theta_star, const RunProvenance& provenance,
                         const std::string& cohort_name);

// Writes the machine-readable JSON document (floats at 17 significant digits,
// byte-identical across reruns with identical inputs) and a human-readable
// table of the pre/post fairness metrics.
void emit_report(const ComparisonReport& r, const std::string& json_path,
                 const std::string& text_path);

ComparisonReport load_report(const std::string& json_path);

// Renders the text table from an existing JSON report.
std::string render_report_text(const ComparisonReport& r);

// Pre-mitigation audit document: one stage plus provenance, same field names
// and float formatting as the comparison report.
void emit_audit_report(const StageResult& stage, const RunProvenance& provenance,
                       const std::string& cohort_name, const std::string& json_path);

}  // namespace fairboost
