// fairboost command-line tool. Links the public C API only.
//
// Subcommands mirror the pipeline stages: synth, audit, mitigate, explain,
// report. Exit codes: 0 success, 2 usage error, 3 data/input error,
// 4 numerical failure.
//
// Option precedence: values from --config override command-line flags, which
// override built-in defaults.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairboost.h"

namespace {

int exit_code_for(fb_status status) {
  switch (status) {
    case FB_OK: return 0;
    case FB_ERROR_INVALID_ARGUMENT: return 2;
    case FB_ERROR_IO: return 3;
    case FB_ERROR_DATA: return 3;
    case FB_ERROR_NUMERIC: return 4;
  }
  return 4;
}

int fail(fb_status status) {
  std::cerr << "error: " << fb_last_error() << "\n";
  return exit_code_for(status);
}

struct CommonOptions {
  std::string data_csv;
  std::string schema;
  bool use_synth = false;
  std::int64_t rows = 5000;
  std::int32_t cols = 10;
  double bias = 2.0;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double threshold = 0.5;
  std::int32_t threads = 1;
  std::string out_dir = ".";
  std::string cohort = "cohort";
  std::string config_file;

  fb_train_config train{};
  fb_search_space space{};
  std::int32_t folds = 5;
  std::string theta;  // "lambda,w1,w2,w3" skips the search
};

void add_data_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--data", o.data_csv, "input CSV file");
  cmd->add_option("--schema", o.schema, "schema key-value file for --data");
  cmd->add_flag("--synth", o.use_synth, "use the synthetic cohort generator");
  cmd->add_option("--rows", o.rows, "synthetic rows");
  cmd->add_option("--cols", o.cols, "synthetic feature columns");
  cmd->add_option("--bias", o.bias, "synthetic bias strength");
}

void add_run_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "master seed (synthesis, split, folds)");
  cmd->add_option("--test-fraction", o.test_fraction, "held-out fraction");
  cmd->add_option("--threshold", o.threshold, "decision threshold");
  cmd->add_option("--rounds", o.train.rounds, "boosting rounds");
  cmd->add_option("--learning-rate", o.train.learning_rate, "shrinkage");
  cmd->add_option("--max-depth", o.train.max_depth, "tree depth limit");
  cmd->add_option("--min-child-cover", o.train.min_child_cover, "minimum rows per child");
  cmd->add_option("--l2-leaf-reg", o.train.l2_leaf_reg, "leaf L2 regularization");
  cmd->add_option("--threads", o.threads, "worker thread cap");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--cohort", o.cohort, "cohort name echoed in reports");
  cmd->add_option("--config", o.config_file,
                  "key=value file; values override command-line flags");
}

void add_search_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--budget", o.space.budget, "total search evaluations");
  cmd->add_option("--init-points", o.space.init_points, "initial space-filling points");
  cmd->add_option("--folds", o.folds, "cross-validation folds");
  cmd->add_option("--alpha", o.space.alpha, "objective mix alpha*AUC-(1-alpha)*L_fair");
  cmd->add_option("--lambda-lo", o.space.lambda_lo, "lambda lower bound");
  cmd->add_option("--lambda-hi", o.space.lambda_hi, "lambda upper bound");
  cmd->add_option("--theta", o.theta, "fixed lambda,w1,w2,w3 (skips the search)");
}

// Config file: one `key = value` per line, '#' comments. Keys match the long
// flag names without the leading dashes.
bool apply_config_file(CommonOptions& o) {
  if (o.config_file.empty()) return true;
  std::ifstream in(o.config_file);
  if (!in) {
    std::cerr << "error: cannot open config file: " << o.config_file << "\n";
    return false;
  }
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto set_d = [&](const char* key, double& target) {
    if (auto it = kv.find(key); it != kv.end()) target = std::stod(it->second);
  };
  auto set_i32 = [&](const char* key, std::int32_t& target) {
    if (auto it = kv.find(key); it != kv.end()) target = std::stoi(it->second);
  };
  auto set_i64 = [&](const char* key, std::int64_t& target) {
    if (auto it = kv.find(key); it != kv.end()) target = std::stoll(it->second);
  };
  auto set_u64 = [&](const char* key, std::uint64_t& target) {
    if (auto it = kv.find(key); it != kv.end()) target = std::stoull(it->second);
  };
  auto set_s = [&](const char* key, std::string& target) {
    if (auto it = kv.find(key); it != kv.end()) target = it->second;
  };

  try {
    set_s("data", o.data_csv);
    set_s("schema", o.schema);
    set_i64("rows", o.rows);
    set_i32("cols", o.cols);
    set_d("bias", o.bias);
    set_u64("seed", o.seed);
    set_d("test-fraction", o.test_fraction);
    set_d("threshold", o.threshold);
    set_i32("rounds", o.train.rounds);
    set_d("learning-rate", o.train.learning_rate);
    set_i32("max-depth", o.train.max_depth);
    set_d("min-child-cover", o.train.min_child_cover);
    set_d("l2-leaf-reg", o.train.l2_leaf_reg);
    set_i32("threads", o.threads);
    set_s("out-dir", o.out_dir);
    set_s("cohort", o.cohort);
    set_i32("budget", o.space.budget);
    set_i32("init-points", o.space.init_points);
    set_i32("folds", o.folds);
    set_d("alpha", o.space.alpha);
    set_d("lambda-lo", o.space.lambda_lo);
    set_d("lambda-hi", o.space.lambda_hi);
    set_s("theta", o.theta);
  } catch (const std::exception& e) {
    std::cerr << "error: bad value in config file: " << e.what() << "\n";
    return false;
  }
  return true;
}

bool parse_theta(const std::string& text, fb_fairness_config& out) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> values;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      return false;
    }
  }
  if (values.size() != 4) return false;
  out = {values[0], values[1], values[2], values[3]};
  return true;
}

fb_pipeline_options to_pipeline(const CommonOptions& o, bool skip_bo,
                                const fb_fairness_config& theta) {
  fb_pipeline_options p;
  fb_pipeline_options_defaults(&p);
  p.csv_path = o.data_csv.empty() ? nullptr : o.data_csv.c_str();
  p.schema_path = o.schema.empty() ? nullptr : o.schema.c_str();
  p.use_synth = o.use_synth ? 1 : 0;
  p.synth_rows = o.rows;
  p.synth_cols = o.cols;
  p.synth_bias = o.bias;
  p.seed = o.seed;
  p.test_fraction = o.test_fraction;
  p.threshold = o.threshold;
  p.train = o.train;
  p.train.seed = o.seed;
  p.space = o.space;
  p.space.seed = o.seed;
  p.folds = o.folds;
  p.fixed_theta = theta;
  p.skip_bo = skip_bo ? 1 : 0;
  p.threads = o.threads;
  p.out_dir = o.out_dir.c_str();
  p.cohort_name = o.cohort.c_str();
  return p;
}

void print_snapshot(const char* name, const fb_fairness_snapshot& s) {
  std::printf("%s: spd=%.6f theil=%.6f wasserstein=%.6f rate_g0=%.4f rate_g1=%.4f\n", name,
              s.spd, s.theil, s.wasserstein, s.rate_group0, s.rate_group1);
}

int cmd_synth(const CommonOptions& o) {
  fb_dataset* data = nullptr;
  if (auto s = fb_dataset_synth(o.rows, o.cols, o.bias, o.seed, &data)) return fail(s);
  std::filesystem::create_directories(o.out_dir);
  const auto csv = (std::filesystem::path(o.out_dir) / "data.csv").string();
  const auto schema = (std::filesystem::path(o.out_dir) / "data.schema").string();
  const auto status = fb_dataset_save_csv(data, csv.c_str(), schema.c_str());
  fb_dataset_free(data);
  if (status) return fail(status);
  std::printf("wrote %s and %s (%lld rows)\n", csv.c_str(), schema.c_str(),
              static_cast<long long>(o.rows));
  return 0;
}

int cmd_audit(const CommonOptions& o) {
  const auto opts = to_pipeline(o, true, {0, 0, 0, 0});
  fb_fairness_snapshot snapshot;
  fb_eval_result eval;
  if (auto s = fb_run_audit(&opts, &snapshot, &eval)) return fail(s);
  print_snapshot("baseline", snapshot);
  std::printf("baseline: auc=%.6f accuracy=%.6f (m=%lld)\n", eval.auc_roc, eval.accuracy,
              static_cast<long long>(eval.m));
  std::printf("outputs in %s\n", o.out_dir.c_str());
  return 0;
}

int cmd_mitigate(const CommonOptions& o) {
  fb_fairness_config theta{0, 0, 0, 0};
  bool skip_bo = false;
  if (!o.theta.empty()) {
    if (!parse_theta(o.theta, theta)) {
      std::cerr << "error: --theta expects lambda,w1,w2,w3\n";
      return 2;
    }
    skip_bo = true;
  }
  const auto opts = to_pipeline(o, skip_bo, theta);
  fb_fairness_snapshot pre, post;
  fb_eval_result pre_eval, post_eval;
  fb_fairness_config theta_star;
  if (auto s = fb_run_mitigate(&opts, &pre, &post, &pre_eval, &post_eval, &theta_star))
    return fail(s);
  print_snapshot("pre ", pre);
  print_snapshot("post", post);
  std::printf("theta*: lambda=%.6g w1=%.4f w2=%.4f w3=%.4f\n", theta_star.lambda,
              theta_star.w1, theta_star.w2, theta_star.w3);
  std::printf("auc pre=%.6f post=%.6f (drop %.6f)\n", pre_eval.auc_roc, post_eval.auc_roc,
              pre_eval.auc_roc - post_eval.auc_roc);
  std::printf("report in %s\n", o.out_dir.c_str());
  return 0;
}

int cmd_explain(const std::string& model_path, const CommonOptions& o, bool no_preprocess) {
  fb_model* model = nullptr;
  if (auto s = fb_model_load(model_path.c_str(), &model)) return fail(s);

  fb_dataset* raw = nullptr;
  auto status = fb_dataset_load_csv(o.data_csv.c_str(), o.schema.c_str(), &raw);
  if (status) {
    fb_model_free(model);
    return fail(status);
  }
  fb_dataset* data = raw;
  if (!no_preprocess) {
    fb_dataset* processed = nullptr;
    status = fb_dataset_preprocess(raw, &processed);
    fb_dataset_free(raw);
    if (status) {
      fb_model_free(model);
      return fail(status);
    }
    data = processed;
  }

  fb_attribution* attr = nullptr;
  status = fb_attribution_compute(model, data, &attr);
  if (status == FB_OK) {
    std::filesystem::create_directories(o.out_dir);
    const auto shap_csv = (std::filesystem::path(o.out_dir) / "shap.csv").string();
    const auto disparity_csv =
        (std::filesystem::path(o.out_dir) / "shap_disparity.csv").string();
    status = fb_attribution_write_csv(attr, shap_csv.c_str());
    if (status == FB_OK)
      status = fb_attribution_write_disparity_csv(attr, data, disparity_csv.c_str());
    if (status == FB_OK)
      std::printf("wrote %s and %s (base value %.6f)\n", shap_csv.c_str(),
                  disparity_csv.c_str(), fb_attribution_base_value(attr));
  }
  fb_attribution_free(attr);
  fb_dataset_free(data);
  fb_model_free(model);
  return status == FB_OK ? 0 : fail(status);
}

int cmd_report(const std::string& input, const std::string& output) {
  const auto status =
      fb_report_render_text(input.c_str(), output.empty() ? nullptr : output.c_str());
  return status == FB_OK ? 0 : fail(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-aware gradient boosted trees: audit, mitigate, explain"};
  app.require_subcommand(1);

  CommonOptions o;
  fb_train_config_defaults(&o.train);
  fb_search_space_defaults(&o.space);

  auto* synth = app.add_subcommand("synth", "generate a synthetic biased cohort CSV");
  synth->add_option("--rows", o.rows, "rows")->required();
  synth->add_option("--cols", o.cols, "feature columns")->required();
  synth->add_option("--bias", o.bias, "bias strength")->required();
  synth->add_option("--seed", o.seed, "generator seed");
  synth->add_option("--out-dir", o.out_dir, "output directory");

  auto* audit = app.add_subcommand("audit", "train the baseline and quantify bias");
  add_data_flags(audit, o);
  add_run_flags(audit, o);

  auto* mitigate =
      app.add_subcommand("mitigate", "full pipeline: audit, tune, retrain, compare");
  add_data_flags(mitigate, o);
  add_run_flags(mitigate, o);
  add_search_flags(mitigate, o);

  std::string model_path;
  bool no_preprocess = false;
  auto* explain = app.add_subcommand("explain", "attribution CSVs for a saved model");
  explain->add_option("--model", model_path, "model file")->required();
  explain->add_option("--data", o.data_csv, "input CSV")->required();
  explain->add_option("--schema", o.schema, "schema file")->required();
  explain->add_flag("--no-preprocess", no_preprocess,
                    "data is already in model space (e.g. test_preprocessed.csv)");
  explain->add_option("--out-dir", o.out_dir, "output directory");

  std::string report_input, report_output;
  auto* report = app.add_subcommand("report", "render the text table from a report.json");
  report->add_option("--input", report_input, "report.json path")->required();
  report->add_option("--output", report_output, "output text path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (!apply_config_file(o)) return 3;

  if (synth->parsed()) return cmd_synth(o);
  if (audit->parsed()) {
    if (!o.use_synth && (o.data_csv.empty() || o.schema.empty())) {
      std::cerr << "error: audit needs --data and --schema, or --synth\n";
      return 2;
    }
    return cmd_audit(o);
  }
  if (mitigate->parsed()) {
    if (!o.use_synth && (o.data_csv.empty() || o.schema.empty())) {
      std::cerr << "error: mitigate needs --data and --schema, or --synth\n";
      return 2;
    }
    return cmd_mitigate(o);
  }
  if (explain->parsed()) return cmd_explain(model_path, o, no_preprocess);
  if (report->parsed()) return cmd_report(report_input, report_output);
  return 2;
}
