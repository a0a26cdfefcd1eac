#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairboost/matrix.hpp"
#include "fairboost/schema.hpp"

namespace fairboost {

// Per-categorical-column encoder; codes are assigned in first-appearance
// order so train and test share the same mapping.
struct CategoryEncoder {
  std::vector<std::string> categories;  // code -> name

  int code_of(const std::string& name) const;  // -1 if unseen
  int encode_or_add(const std::string& name);
};

struct Standardizer {
  double mean = 0.0;
  double stddev = 1.0;  // population form; 0 marks a constant column
};

// Tabular cohort with binary labels and a binary sensitive attribute
// (a=1 is the privileged group). Immutable after construction; preprocessing
// returns a new value.
struct Dataset {
  Matrix X;                  // m x d; categorical cells hold codes once encoded
  std::vector<std::int8_t> y;
  std::vector<std::int8_t> a;
  FeatureSchema schema;

  // Raw categorical strings, kept until preprocess() encodes them.
  // Indexed per schema column; empty vectors for continuous columns.
  std::vector<std::vector<std::string>> raw_categorical;

  std::vector<std::optional<CategoryEncoder>> encoders;       // per column
  std::vector<std::optional<Standardizer>> standardizers;     // per column
  bool preprocessed = false;

  std::int64_t dropped_rows = 0;
  std::vector<std::string> warnings;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return schema.columns.size(); }
  std::size_t group_count(int group) const;

  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  bool stratified_on_label = true;  // false after the attribute-only fallback
  std::string note;
};

// Reads a comma-separated UTF-8 file with a header row (no quoting in v1).
// Rows with a missing label, missing sensitive value, or a sensitive value
// outside the schema's binary coding are dropped and counted.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);

void save_csv(const Dataset& d, const std::string& path);

// Encodes categorical columns (first-appearance codes) and standardizes
// continuous ones to (x - mean)/stddev with population stddev. A constant
// column becomes all zeros with a warning. Re-applying with the stored
// encoders/standardizers is the identity.
Dataset preprocess(const Dataset& d);

// Applies encoders/standardizers fitted elsewhere (train-time parameters to a
// test split). Unseen categories extend the shared encoder with a warning.
Dataset preprocess_with(const Dataset& d,
                        const std::vector<std::optional<CategoryEncoder>>& encoders,
                        const std::vector<std::optional<Standardizer>>& standardizers);

// Deterministic split stratified jointly on (a, y); falls back to stratifying
// on a alone when a cell has fewer than 2 members.
SplitPair stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

// Synthetic cohort with group-conditional features and a logistic ground
// truth whose intercept is shifted by +/- bias_strength per group. Feature 0
// is a pure proxy for the sensitive attribute (|corr| >= 0.8, no direct
// effect on the label). Requires m >= 100, d >= 3.
Dataset synth_biased(std::size_t m, std::size_t d, double bias_strength, std::uint64_t seed);

// FNV-1a over the numeric contents; reports embed it as provenance.
std::uint64_t dataset_hash(const Dataset& d);

}  // namespace fairboost
