#pragma once

#include <string>
#include <vector>

namespace fairboost {

enum class ColumnKind { continuous, categorical };

// Declares the layout of a tabular cohort: ordered feature columns, the label
// column, the binary sensitive column and the two category strings coding it.
// Parsed from a key-value file, e.g.
//
//   column.age = continuous
//   column.unit = categorical
//   label = outcome
//   sensitive = gender
//   sensitive.code0 = F
//   sensitive.code1 = M
//
// Feature columns keep file order. Lines starting with '#' are comments.
struct FeatureSchema {
  struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
  };

  std::vector<Column> columns;
  std::string label_column;
  std::string sensitive_column;
  std::string sensitive_code0 = "0";
  std::string sensitive_code1 = "1";

  // Throws on duplicate column names, label == sensitive, or missing fields.
  void validate() const;
  int column_index(const std::string& name) const;  // -1 if absent
};

FeatureSchema load_schema(const std::string& path);
void save_schema(const FeatureSchema& schema, const std::string& path);

}  // namespace fairboost
