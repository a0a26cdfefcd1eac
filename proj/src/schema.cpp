#include "fairboost/schema.hpp"

#include <fstream>
#include <set>

#include "fairboost/error.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::trim;

void FeatureSchema::validate() const {
  if (label_column.empty()) throw_data("schema: label column not declared");
  if (sensitive_column.empty()) throw_data("schema: sensitive column not declared");
  if (label_column == sensitive_column)
    throw_data("schema: label and sensitive columns must be distinct");
  if (sensitive_code0 == sensitive_code1)
    throw_data("schema: sensitive category codes must be distinct");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw_data("schema: empty column name");
    if (!seen.insert(c.name).second)
      throw_data("schema: duplicate column name '" + c.name + "'");
    if (c.name == label_column || c.name == sensitive_column)
      throw_data("schema: '" + c.name + "' declared both as feature and as label/sensitive");
  }
}

int FeatureSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open schema file: " + path);

  FeatureSchema schema;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw_data("schema " + path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key.rfind("column.", 0) == 0) {
      FeatureSchema::Column col;
      col.name = key.substr(7);
      if (value == "continuous") {
        col.kind = ColumnKind::continuous;
      } else if (value == "categorical") {
        col.kind = ColumnKind::categorical;
      } else {
        throw_data("schema " + path + ":" + std::to_string(lineno) +
                   ": column kind must be continuous or categorical, got '" + value + "'");
      }
      schema.columns.push_back(std::move(col));
    } else if (key == "label") {
      schema.label_column = value;
    } else if (key == "sensitive") {
      schema.sensitive_column = value;
    } else if (key == "sensitive.code0") {
      schema.sensitive_code0 = value;
    } else if (key == "sensitive.code1") {
      schema.sensitive_code1 = value;
    } else {
      throw_data("schema " + path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  schema.validate();
  return schema;
}

void save_schema(const FeatureSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write schema file: " + path);
  for (const auto& c : schema.columns)
    out << "column." << c.name << " = "
        << (c.kind == ColumnKind::continuous ? "continuous" : "categorical") << "\n";
  out << "label = " << schema.label_column << "\n";
  out << "sensitive = " << schema.sensitive_column << "\n";
  out << "sensitive.code0 = " << schema.sensitive_code0 << "\n";
  out << "sensitive.code1 = " << schema.sensitive_code1 << "\n";
  if (!out) throw_io("failed writing schema file: " + path);
}

}  // namespace fairboost
