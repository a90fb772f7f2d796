#pragma once

#include <string>
#include <utility>
#include <vector>

namespace idq {

/// Tabular output of the command-line tool: ordered `key=value` metadata plus
/// numeric rows. The first column is the sort key (d_id).
struct CurveFile {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Replaces the value of an existing key or appends a new one.
  void set(const std::string& key, const std::string& value);
  const std::string* get(const std::string& key) const;
  /// Stable sort on the first column.
  void sort_rows();

  std::string to_csv() const;
  std::string to_json() const;
  /// Throws DomainError on malformed input.
  static CurveFile parse_csv(const std::string& text);
};

/// 12 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);
double parse_number(const std::string& s);

}  // namespace idq
