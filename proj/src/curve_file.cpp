#include "idq/curve_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "idq/errors.hpp"

namespace idq {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorKind::kDomainError, "not a number: '" + s + "'");
  return v;
}

void CurveFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

const std::string* CurveFile::get(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

void CurveFile::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

std::string CurveFile::to_csv() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  return out.str();
}

std::string CurveFile::to_json() const {
  nlohmann::ordered_json doc;
  doc["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta) doc["meta"][k] = v;
  doc["columns"] = columns;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    auto cells = nlohmann::ordered_json::array();
    for (double v : row) {
      if (std::isfinite(v))
        cells.push_back(v);
      else
        cells.push_back(format_number(v));
    }
    doc["rows"].push_back(std::move(cells));
  }
  return doc.dump(2) + "\n";
}

CurveFile CurveFile::parse_csv(const std::string& text) {
  CurveFile file;
  std::istringstream in(text);
  std::string line;
  bool have_columns = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) parts.push_back(cell);
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::kDomainError, "bad header: " + line);
      file.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!have_columns) {
      file.columns = split(line);
      have_columns = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != file.columns.size())
      throw Error(ErrorKind::kDomainError, "row width differs from the column header");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c));
    file.rows.push_back(std::move(row));
  }
  if (!have_columns) throw Error(ErrorKind::kDomainError, "missing column header");
  return file;
}

}  // namespace idq
