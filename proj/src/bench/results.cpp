// Copyright 2026 The locattn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "locattn/bench/results.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace locattn {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(const std::string& s) const { return csv_escape(s); }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json cell_json(const Cell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(std::int64_t i) const { return i; }
    nlohmann::json operator()(double d) const { return d; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

Cell json_cell(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return std::monostate{};
    case nlohmann::json::value_t::boolean:
      return j.get<bool>();
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
      return j.get<std::int64_t>();
    case nlohmann::json::value_t::number_float:
      return j.get<double>();
    case nlohmann::json::value_t::string:
      return j.get<std::string>();
    default:
      throw std::invalid_argument("result cell must be a scalar or null");
  }
}

std::ofstream open_for_write(const std::filesystem::path& path,
                             std::ios::openmode mode) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

Cell real_cell(double v) {
  if (!std::isfinite(v)) return std::monostate{};
  return v;
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) +
                                " cells, table has " +
                                std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column named " + name);
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  throw std::invalid_argument("unknown export format: " + name +
                              " (expected csv or json)");
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(columns[i]);
  }
  return out;
}

std::string csv_line(const std::vector<Cell>& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += cell_text(row[i]);
  }
  return out;
}

nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = table.kind;
  j["metadata"] = table.metadata;
  j["columns"] = table.columns;
  auto rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    auto r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

ResultTable table_from_json(const nlohmann::json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::invalid_argument("unsupported schema_version " +
                                std::to_string(version));
  }
  ResultTable table;
  table.kind = j.at("kind").get<std::string>();
  table.metadata = j.value("metadata", nlohmann::json::object());
  table.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : r) row.push_back(json_cell(c));
    table.add_row(std::move(row));
  }
  return table;
}

void export_results(const ResultTable& table, ExportFormat format,
                    const std::filesystem::path& path) {
  if (table.rows.empty()) {
    throw std::invalid_argument("export_results: empty table");
  }
  std::ofstream out = open_for_write(path, std::ios::trunc);
  if (format == ExportFormat::kCsv) {
    out << csv_header(table.columns) << '\n';
    for (const auto& row : table.rows) out << csv_line(row) << '\n';
  } else {
    out << to_json(table).dump(2) << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

ResultTable read_json_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  return table_from_json(nlohmann::json::parse(in));
}

CsvAppender::CsvAppender(const std::filesystem::path& path,
                         std::vector<std::string> columns)
    : path_(path), width_(columns.size()) {
  out_ = open_for_write(path, std::ios::trunc);
  out_ << csv_header(columns) << '\n' << std::flush;
}

void CsvAppender::append(const std::vector<Cell>& row) {
  if (row.size() != width_) {
    throw std::invalid_argument("CsvAppender: row width mismatch");
  }
  const std::string line = csv_line(row);
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << line << '\n' << std::flush;
}

}  // namespace locattn
