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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace locattn {

inline constexpr int kSchemaVersion = 1;

// A result cell. std::monostate is an explicit null.
using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

// Null for NaN/inf so missing metrics never masquerade as numbers.
Cell real_cell(double v);

// Column-stable result table. Every row has one cell per column.
struct ResultTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json metadata = nlohmann::json::object();

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;  // throws if absent
  const Cell& at(std::size_t row, const std::string& name) const {
    return rows.at(row).at(column(name));
  }

  bool operator==(const ResultTable&) const = default;
};

enum class ExportFormat { kCsv, kJson };

ExportFormat parse_export_format(const std::string& name);

std::string csv_header(const std::vector<std::string>& columns);
std::string csv_line(const std::vector<Cell>& row);
nlohmann::json to_json(const ResultTable& table);
ResultTable table_from_json(const nlohmann::json& j);

// Writes the table; throws std::invalid_argument on an empty table and
// std::runtime_error when the path cannot be written.
void export_results(const ResultTable& table, ExportFormat format,
                    const std::filesystem::path& path);
ResultTable read_json_results(const std::filesystem::path& path);

// Appends CSV rows as they are produced so partial runs stay usable.
// Thread-safe; every append is flushed.
class CsvAppender {
 public:
  CsvAppender(const std::filesystem::path& path,
              std::vector<std::string> columns);
  void append(const std::vector<Cell>& row);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::size_t width_;
  std::ofstream out_;
  std::mutex mutex_;
};

}  // namespace locattn
