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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace locattn {

// Flat, line-oriented configuration:
//
//   # comment
//   include common.cfg        (path relative to the including file)
//   train.steps = 2000
//
// Later assignments override earlier ones, including those from included
// files. The verbatim text of every file read is kept for provenance.
class FlatConfig {
 public:
  struct Source {
    std::string path;
    std::string text;
  };

  static FlatConfig parse_file(const std::filesystem::path& path);
  static FlatConfig parse_string(std::string_view text,
                                 const std::filesystem::path& base_dir = ".",
                                 const std::string& name = "<string>");

  // Command-line overrides; recorded separately from the file sources.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list; empty items are dropped.
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::vector<Source>& sources() const { return sources_; }
  const std::vector<std::pair<std::string, std::string>>& overrides() const {
    return overrides_;
  }

  // Throws std::invalid_argument naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  void load(std::string_view text, const std::filesystem::path& base_dir,
            const std::string& name, std::vector<std::string>& stack,
            int depth);

  std::map<std::string, std::string> values_;
  std::vector<Source> sources_;
  std::vector<std::pair<std::string, std::string>> overrides_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace locattn
