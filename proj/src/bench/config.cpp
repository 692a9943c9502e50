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

#include "locattn/bench/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace locattn {
namespace {

constexpr int kMaxIncludeDepth = 16;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read config file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw std::invalid_argument("config key '" + key + "': expected " +
                              expected + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value,
               const char* expected) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value, expected);
  return out;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

FlatConfig FlatConfig::parse_file(const std::filesystem::path& path) {
  FlatConfig config;
  std::vector<std::string> stack;
  const std::string text = read_text(path);
  stack.push_back(std::filesystem::weakly_canonical(path).string());
  config.load(text, path.parent_path(), path.string(), stack, 0);
  return config;
}

FlatConfig FlatConfig::parse_string(std::string_view text,
                                    const std::filesystem::path& base_dir,
                                    const std::string& name) {
  FlatConfig config;
  std::vector<std::string> stack;
  config.load(text, base_dir, name, stack, 0);
  return config;
}

void FlatConfig::load(std::string_view text,
                      const std::filesystem::path& base_dir,
                      const std::string& name, std::vector<std::string>& stack,
                      int depth) {
  if (depth > kMaxIncludeDepth) {
    throw std::invalid_argument("config include depth exceeded at " + name);
  }
  sources_.push_back({name, std::string(text)});
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = name + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      constexpr std::string_view kInclude = "include";
      if (line.substr(0, kInclude.size()) != kInclude ||
          line.size() == kInclude.size() ||
          !std::isspace(static_cast<unsigned char>(line[kInclude.size()]))) {
        throw std::invalid_argument(where + ": expected 'key = value'");
      }
      const std::filesystem::path target =
          base_dir / std::string(trim(line.substr(kInclude.size())));
      const std::string canonical =
          std::filesystem::weakly_canonical(target).string();
      if (std::find(stack.begin(), stack.end(), canonical) != stack.end()) {
        throw std::invalid_argument(where + ": include cycle via " +
                                    target.string());
      }
      stack.push_back(canonical);
      load(read_text(target), target.parent_path(), target.string(), stack,
           depth + 1);
      stack.pop_back();
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw std::invalid_argument(where + ": empty key");
    }
    values_[key] = std::string(trim(line.substr(eq + 1)));
  }
}

void FlatConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  overrides_.emplace_back(key, value);
}

const std::string& FlatConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument("missing config key: " + key);
  }
  return it->second;
}

std::string FlatConfig::get(const std::string& key,
                            const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::size_t FlatConfig::get_size(const std::string& key,
                                 std::size_t fallback) const {
  if (!has(key)) return fallback;
  return parse_number<std::size_t>(key, get(key), "a non-negative integer");
}

std::uint64_t FlatConfig::get_u64(const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return parse_number<std::uint64_t>(key, get(key), "a non-negative integer");
}

int FlatConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  return parse_number<int>(key, get(key), "an integer");
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return parse_number<double>(key, get(key), "a number");
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> FlatConfig::get_list(const std::string& key) const {
  return has(key) ? split_list(get(key)) : std::vector<std::string>{};
}

void FlatConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

}  // namespace locattn
