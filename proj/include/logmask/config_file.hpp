// Copyright 2026 The logmask Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace logmask {

/// Ordered `key = value` settings read from a text file.
///
/// Blank lines and lines whose first non-space character is `#` are ignored.
/// Keys may repeat; `get` returns the last occurrence while `entries` keeps
/// file order (used for ordered rule lists such as `mask.<name>`).
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::filesystem::path& path);

  void set(std::string key, std::string value);

  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
  [[nodiscard]] std::string get_or(std::string_view key, std::string fallback) const;
  [[nodiscard]] std::string require(std::string_view key) const;

  [[nodiscard]] double get_double(std::string_view key, double fallback) const;
  [[nodiscard]] long long get_int(std::string_view key, long long fallback) const;
  [[nodiscard]] bool get_bool(std::string_view key, bool fallback) const;

  /// Entries whose key starts with `prefix`, in file order, prefix stripped.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> with_prefix(
      std::string_view prefix) const;

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  [[nodiscard]] std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Small text helpers shared by the file readers.
std::string_view trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep = ',');
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
bool parse_bool(std::string_view s);

}  // namespace logmask
