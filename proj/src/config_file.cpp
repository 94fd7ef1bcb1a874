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

#include "logmask/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace logmask {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s) {
  const std::string text(trim(s));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

long long parse_int(std::string_view s) {
  const auto t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(t) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(t) + "'");
}

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile kv;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    kv.entries_.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    if (end == text.size()) break;
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void KeyValueFile::set(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueFile::has(std::string_view key) const { return get(key).has_value(); }

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::string KeyValueFile::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string KeyValueFile::require(std::string_view key) const {
  auto v = get(key);
  if (!v) throw std::invalid_argument("missing required key '" + std::string(key) + "'");
  return *v;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v) : fallback;
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  return v ? parse_int(*v) : fallback;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  return v ? parse_bool(*v) : fallback;
}

std::vector<std::pair<std::string, std::string>> KeyValueFile::with_prefix(
    std::string_view prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) {
    if (k.size() > prefix.size() && std::string_view(k).substr(0, prefix.size()) == prefix) {
      out.emplace_back(k.substr(prefix.size()), v);
    }
  }
  return out;
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace logmask
