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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include "logmask/config_file.hpp"
#include "logmask/types.hpp"

namespace logmask {

struct RawLogRecord {
  std::size_t line_no = 0;  // 1-based
  std::string content;
  /// Grouping keys found for this line. Usually one; HDFS lines may name
  /// several blocks. Empty in keyed mode means the line is rejected.
  std::vector<std::string> seq_keys;
  std::optional<std::string> label_hint;
};

enum class SeqKeyMode { PerFile, ContentPattern, HeaderGroup };

struct LabelRule {
  enum class Kind { AllNormal, AllAnomalous, HintNotEqual, KeyList };
  Kind kind = Kind::AllNormal;
  /// HintNotEqual: a record whose hint differs from this marks its sequence anomalous.
  std::string normal_hint = "-";
  /// KeyList: explicit key -> label table; keys not listed get `fallback`.
  std::unordered_map<std::string, Label> keys;
  Label fallback = Label::Normal;
};

/// How raw lines are split into header/content and grouped into sequences.
///
/// Config file keys:
///   header_pattern  regex over the whole line (optional)
///   content_group   capture group holding the message (default: last group)
///   label_group     capture group holding the label hint (optional)
///   seq_key         `per-file` | `pattern` | `header`
///   seq_key_pattern regex searched in content (all matches; group 1 if present)
///   seq_key_group   header capture group holding the key
///   label_rule      `all-normal` | `all-anomalous` | `hint-not-equal:<tok>` | `key-list:<csv>`
///   mask.<name>     ordered Drain preprocessing rules
///   drain.depth, drain.sim_threshold, drain.max_children
struct LoaderConfig {
  std::string header_pattern_text;
  std::optional<std::regex> header_pattern;
  int content_group = -1;
  int label_group = 0;

  SeqKeyMode seq_key_mode = SeqKeyMode::PerFile;
  std::string seq_key_pattern_text;
  std::optional<std::regex> seq_key_pattern;
  int seq_key_group = 0;

  LabelRule label_rule;

  /// Preprocessing rules forwarded to the template parser, in file order.
  std::vector<std::pair<std::string, std::string>> mask_rules;
  KeyValueFile raw;

  /// Builds and validates a config; relative key-list paths resolve against `base_dir`.
  static LoaderConfig from_key_values(const KeyValueFile& kv,
                                      const std::filesystem::path& base_dir = {});
  static LoaderConfig load(const std::filesystem::path& path);

  /// Per-file grouping, no header, every sequence normal.
  static LoaderConfig per_file_default();
};

struct RawLog {
  std::filesystem::path source;
  std::vector<RawLogRecord> records;
  /// Lines that did not match `header_pattern` (kept with the whole line as content).
  std::size_t header_mismatches = 0;
};

struct SequenceGroup {
  std::string seq_key;
  std::vector<RawLogRecord> records;
  Label label = Label::Normal;
};

struct GroupedLog {
  std::vector<SequenceGroup> groups;
  std::vector<RawLogRecord> rejects;
};

/// Replaces invalid UTF-8 byte sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

RawLog load_raw_log(const std::filesystem::path& path, const LoaderConfig& cfg);
/// Same as `load_raw_log` over in-memory text; `source_name` feeds per-file keys.
RawLog load_raw_log_text(std::string_view text, const LoaderConfig& cfg,
                         const std::string& source_name);

GroupedLog group_sequences(const std::vector<RawLogRecord>& records, const LoaderConfig& cfg);

/// `seq_key<TAB>label<TAB>raw-line-count`, one group per line.
void write_grouped_log(std::ostream& out, const GroupedLog& grouped);

}  // namespace logmask
