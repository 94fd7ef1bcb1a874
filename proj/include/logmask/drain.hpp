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
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logmask/config_file.hpp"
#include "logmask/ingest.hpp"
#include "logmask/sequence.hpp"
#include "logmask/types.hpp"

namespace logmask {

inline constexpr std::string_view kWildcard = "<*>";

struct LogTemplate {
  TemplateId template_id = kNoTemplate;
  std::vector<std::string> tokens;
  std::size_t support_count = 0;

  [[nodiscard]] std::string text() const;
  [[nodiscard]] std::size_t wildcard_count() const;

  friend bool operator==(const LogTemplate&, const LogTemplate&) = default;
};

struct MaskRule {
  std::string name;
  std::regex pattern;
};

/// Splits on runs of whitespace.
std::vector<std::string> tokenize(std::string_view content);

std::vector<MaskRule> compile_mask_rules(
    const std::vector<std::pair<std::string, std::string>>& named_patterns);

/// Replaces every token that fully matches a rule with the wildcard; first rule wins.
std::vector<std::string> preprocess_masks(std::vector<std::string> tokens,
                                          std::span<const MaskRule> rules);

/// Fraction of positions where the template token is a non-wildcard equal to
/// the line token. Throws std::logic_error on length mismatch.
double seq_similarity(std::span<const std::string> template_tokens,
                      std::span<const std::string> line_tokens);

struct DrainParams {
  int depth = 4;
  double sim_threshold = 0.5;
  int max_children = 100;

  void validate() const;
  static DrainParams from_config(const KeyValueFile& kv);
};

/// Fixed-depth parse tree: the root fans out by token count, then by the
/// leading `depth - 1` tokens; leaves hold candidate templates.
class DrainParser {
 public:
  explicit DrainParser(DrainParams params = {});

  DrainParser(DrainParser&&) noexcept = default;
  DrainParser& operator=(DrainParser&&) noexcept = default;

  /// Routes, merges or creates a template. Mutates the tree.
  TemplateId parse(std::span<const std::string> tokens);

  /// Read-only lookup: the best template at or above the threshold, if any.
  [[nodiscard]] std::optional<TemplateId> match(std::span<const std::string> tokens) const;

  [[nodiscard]] std::vector<LogTemplate> export_templates() const;
  [[nodiscard]] const LogTemplate& get(TemplateId id) const;
  [[nodiscard]] std::size_t template_count() const { return templates_.size(); }
  [[nodiscard]] const DrainParams& params() const { return params_; }

  /// Longest root-to-leaf path length (edges), for structural checks.
  [[nodiscard]] int max_path_length() const;
  /// Largest child count over token-layer nodes.
  [[nodiscard]] std::size_t max_fanout() const;

  /// Rebuilds a parser from exported templates (inserted in id order).
  static DrainParser import_templates(const std::vector<LogTemplate>& templates,
                                      DrainParams params = {});

 private:
  struct Node {
    std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
    std::vector<TemplateId> leaf;
  };

  Node* descend(std::span<const std::string> tokens, bool create);
  [[nodiscard]] const Node* find_leaf(std::span<const std::string> tokens) const;
  [[nodiscard]] std::pair<TemplateId, double> best_match(const Node& leaf,
                                                         std::span<const std::string> tokens) const;

  DrainParams params_;
  std::map<std::size_t, std::unique_ptr<Node>> by_length_;
  std::vector<LogTemplate> templates_;  // index = id - 1
};

/// `template_id<TAB>support_count<TAB>tokens` per line.
void write_templates(std::ostream& out, const std::vector<LogTemplate>& templates);
std::vector<LogTemplate> read_templates(std::istream& in);

/// Parses every record of `log` in file order and lays the ids out per group.
/// With `frozen` the parser is only queried; unmatched lines map to kNoTemplate.
std::vector<EventSequence> parse_groups(const RawLog& log, const GroupedLog& grouped,
                                        DrainParser& parser, std::span<const MaskRule> rules,
                                        bool frozen = false);

}  // namespace logmask
