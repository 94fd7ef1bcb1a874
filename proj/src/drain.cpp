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

#include "logmask/drain.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace logmask {

namespace {

bool has_digit(std::string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

std::string LogTemplate::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::size_t LogTemplate::wildcard_count() const {
  return static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), kWildcard));
}

std::vector<std::string> tokenize(std::string_view content) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < content.size()) {
    while (i < content.size() && std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    const auto start = i;
    while (i < content.size() && !std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    if (i > start) tokens.emplace_back(content.substr(start, i - start));
  }
  return tokens;
}

std::vector<MaskRule> compile_mask_rules(
    const std::vector<std::pair<std::string, std::string>>& named_patterns) {
  std::vector<MaskRule> rules;
  rules.reserve(named_patterns.size());
  for (const auto& [name, pattern] : named_patterns) {
    try {
      rules.push_back({name, std::regex(pattern, std::regex::ECMAScript | std::regex::optimize)});
    } catch (const std::regex_error& e) {
      throw std::invalid_argument("mask rule '" + name + "': " + e.what());
    }
  }
  return rules;
}

std::vector<std::string> preprocess_masks(std::vector<std::string> tokens,
                                          std::span<const MaskRule> rules) {
  if (rules.empty()) return tokens;
  for (auto& tok : tokens) {
    for (const auto& rule : rules) {
      if (std::regex_match(tok, rule.pattern)) {
        tok = kWildcard;
        break;
      }
    }
  }
  return tokens;
}

double seq_similarity(std::span<const std::string> template_tokens,
                      std::span<const std::string> line_tokens) {
  if (template_tokens.size() != line_tokens.size()) {
    throw std::logic_error("seq_similarity: token lists differ in length");
  }
  if (template_tokens.empty()) return 0.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < template_tokens.size(); ++i) {
    if (template_tokens[i] != kWildcard && template_tokens[i] == line_tokens[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(template_tokens.size());
}

void DrainParams::validate() const {
  if (depth < 2) throw std::invalid_argument("drain depth must be >= 2");
  if (!(sim_threshold > 0.0 && sim_threshold <= 1.0)) {
    throw std::invalid_argument("drain sim_threshold must be in (0, 1]");
  }
  if (max_children < 1) throw std::invalid_argument("drain max_children must be >= 1");
}

DrainParams DrainParams::from_config(const KeyValueFile& kv) {
  DrainParams p;
  p.depth = static_cast<int>(kv.get_int("drain.depth", p.depth));
  p.sim_threshold = kv.get_double("drain.sim_threshold", p.sim_threshold);
  p.max_children = static_cast<int>(kv.get_int("drain.max_children", p.max_children));
  p.validate();
  return p;
}

DrainParser::DrainParser(DrainParams params) : params_(params) { params_.validate(); }

DrainParser::Node* DrainParser::descend(std::span<const std::string> tokens, bool create) {
  auto& slot = by_length_[tokens.size()];
  if (!slot) slot = std::make_unique<Node>();
  Node* node = slot.get();
  const auto layers = std::min<std::size_t>(static_cast<std::size_t>(params_.depth - 1),
                                            tokens.size());
  const auto limit = static_cast<std::size_t>(params_.max_children);
  for (std::size_t i = 0; i < layers; ++i) {
    std::string_view key = tokens[i];
    if (has_digit(key)) key = kWildcard;
    auto it = node->children.find(key);
    if (it == node->children.end() && key != kWildcard) {
      const bool has_catch_all = node->children.count(kWildcard) > 0;
      const std::size_t reserved = has_catch_all ? 0 : 1;
      if (create && node->children.size() + reserved < limit) {
        it = node->children.emplace(std::string(key), std::make_unique<Node>()).first;
      } else {
        key = kWildcard;
        it = node->children.find(key);
      }
    }
    if (it == node->children.end()) {
      if (!create) return nullptr;
      it = node->children.emplace(std::string(key), std::make_unique<Node>()).first;
    }
    node = it->second.get();
  }
  return node;
}

const DrainParser::Node* DrainParser::find_leaf(std::span<const std::string> tokens) const {
  const auto top = by_length_.find(tokens.size());
  if (top == by_length_.end()) return nullptr;
  const Node* node = top->second.get();
  const auto layers = std::min<std::size_t>(static_cast<std::size_t>(params_.depth - 1),
                                            tokens.size());
  for (std::size_t i = 0; i < layers; ++i) {
    std::string_view key = tokens[i];
    if (has_digit(key)) key = kWildcard;
    auto it = node->children.find(key);
    if (it == node->children.end()) it = node->children.find(kWildcard);
    if (it == node->children.end()) return nullptr;
    node = it->second.get();
  }
  return node;
}

std::pair<TemplateId, double> DrainParser::best_match(const Node& leaf,
                                                      std::span<const std::string> tokens) const {
  TemplateId best = kNoTemplate;
  double best_sim = -1.0;
  for (const TemplateId id : leaf.leaf) {
    const double sim = seq_similarity(templates_[id - 1].tokens, tokens);
    if (sim > best_sim) {
      best_sim = sim;
      best = id;
    }
  }
  return {best, best_sim};
}

TemplateId DrainParser::parse(std::span<const std::string> tokens) {
  if (tokens.empty()) throw std::invalid_argument("cannot parse an empty token list");
  Node* leaf = descend(tokens, true);
  const auto [best, sim] = best_match(*leaf, tokens);
  if (best != kNoTemplate && sim >= params_.sim_threshold) {
    auto& t = templates_[best - 1];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (t.tokens[i] != tokens[i]) t.tokens[i] = kWildcard;
    }
    ++t.support_count;
    return best;
  }
  const auto id = static_cast<TemplateId>(templates_.size() + 1);
  templates_.push_back(LogTemplate{id, {tokens.begin(), tokens.end()}, 1});
  leaf->leaf.push_back(id);
  return id;
}

std::optional<TemplateId> DrainParser::match(std::span<const std::string> tokens) const {
  if (tokens.empty()) return std::nullopt;
  const Node* leaf = find_leaf(tokens);
  if (leaf == nullptr) return std::nullopt;
  const auto [best, sim] = best_match(*leaf, tokens);
  if (best == kNoTemplate || sim < params_.sim_threshold) return std::nullopt;
  return best;
}

std::vector<LogTemplate> DrainParser::export_templates() const { return templates_; }

const LogTemplate& DrainParser::get(TemplateId id) const {
  if (id < 1 || static_cast<std::size_t>(id) > templates_.size()) {
    throw std::out_of_range("unknown template id " + std::to_string(id));
  }
  return templates_[id - 1];
}

int DrainParser::max_path_length() const {
  int best = 0;
  auto walk = [&](auto&& self, const Node& node, int depth) -> void {
    best = std::max(best, depth);
    for (const auto& [key, child] : node.children) self(self, *child, depth + 1);
  };
  for (const auto& [len, node] : by_length_) walk(walk, *node, 1);
  return best + 1;  // leaf group hangs below the last internal node
}

std::size_t DrainParser::max_fanout() const {
  std::size_t best = 0;
  auto walk = [&](auto&& self, const Node& node) -> void {
    best = std::max(best, node.children.size());
    for (const auto& [key, child] : node.children) self(self, *child);
  };
  for (const auto& [len, node] : by_length_) walk(walk, *node);
  return best;
}

DrainParser DrainParser::import_templates(const std::vector<LogTemplate>& templates,
                                          DrainParams params) {
  DrainParser parser(params);
  std::vector<LogTemplate> sorted = templates;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.template_id < b.template_id; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    auto& t = sorted[i];
    if (t.template_id != static_cast<TemplateId>(i + 1)) {
      throw std::invalid_argument("template ids must be dense and start at 1");
    }
    if (t.tokens.empty() || t.support_count < 1) {
      throw std::invalid_argument("malformed template " + std::to_string(t.template_id));
    }
    Node* leaf = parser.descend(t.tokens, true);
    leaf->leaf.push_back(t.template_id);
    parser.templates_.push_back(std::move(t));
  }
  return parser;
}

void write_templates(std::ostream& out, const std::vector<LogTemplate>& templates) {
  for (const auto& t : templates) {
    out << t.template_id << '\t' << t.support_count << '\t' << t.text() << '\n';
  }
}

std::vector<LogTemplate> read_templates(std::istream& in) {
  std::vector<LogTemplate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw std::invalid_argument("template file line " + std::to_string(line_no) +
                                  ": expected 3 tab-separated fields");
    }
    LogTemplate t;
    t.template_id = static_cast<TemplateId>(parse_int(std::string_view(line).substr(0, tab1)));
    t.support_count =
        static_cast<std::size_t>(parse_int(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1)));
    t.tokens = tokenize(std::string_view(line).substr(tab2 + 1));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EventSequence> parse_groups(const RawLog& log, const GroupedLog& grouped,
                                        DrainParser& parser, std::span<const MaskRule> rules,
                                        bool frozen) {
  std::unordered_map<std::size_t, TemplateId> by_line;
  by_line.reserve(log.records.size());
  for (const auto& rec : log.records) {
    const auto tokens = preprocess_masks(tokenize(rec.content), rules);
    TemplateId id = kNoTemplate;
    if (!tokens.empty()) {
      id = frozen ? parser.match(tokens).value_or(kNoTemplate) : parser.parse(tokens);
    }
    by_line[rec.line_no] = id;
  }
  std::vector<EventSequence> out;
  out.reserve(grouped.groups.size());
  for (const auto& g : grouped.groups) {
    EventSequence seq{g.seq_key, {}, g.label};
    seq.events.reserve(g.records.size());
    for (const auto& rec : g.records) {
      const auto it = by_line.find(rec.line_no);
      // Unmatched lines stay in frozen mode so that they surface as unknown events.
      if (it != by_line.end() && (frozen || it->second != kNoTemplate)) {
        seq.events.push_back(it->second);
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace logmask
