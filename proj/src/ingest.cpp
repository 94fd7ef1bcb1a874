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

#include "logmask/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace logmask {

Label parse_label(std::string_view text) {
  const auto t = trim(text);
  if (t == "normal" || t == "Normal" || t == "0") return Label::Normal;
  if (t == "anomalous" || t == "Anomaly" || t == "anomaly" || t == "Anomalous" || t == "1") {
    return Label::Anomalous;
  }
  throw std::invalid_argument("unknown label '" + std::string(t) + "'");
}

namespace {

std::unordered_map<std::string, Label> load_key_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label key list: " + path.string());
  std::unordered_map<std::string, Label> keys;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_list(t, ',');
    if (fields.size() < 2) throw std::invalid_argument("bad key-list line: " + line);
    try {
      keys[fields[0]] = parse_label(fields[1]);
    } catch (const std::invalid_argument&) {
      // Tolerate a header row such as `BlockId,Label`.
      if (!first) throw;
    }
    first = false;
  }
  return keys;
}

LabelRule parse_label_rule(const std::string& text, const std::filesystem::path& base_dir) {
  LabelRule rule;
  if (text == "all-normal") {
    rule.kind = LabelRule::Kind::AllNormal;
  } else if (text == "all-anomalous") {
    rule.kind = LabelRule::Kind::AllAnomalous;
  } else if (text.rfind("hint-not-equal:", 0) == 0) {
    rule.kind = LabelRule::Kind::HintNotEqual;
    rule.normal_hint = text.substr(15);
  } else if (text.rfind("key-list:", 0) == 0) {
    rule.kind = LabelRule::Kind::KeyList;
    std::filesystem::path p = text.substr(9);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    rule.keys = load_key_list(p);
  } else {
    throw std::invalid_argument("unknown label_rule '" + text + "'");
  }
  return rule;
}

void extract_keys(RawLogRecord& rec, const LoaderConfig& cfg, const std::smatch* header,
                  const std::string& source_name) {
  switch (cfg.seq_key_mode) {
    case SeqKeyMode::PerFile:
      rec.seq_keys.push_back(source_name);
      break;
    case SeqKeyMode::HeaderGroup:
      if (header != nullptr && static_cast<std::size_t>(cfg.seq_key_group) < header->size() &&
          (*header)[cfg.seq_key_group].matched) {
        rec.seq_keys.push_back((*header)[cfg.seq_key_group].str());
      }
      break;
    case SeqKeyMode::ContentPattern: {
      const auto& re = *cfg.seq_key_pattern;
      for (auto it = std::sregex_iterator(rec.content.begin(), rec.content.end(), re);
           it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        auto key = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
        if (std::find(rec.seq_keys.begin(), rec.seq_keys.end(), key) == rec.seq_keys.end()) {
          rec.seq_keys.push_back(std::move(key));
        }
      }
      break;
    }
  }
}

}  // namespace

LoaderConfig LoaderConfig::from_key_values(const KeyValueFile& kv,
                                           const std::filesystem::path& base_dir) {
  LoaderConfig cfg;
  cfg.raw = kv;
  if (auto hp = kv.get("header_pattern"); hp && !hp->empty()) {
    cfg.header_pattern_text = *hp;
    cfg.header_pattern.emplace(*hp, std::regex::ECMAScript | std::regex::optimize);
    const auto groups = static_cast<int>(cfg.header_pattern->mark_count());
    cfg.content_group = static_cast<int>(kv.get_int("content_group", groups));
    cfg.label_group = static_cast<int>(kv.get_int("label_group", 0));
    if (cfg.content_group < 0 || cfg.content_group > groups || cfg.label_group < 0 ||
        cfg.label_group > groups) {
      throw std::invalid_argument("header capture group index out of range");
    }
  } else if (kv.has("label_group") || kv.has("content_group")) {
    throw std::invalid_argument("capture groups require header_pattern");
  }

  const auto mode = kv.get_or("seq_key", "per-file");
  if (mode == "per-file") {
    cfg.seq_key_mode = SeqKeyMode::PerFile;
    if (kv.has("seq_key_pattern") || kv.has("seq_key_group")) {
      throw std::invalid_argument("per-file mode excludes seq_key_pattern/seq_key_group");
    }
  } else if (mode == "pattern") {
    cfg.seq_key_mode = SeqKeyMode::ContentPattern;
    cfg.seq_key_pattern_text = kv.require("seq_key_pattern");
    cfg.seq_key_pattern.emplace(cfg.seq_key_pattern_text,
                                std::regex::ECMAScript | std::regex::optimize);
    if (kv.has("seq_key_group")) throw std::invalid_argument("seq_key=pattern excludes seq_key_group");
  } else if (mode == "header") {
    cfg.seq_key_mode = SeqKeyMode::HeaderGroup;
    if (!cfg.header_pattern) throw std::invalid_argument("seq_key=header requires header_pattern");
    cfg.seq_key_group = static_cast<int>(kv.get_int("seq_key_group", 0));
    if (cfg.seq_key_group < 1 ||
        cfg.seq_key_group > static_cast<int>(cfg.header_pattern->mark_count())) {
      throw std::invalid_argument("seq_key_group out of range");
    }
    if (kv.has("seq_key_pattern")) throw std::invalid_argument("seq_key=header excludes seq_key_pattern");
  } else {
    throw std::invalid_argument("seq_key must be per-file, pattern or header");
  }

  cfg.label_rule = parse_label_rule(kv.get_or("label_rule", "all-normal"), base_dir);
  if (cfg.label_rule.kind == LabelRule::Kind::HintNotEqual && cfg.label_group == 0) {
    throw std::invalid_argument("label_rule hint-not-equal requires label_group");
  }
  cfg.mask_rules = kv.with_prefix("mask.");
  return cfg;
}

LoaderConfig LoaderConfig::load(const std::filesystem::path& path) {
  return from_key_values(KeyValueFile::load(path), path.parent_path());
}

LoaderConfig LoaderConfig::per_file_default() { return from_key_values(KeyValueFile{}); }

std::string sanitize_utf8(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  const auto* s = reinterpret_cast<const unsigned char*>(in.data());
  const std::size_t n = in.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
    }
    bool ok = len > 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) ok = (s[i + k] & 0xC0) == 0x80;
    if (ok && len == 3) {
      ok = !(c == 0xE0 && s[i + 1] < 0xA0) && !(c == 0xED && s[i + 1] >= 0xA0);
    } else if (ok && len == 4) {
      ok = !(c == 0xF0 && s[i + 1] < 0x90) && !(c == 0xF4 && s[i + 1] >= 0x90);
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

RawLog load_raw_log_text(std::string_view text, const LoaderConfig& cfg,
                         const std::string& source_name) {
  RawLog log;
  log.source = source_name;
  const std::string clean = sanitize_utf8(text);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < clean.size()) {
    auto end = clean.find('\n', start);
    if (end == std::string::npos) end = clean.size();
    std::string line = clean.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    RawLogRecord rec;
    rec.line_no = line_no;
    std::smatch m;
    const std::smatch* header = nullptr;
    if (cfg.header_pattern) {
      if (std::regex_match(line, m, *cfg.header_pattern)) {
        header = &m;
        rec.content = m[cfg.content_group].str();
        if (cfg.label_group > 0 && m[cfg.label_group].matched) {
          rec.label_hint = m[cfg.label_group].str();
        }
      } else {
        ++log.header_mismatches;
      }
    }
    if (trim(rec.content).empty()) rec.content = line;
    extract_keys(rec, cfg, header, source_name);
    log.records.push_back(std::move(rec));
  }
  return log;
}

RawLog load_raw_log(const std::filesystem::path& path, const LoaderConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read log file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("I/O error reading " + path.string());
  auto log = load_raw_log_text(buf.str(), cfg, path.filename().string());
  log.source = path;
  return log;
}

GroupedLog group_sequences(const std::vector<RawLogRecord>& records, const LoaderConfig& cfg) {
  GroupedLog out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& rec : records) {
    if (rec.seq_keys.empty()) {
      out.rejects.push_back(rec);
      continue;
    }
    for (const auto& key : rec.seq_keys) {
      auto [it, inserted] = index.try_emplace(key, out.groups.size());
      if (inserted) out.groups.push_back(SequenceGroup{key, {}, Label::Normal});
      out.groups[it->second].records.push_back(rec);
    }
  }

  const auto& rule = cfg.label_rule;
  for (auto& g : out.groups) {
    switch (rule.kind) {
      case LabelRule::Kind::AllNormal:
        g.label = Label::Normal;
        break;
      case LabelRule::Kind::AllAnomalous:
        g.label = Label::Anomalous;
        break;
      case LabelRule::Kind::HintNotEqual:
        g.label = std::any_of(g.records.begin(), g.records.end(),
                              [&](const RawLogRecord& r) {
                                return r.label_hint && *r.label_hint != rule.normal_hint;
                              })
                      ? Label::Anomalous
                      : Label::Normal;
        break;
      case LabelRule::Kind::KeyList: {
        const auto it = rule.keys.find(g.seq_key);
        g.label = it == rule.keys.end() ? rule.fallback : it->second;
        break;
      }
    }
  }
  return out;
}

void write_grouped_log(std::ostream& out, const GroupedLog& grouped) {
  for (const auto& g : grouped.groups) {
    out << g.seq_key << '\t' << to_string(g.label) << '\t' << g.records.size() << '\n';
  }
}

}  // namespace logmask
