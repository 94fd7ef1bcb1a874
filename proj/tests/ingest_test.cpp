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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "logmask/ingest.hpp"

using namespace logmask;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "logmask_ingest_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

LoaderConfig hdfs_config() {
  return LoaderConfig::from_key_values(KeyValueFile::parse(
      "header_pattern = ^(\\d{6}) (\\d{6}) (\\d+) (\\w+) ([^:]+): (.*)$\n"
      "seq_key = pattern\n"
      "seq_key_pattern = (blk_-?\\d+)\n"));
}

LoaderConfig bgl_config() {
  return LoaderConfig::from_key_values(KeyValueFile::parse(
      "header_pattern = ^(\\S+) (\\d+) (\\S+) (\\S+) (\\S+) (\\S+) (\\S+) (\\S+) (\\S+) (.*)$\n"
      "content_group = 10\n"
      "label_group = 1\n"
      "seq_key = header\n"
      "seq_key_group = 4\n"
      "label_rule = hint-not-equal:-\n"));
}

RawLogRecord rec(std::size_t line, std::string key) {
  return RawLogRecord{line, "msg " + std::to_string(line), {std::move(key)}, std::nullopt};
}

}  // namespace

TEST_CASE("empty file loads as no records") {
  const auto p = write_temp("empty.log", "");
  const auto log = load_raw_log(p, LoaderConfig::per_file_default());
  CHECK(log.records.empty());
  CHECK(log.header_mismatches == 0);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(load_raw_log("/nonexistent/x.log", LoaderConfig::per_file_default()),
                  std::runtime_error);
}

TEST_CASE("three matching lines keep their line numbers") {
  const auto cfg = LoaderConfig::from_key_values(
      KeyValueFile::parse("header_pattern = ^(\\w+): (.*)$\n"));
  const auto log = load_raw_log_text("INFO: a b\nWARN: c\nINFO: d e f\n", cfg, "f.log");
  REQUIRE(log.records.size() == 3);
  CHECK(log.records[0].line_no == 1);
  CHECK(log.records[1].line_no == 2);
  CHECK(log.records[2].line_no == 3);
  CHECK(log.records[1].content == "c");
  CHECK(log.header_mismatches == 0);
}

TEST_CASE("blank lines are skipped but still numbered") {
  const auto log = load_raw_log_text("a\n\n   \nb\r\n", LoaderConfig::per_file_default(), "f");
  REQUIRE(log.records.size() == 2);
  CHECK(log.records[1].line_no == 4);
  CHECK(log.records[1].content == "b");
}

TEST_CASE("HDFS block ids become sequence keys") {
  const std::string line =
      "081109 203518 143 INFO dfs.DataNode$DataXceiver: Receiving block "
      "blk_-1608999687919862906 src: /10.250.19.102:54106 dest: /10.250.19.102:50010";
  const auto log = load_raw_log_text(line, hdfs_config(), "HDFS.log");
  REQUIRE(log.records.size() == 1);
  const auto& r = log.records[0];
  CHECK(r.seq_keys == std::vector<std::string>{"blk_-1608999687919862906"});
  CHECK(r.content.rfind("Receiving block", 0) == 0);
}

TEST_CASE("lines not matching the header are kept whole and counted") {
  const auto log = load_raw_log_text("garbage line blk_7\n", hdfs_config(), "HDFS.log");
  REQUIRE(log.records.size() == 1);
  CHECK(log.records[0].content == "garbage line blk_7");
  CHECK(log.records[0].seq_keys == std::vector<std::string>{"blk_7"});
  CHECK(log.header_mismatches == 1);
}

TEST_CASE("invalid UTF-8 bytes are replaced") {
  CHECK(sanitize_utf8("ok") == "ok");
  CHECK(sanitize_utf8("a\xff"
                      "b") == "a\xEF\xBF\xBD"
                              "b");
  CHECK(sanitize_utf8("\xC3\xA9") == "\xC3\xA9");
  CHECK(sanitize_utf8("\xC3") == "\xEF\xBF\xBD");
  const auto log = load_raw_log_text("x\xfe y\n", LoaderConfig::per_file_default(), "f");
  CHECK(log.records[0].content == "x\xEF\xBF\xBD y");
}

TEST_CASE("grouping partitions by key in order") {
  const std::vector<RawLogRecord> records{rec(1, "A"), rec(2, "B"), rec(3, "A")};
  const auto g = group_sequences(records, hdfs_config());
  REQUIRE(g.groups.size() == 2);
  CHECK(g.groups[0].seq_key == "A");
  REQUIRE(g.groups[0].records.size() == 2);
  CHECK(g.groups[0].records[0].line_no == 1);
  CHECK(g.groups[0].records[1].line_no == 3);
  CHECK(g.groups[1].seq_key == "B");
  CHECK(g.groups[1].records.size() == 1);
}

TEST_CASE("per-file mode yields one sequence labelled by the rule") {
  auto cfg = LoaderConfig::from_key_values(KeyValueFile::parse("label_rule = all-anomalous\n"));
  const auto log = load_raw_log_text("one\ntwo\nthree\n", cfg, "container_01.log");
  const auto g = group_sequences(log.records, cfg);
  REQUIRE(g.groups.size() == 1);
  CHECK(g.groups[0].seq_key == "container_01.log");
  CHECK(g.groups[0].records.size() == 3);
  CHECK(g.groups[0].label == Label::Anomalous);
}

TEST_CASE("BGL alert tags mark a node sequence anomalous") {
  // Tag "-" is a non-alert line; any other tag is an alert.
  const std::string fixture =
      "- 1117838570 2005.06.03 R02-M1-N0-C:J12-U11 2005-06-03-15.42.50.675872 R02-M1-N0-C:J12-U11 "
      "RAS KERNEL INFO instruction cache parity error corrected\n"
      "- 1117838573 2005.06.03 R02-M1-N0-C:J12-U11 2005-06-03-15.42.53.276129 R02-M1-N0-C:J12-U11 "
      "RAS KERNEL INFO instruction cache parity error corrected\n"
      "- 1117869872 2005.06.04 R23-M1-N8-I:J18-U11 2005-06-04-00.24.32.432192 R23-M1-N8-I:J18-U11 "
      "RAS APP FATAL ciod: failed to read message prefix on control stream\n"
      "KERNDTLB 1118536327 2005.06.11 R30-M0-N9-C:J16-U01 2005-06-11-17.32.07.581048 "
      "R30-M0-N9-C:J16-U01 RAS KERNEL FATAL data TLB error interrupt\n"
      "- 1118536328 2005.06.11 R30-M0-N9-C:J16-U01 2005-06-11-17.32.08.581048 "
      "R30-M0-N9-C:J16-U01 RAS KERNEL INFO generating core.2275\n";
  const auto cfg = bgl_config();
  const auto log = load_raw_log_text(fixture, cfg, "BGL.log");
  REQUIRE(log.records.size() == 5);
  CHECK(log.records[3].label_hint == "KERNDTLB");
  CHECK(log.records[0].content == "instruction cache parity error corrected");
  const auto g = group_sequences(log.records, cfg);
  REQUIRE(g.groups.size() == 3);
  CHECK(g.groups[0].seq_key == "R02-M1-N0-C:J12-U11");
  CHECK(g.groups[0].label == Label::Normal);
  // Severity FATAL alone does not matter; only the tag does.
  CHECK(g.groups[1].label == Label::Normal);
  CHECK(g.groups[2].seq_key == "R30-M0-N9-C:J16-U01");
  CHECK(g.groups[2].label == Label::Anomalous);
  CHECK(g.groups[2].records.size() == 2);
}

TEST_CASE("a line naming several blocks joins every block") {
  const auto cfg = hdfs_config();
  const auto log = load_raw_log_text(
      "081109 203518 143 INFO dfs.FSNamesystem: BLOCK* ask to delete blk_1 blk_2\n"
      "081109 203519 143 INFO dfs.DataNode: deleting blk_2\n"
      "081109 203520 143 INFO dfs.DataNode: no block here\n",
      cfg, "HDFS.log");
  const auto g = group_sequences(log.records, cfg);
  REQUIRE(g.groups.size() == 2);
  CHECK(g.groups[0].seq_key == "blk_1");
  CHECK(g.groups[0].records.size() == 1);
  CHECK(g.groups[1].records.size() == 2);
  REQUIRE(g.rejects.size() == 1);
  CHECK(g.rejects[0].line_no == 3);
}

TEST_CASE("key-list labels with a header row") {
  const auto labels = write_temp("anomaly_label.csv", "BlockId,Label\nblk_1,Anomaly\nblk_2,Normal\n");
  auto kv = KeyValueFile::parse("seq_key = pattern\nseq_key_pattern = (blk_-?\\d+)\n");
  kv.set("label_rule", "key-list:" + labels.filename().string());
  const auto cfg = LoaderConfig::from_key_values(kv, labels.parent_path());
  const auto log = load_raw_log_text("x blk_1\ny blk_2\nz blk_3\n", cfg, "f");
  const auto g = group_sequences(log.records, cfg);
  REQUIRE(g.groups.size() == 3);
  CHECK(g.groups[0].label == Label::Anomalous);
  CHECK(g.groups[1].label == Label::Normal);
  CHECK(g.groups[2].label == Label::Normal);
}

TEST_CASE("loader configs reject conflicting key modes") {
  CHECK_THROWS_AS(LoaderConfig::from_key_values(KeyValueFile::parse(
                      "seq_key = per-file\nseq_key_pattern = x\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(LoaderConfig::from_key_values(KeyValueFile::parse("seq_key = header\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(LoaderConfig::from_key_values(KeyValueFile::parse("seq_key = pattern\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(LoaderConfig::from_key_values(KeyValueFile::parse("label_rule = sometimes\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      LoaderConfig::from_key_values(KeyValueFile::parse("label_rule = hint-not-equal:-\n")),
      std::invalid_argument);
}

TEST_CASE("grouping properties on random records") {
  std::mt19937_64 rng(7);
  const auto cfg = hdfs_config();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RawLogRecord> records;
    const auto n = 1 + rng() % 60;
    std::size_t multi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      RawLogRecord r{i + 1, "m", {}, std::nullopt};
      const auto keys = rng() % 4;  // 0 keys -> reject, up to 3 keys
      for (std::size_t k = 0; k < keys; ++k) {
        auto key = "k" + std::to_string(rng() % 5);
        if (std::find(r.seq_keys.begin(), r.seq_keys.end(), key) == r.seq_keys.end()) {
          r.seq_keys.push_back(key);
        }
      }
      multi += r.seq_keys.size() > 1 ? 1 : 0;
      records.push_back(r);
    }
    const auto g = group_sequences(records, cfg);
    std::size_t total = g.rejects.size();
    for (const auto& grp : g.groups) {
      total += grp.records.size();
      for (std::size_t i = 1; i < grp.records.size(); ++i) {
        CHECK(grp.records[i - 1].line_no < grp.records[i].line_no);
      }
    }
    CHECK(total >= records.size());
    if (multi == 0) CHECK(total == records.size());
    const auto again = group_sequences(records, cfg);
    REQUIRE(again.groups.size() == g.groups.size());
    for (std::size_t i = 0; i < g.groups.size(); ++i) CHECK(again.groups[i].label == g.groups[i].label);
  }
}

TEST_CASE("grouped log file format") {
  GroupedLog g;
  g.groups.push_back({"blk_1", {rec(1, "blk_1"), rec(2, "blk_1")}, Label::Anomalous});
  g.groups.push_back({"blk_2", {rec(3, "blk_2")}, Label::Normal});
  std::ostringstream os;
  write_grouped_log(os, g);
  CHECK(os.str() == "blk_1\tanomalous\t2\nblk_2\tnormal\t1\n");
}
