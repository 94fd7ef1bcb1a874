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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "logmask/sequence.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = LOGMASK_FIXTURES;

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "logmask_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  const auto capture = fs::temp_directory_path() / ("logmask_cli_out_" + std::to_string(counter++));
  const std::string cmd =
      std::string("\"") + LOGMASK_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(capture);
  fs::remove(capture);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("parsing an empty file succeeds with no sequences") {
  const auto dir = scratch("empty");
  const auto r = run("parse -i " + q(kFixtures / "empty.log") + " -o " + q(dir / "events.tsv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("lines=0\n") != std::string::npos);
  CHECK(r.out.find("templates=0\n") != std::string::npos);
  CHECK(fs::exists(dir / "events.tsv"));
}

TEST_CASE("six lines of two shapes give two templates, reproducibly") {
  const auto dir = scratch("six");
  const std::string args = "parse -i " + q(kFixtures / "six_lines.log") + " --templates " +
                           q(dir / "templates.tsv") + " -o " + q(dir / "events.tsv");
  const auto r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("lines=6\n") != std::string::npos);
  CHECK(r.out.find("templates=2\n") != std::string::npos);
  const auto templates = slurp(dir / "templates.tsv");
  CHECK(templates == "1\t3\topen file <*> ok\n2\t3\tconnection closed by <*>\n");
  CHECK(slurp(dir / "events.tsv") == "six_lines.log\tnormal\t1 1 1 2 2 2\n");
  const auto events = slurp(dir / "events.tsv");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(dir / "templates.tsv") == templates);
  CHECK(slurp(dir / "events.tsv") == events);
}

TEST_CASE("HDFS-style blocks with a label list") {
  const auto dir = scratch("hdfs");
  const auto r = run("parse -i " + q(kFixtures / "hdfs_small.log") + " -c " +
                     q(kFixtures / "hdfs_small.cfg") + " -o " + q(dir / "events.tsv") +
                     " --grouped " + q(dir / "grouped.tsv"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("lines=10\n") != std::string::npos);
  CHECK(r.out.find("sequences=3\n") != std::string::npos);
  CHECK(r.out.find("anomalous_sequences=1\n") != std::string::npos);
  CHECK(r.out.find("header_mismatches=0\n") != std::string::npos);
  const auto seqs = logmask::read_event_sequences(dir / "events.tsv");
  REQUIRE(seqs.size() == 3);
  CHECK(seqs[0].seq_id == "blk_-1608999687919862906");
  CHECK(seqs[0].events.size() == 4);
  CHECK(seqs[2].label == logmask::Label::Anomalous);
  // Both "Receiving block" lines share a template.
  CHECK(seqs[0].events[0] == seqs[1].events[0]);
  CHECK(slurp(dir / "grouped.tsv").find("blk_-3544583377289625738\tanomalous\t3\n") !=
        std::string::npos);
}

TEST_CASE("BGL-style node sequences") {
  const auto dir = scratch("bgl");
  const auto r = run("parse -i " + q(kFixtures / "bgl_small.log") + " -c " +
                     q(kFixtures / "bgl_small.cfg") + " -o " + q(dir / "events.tsv"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sequences=3\n") != std::string::npos);
  CHECK(r.out.find("anomalous_sequences=1\n") != std::string::npos);
}

TEST_CASE("missing inputs and bad arguments exit with 2") {
  const auto dir = scratch("bad");
  CHECK(run("parse -i /nonexistent.log -o " + q(dir / "e.tsv")).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("train -t /nonexistent.tsv -o " + q(dir / "m")).code == 2);
}

TEST_CASE("prep, train, eval and score end to end") {
  const auto dir = scratch("pipeline");
  REQUIRE(run("gen-synth --kind deterministic --sequences 40 --scripts 2 --seed 5 --anomalous 1 -o " +
              q(dir / "all.tsv"))
              .code == 0);
  const auto prep = run("prep -e " + q(dir / "all.tsv") + " -o " + q(dir) + " --split 0.5 --seed 2");
  REQUIRE(prep.code == 0);
  CHECK(logmask::read_event_sequences(dir / "train.tsv").size() == 20);
  CHECK(logmask::read_event_sequences(dir / "anomalous.tsv").size() == 1);

  REQUIRE(run("train -t " + q(dir / "train.tsv") + " -o " + q(dir / "model.txt") +
              " --model ngram --window 10 --mask-position 1")
              .code == 0);
  const auto eval = run("eval -m " + q(dir / "model.txt") + " -t " + q(dir / "test.tsv") + " -r " +
                        q(dir / "report.txt"));
  REQUIRE(eval.code == 0);
  CHECK(eval.out.find("top1_accuracy=1\n") != std::string::npos);
  CHECK(slurp(dir / "report.txt").find("top1_accuracy=1\n") != std::string::npos);

  SUBCASE("the injected event is the most suspicious") {
    const auto anomaly = logmask::read_event_sequences(dir / "anomalous.tsv").at(0);
    const auto expected_t = (anomaly.events.size() - 1) / 2;
    const auto r = run("score -m " + q(dir / "model.txt") + " -e " + q(dir / "anomalous.tsv") +
                       " -k 1 -o " + q(dir / "scores.tsv"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("suspicious seq_id=anomaly-0 t=" + std::to_string(expected_t) + " ") !=
          std::string::npos);
    CHECK(count_lines(slurp(dir / "scores.tsv")) == anomaly.events.size() + 1);
  }
  SUBCASE("k beyond the event count lists every event") {
    const auto r = run("score -m " + q(dir / "model.txt") + " -e " + q(dir / "anomalous.tsv") +
                       " -k 100000");
    REQUIRE(r.code == 0);
    const auto anomaly = logmask::read_event_sequences(dir / "anomalous.tsv").at(0);
    std::size_t listed = 0;
    for (std::size_t pos = 0; (pos = r.out.find("suspicious ", pos)) != std::string::npos; ++pos) {
      ++listed;
    }
    CHECK(listed == anomaly.events.size() + 1);
  }
  SUBCASE("a window that differs from training is rejected") {
    const auto r = run("eval -m " + q(dir / "model.txt") + " -t " + q(dir / "test.tsv") +
                       " --window 5");
    CHECK(r.code == 2);
    CHECK(r.out.find("error:") != std::string::npos);
  }
  SUBCASE("a neural model trains and evaluates") {
    REQUIRE(run("train -t " + q(dir / "train.tsv") + " -o " + q(dir / "cnn.txt") +
                " --model cnn --window 5 --epochs 2 --embedding-dim 8 --filters 8 --hidden 8")
                .code == 0);
    const auto r = run("eval -m " + q(dir / "cnn.txt") + " -t " + q(dir / "test.tsv"));
    CHECK(r.code == 0);
    CHECK(r.out.find("n_samples=") != std::string::npos);
  }
}

TEST_CASE("sweeps write one row per config and ignore the worker count") {
  const auto dir = scratch("sweep");
  REQUIRE(run("gen-synth --sequences 300 --vocab 8 --max-length 40 --seed 3 -o " +
              q(dir / "all.tsv"))
              .code == 0);
  const auto spec = q(kFixtures / "ngram_defaults.sweep");
  const auto one = run("sweep -e " + q(dir / "all.tsv") + " -s " + spec + " -o " +
                       q(dir / "w1.csv") + " -w 1 --baseline-table " + q(dir / "baseline.csv"));
  REQUIRE(one.code == 0);
  REQUIRE(run("sweep -e " + q(dir / "all.tsv") + " -s " + spec + " -o " + q(dir / "w4.csv") +
              " -w 4")
              .code == 0);
  const auto csv = slurp(dir / "w1.csv");
  CHECK(count_lines(csv) == 1 + 14);
  CHECK(csv == slurp(dir / "w4.csv"));
  CHECK(count_lines(slurp(dir / "baseline.csv")) == 2);
}

TEST_CASE("an invalid sweep spec fails before writing anything") {
  const auto dir = scratch("invalid");
  REQUIRE(run("gen-synth --sequences 20 --seed 1 -o " + q(dir / "all.tsv")).code == 0);
  const auto r = run("sweep -e " + q(dir / "all.tsv") + " -s " + q(kFixtures / "invalid.sweep") +
                     " -o " + q(dir / "out.csv"));
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir / "out.csv"));
}
