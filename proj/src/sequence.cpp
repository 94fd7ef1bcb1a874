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

#include "logmask/sequence.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "logmask/config_file.hpp"

namespace logmask {

void write_event_sequences(std::ostream& out, const std::vector<EventSequence>& seqs) {
  for (const auto& s : seqs) {
    out << s.seq_id << '\t' << to_string(s.label) << '\t';
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      if (i > 0) out << ' ';
      out << s.events[i];
    }
    out << '\n';
  }
}

std::vector<EventSequence> read_event_sequences(std::istream& in) {
  std::vector<EventSequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw std::invalid_argument("event file line " + std::to_string(line_no) +
                                  ": expected seq_key<TAB>label<TAB>ids");
    }
    EventSequence seq;
    seq.seq_id = line.substr(0, tab1);
    seq.label = parse_label(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
    for (const auto& tok : split_list(std::string_view(line).substr(tab2 + 1), ' ')) {
      if (tok.empty()) continue;
      seq.events.push_back(static_cast<std::int32_t>(parse_int(tok)));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<EventSequence> read_event_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event file: " + path.string());
  return read_event_sequences(in);
}

void write_event_sequences(const std::filesystem::path& path,
                           const std::vector<EventSequence>& seqs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_event_sequences(out, seqs);
}

}  // namespace logmask
