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
#include <iosfwd>
#include <string>
#include <vector>

#include "logmask/types.hpp"

namespace logmask {

/// One run/block/node trace. Before encoding `events` holds template ids,
/// afterwards dense vocabulary event ids.
struct EventSequence {
  std::string seq_id;
  std::vector<std::int32_t> events;
  Label label = Label::Normal;

  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

/// Parsed-event file: `seq_key<TAB>label<TAB>space-separated ids`.
void write_event_sequences(std::ostream& out, const std::vector<EventSequence>& seqs);
std::vector<EventSequence> read_event_sequences(std::istream& in);
std::vector<EventSequence> read_event_sequences(const std::filesystem::path& path);
void write_event_sequences(const std::filesystem::path& path,
                           const std::vector<EventSequence>& seqs);

}  // namespace logmask
