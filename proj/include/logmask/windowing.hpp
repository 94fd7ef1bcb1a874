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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "logmask/sequence.hpp"
#include "logmask/types.hpp"

namespace logmask {

/// Dense event ids for the templates seen in training, followed by three
/// reserved ids: start padding, end padding, unknown.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Ids are assigned in first-occurrence order. Throws on an empty corpus.
  static Vocabulary build(const std::vector<EventSequence>& train);
  static Vocabulary from_templates(std::vector<TemplateId> ordered);

  [[nodiscard]] EventId event_of(TemplateId id) const;
  /// Template behind a dense id; kNoTemplate for reserved ids.
  [[nodiscard]] TemplateId template_of(EventId id) const;
  [[nodiscard]] bool contains(TemplateId id) const { return index_.count(id) > 0; }

  [[nodiscard]] EventId sos() const { return static_cast<EventId>(templates_.size()); }
  [[nodiscard]] EventId eos() const { return sos() + 1; }
  [[nodiscard]] EventId unk() const { return sos() + 2; }
  [[nodiscard]] std::size_t size() const { return templates_.size() + 3; }
  [[nodiscard]] std::size_t template_count() const { return templates_.size(); }
  [[nodiscard]] const std::vector<TemplateId>& templates() const { return templates_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.templates_ == b.templates_;
  }

 private:
  std::vector<TemplateId> templates_;
  std::unordered_map<TemplateId, EventId> index_;
};

/// Unknown template ids become `vocab.unk()`.
EventSequence encode(const EventSequence& seq, const Vocabulary& vocab);
std::vector<EventSequence> encode_all(const std::vector<EventSequence>& seqs,
                                      const Vocabulary& vocab);

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  bool unique_only = false;

  void validate() const;
};

struct SplitResult {
  std::vector<EventSequence> train;
  std::vector<EventSequence> test;
  /// Anomalous sequences never train; they are kept for scoring.
  std::vector<EventSequence> anomalous;
};

/// round-half-up of p * n.
std::size_t train_count(double p, std::size_t n);

/// Seeded shuffle of the normal sequences; the first train_count(p, N) train.
/// Throws std::domain_error ("degenerate split") when either side would be empty.
/// `unique_only` is not applied here; see dedup_sequences.
SplitResult split_train_test(const std::vector<EventSequence>& sequences, const SplitSpec& spec);

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// First occurrence of each distinct event list, order preserved.
std::vector<EventSequence> dedup_sequences(const std::vector<EventSequence>& sequences);
std::size_t count_distinct(const std::vector<EventSequence>& sequences);

struct WindowSpec {
  int window = 5;  // n, masked slot included
  int mask = 0;    // m, distance of the masked slot from the last window position

  void validate() const;
  [[nodiscard]] int context_size() const { return window - 1; }
  /// Index of the masked slot inside the window.
  [[nodiscard]] int mask_index() const { return window - 1 - mask; }
};

struct MaskedSample {
  std::vector<EventId> context;
  EventId target = 0;
  std::size_t seq_index = 0;  // position of the source sequence in its list
  std::size_t t = 0;          // target index; t == L is the end-of-sequence slot
};

struct Padding {
  EventId sos;
  EventId eos;
};

/// One sample per target index t in [0, L]; missing neighbours read SoS on the
/// left and EoS on the right, and the t == L target is EoS itself.
std::vector<MaskedSample> pad_and_window(const EventSequence& seq, WindowSpec spec, Padding pad,
                                         std::size_t seq_index = 0);
std::vector<MaskedSample> pad_and_window(const EventSequence& seq, WindowSpec spec,
                                         const Vocabulary& vocab, std::size_t seq_index = 0);
std::vector<MaskedSample> window_all(const std::vector<EventSequence>& seqs, WindowSpec spec,
                                     const Vocabulary& vocab);

/// Debug dump: `seq_id<TAB>t<TAB>ctx,ids<TAB>target`.
void write_samples(std::ostream& out, std::span<const MaskedSample> samples,
                   const std::vector<EventSequence>& origin);

}  // namespace logmask
