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

#include <cstdint>
#include <span>
#include <vector>

#include "logmask/sequence.hpp"
#include "logmask/types.hpp"

namespace logmask {

/// Order-k Markov chain over template ids 1..V with an explicit end outcome.
///
/// A row is indexed by the last `order` symbols (0 stands for "before the
/// start") and holds V + 1 probabilities: events 1..V, then end-of-sequence.
class MarkovChain {
 public:
  /// Peaked random rows: weights u^sharpness, u ~ U(0,1); the end outcome
  /// always gets `end_prob` (the start row never ends).
  static MarkovChain random(int vocab, int order, std::uint64_t seed, double end_prob = 0.05,
                            double sharpness = 8.0);

  [[nodiscard]] int vocab() const { return vocab_; }
  [[nodiscard]] int order() const { return order_; }
  /// Outcome index `vocab()` is the end of the sequence.
  [[nodiscard]] int end_outcome() const { return vocab_; }

  /// Row for the history preceding a position; only the last `order` ids matter.
  [[nodiscard]] std::span<const double> row(std::span<const TemplateId> history) const;
  [[nodiscard]] std::size_t row_count() const { return rows_.size() / static_cast<std::size_t>(vocab_ + 1); }

  /// Draws sequences labelled normal with ids `prefix-<i>`. Sequences reaching
  /// `max_length` are cut there.
  [[nodiscard]] std::vector<EventSequence> sample(std::size_t count, std::uint64_t seed,
                                                  std::size_t max_length = 200,
                                                  const std::string& prefix = "seq") const;

 private:
  [[nodiscard]] std::size_t row_index(std::span<const TemplateId> history) const;

  int vocab_ = 0;
  int order_ = 1;
  std::vector<double> rows_;  // row-major, (V+1)^order rows of V+1 outcomes
};

/// Corpus where every masked slot is determined by any neighbouring event:
/// `scripts` fixed event lists over disjoint alphabets, repeated round-robin
/// to `sequences` sequences. Lengths lie in [min_length, max_length].
std::vector<EventSequence> deterministic_corpus(std::size_t sequences, std::size_t scripts,
                                                std::uint64_t seed, std::size_t min_length = 6,
                                                std::size_t max_length = 12);

/// Inserts `foreign` before index `position` (clamped to the sequence length).
EventSequence inject_event(EventSequence seq, std::size_t position, TemplateId foreign);

}  // namespace logmask
