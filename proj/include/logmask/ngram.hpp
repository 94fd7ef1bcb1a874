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
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "logmask/predictor.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

struct ContextHash {
  std::size_t operator()(const std::vector<EventId>& v) const noexcept;
};

/// Event counts observed after one context key.
struct EventCounts {
  std::map<EventId, std::uint64_t> by_event;
  std::uint64_t total = 0;
};

struct NgramPrediction {
  EventId event = 0;
  double probability = 0.0;
  int level = 0;  // number of context slots kept; 0 is the global distribution
};

/// Unsmoothed count model over fixed masked windows with deterministic backoff.
///
/// Level k keeps the k context slots nearest to the masked slot; the farthest
/// slot is dropped first and, at equal distance, the left one goes first.
/// Level 0 is the global target frequency. Ties in the argmax go to the event
/// with the higher global frequency, then to the smaller id.
class NgramModel final : public Predictor {
 public:
  using LevelMap = std::unordered_map<std::vector<EventId>, EventCounts, ContextHash>;

  /// `vocab_size` 0 infers the size from the largest id seen.
  static NgramModel fit(std::span<const MaskedSample> samples, WindowSpec spec,
                        std::size_t vocab_size = 0);

  [[nodiscard]] NgramPrediction predict_detailed(std::span<const EventId> context) const;
  [[nodiscard]] double prob_of(std::span<const EventId> context, EventId event) const;
  [[nodiscard]] int level_for(std::span<const EventId> context) const;

  [[nodiscard]] std::string_view kind() const override { return "ngram"; }
  [[nodiscard]] WindowSpec window() const override { return spec_; }
  [[nodiscard]] std::size_t vocab_size() const override { return vocab_size_; }
  [[nodiscard]] Prediction predict(std::span<const EventId> context) const override;
  [[nodiscard]] Assessment assess(std::span<const EventId> context,
                                  EventId actual) const override;

  /// Context slot indices kept at `level`, ascending.
  [[nodiscard]] const std::vector<int>& positions(int level) const { return positions_.at(level); }
  [[nodiscard]] const LevelMap& level(int k) const { return levels_.at(k); }
  [[nodiscard]] const EventCounts& global() const { return global_; }
  [[nodiscard]] std::vector<EventId> key_at(std::span<const EventId> context, int level) const;

  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);

  friend bool operator==(const NgramModel& a, const NgramModel& b);

 private:
  explicit NgramModel(WindowSpec spec);
  void finalize();
  [[nodiscard]] const EventCounts& counts_for(std::span<const EventId> context, int* level) const;
  [[nodiscard]] bool before(EventId a, std::uint64_t count_a, EventId b, std::uint64_t count_b) const;
  [[nodiscard]] std::uint64_t global_count(EventId e) const;

  WindowSpec spec_;
  std::size_t vocab_size_ = 0;
  std::vector<std::vector<int>> positions_;  // per level
  std::vector<LevelMap> levels_;             // index 0 unused; global_ stands for level 0
  EventCounts global_;
  std::vector<std::uint64_t> global_dense_;
  std::vector<std::size_t> global_rank_;     // position of each event in the global order
};

/// Keep priority of context slots: nearest to the mask first, right before left on ties.
std::vector<int> backoff_keep_order(WindowSpec spec);

}  // namespace logmask
