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

#include "logmask/windowing.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace logmask {

namespace {

struct EventsHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x)) + 0x9e3779b97f4a7c15ull +
           (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace

Vocabulary Vocabulary::build(const std::vector<EventSequence>& train) {
  std::vector<TemplateId> ordered;
  std::unordered_set<TemplateId> seen;
  for (const auto& s : train) {
    for (const auto id : s.events) {
      if (id == kNoTemplate) continue;
      if (seen.insert(id).second) ordered.push_back(id);
    }
  }
  if (ordered.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");
  return from_templates(std::move(ordered));
}

Vocabulary Vocabulary::from_templates(std::vector<TemplateId> ordered) {
  Vocabulary v;
  v.templates_ = std::move(ordered);
  for (std::size_t i = 0; i < v.templates_.size(); ++i) {
    if (!v.index_.emplace(v.templates_[i], static_cast<EventId>(i)).second) {
      throw std::invalid_argument("duplicate template id in vocabulary");
    }
  }
  return v;
}

EventId Vocabulary::event_of(TemplateId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? unk() : it->second;
}

TemplateId Vocabulary::template_of(EventId id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < templates_.size()) return templates_[id];
  return kNoTemplate;
}

EventSequence encode(const EventSequence& seq, const Vocabulary& vocab) {
  EventSequence out{seq.seq_id, {}, seq.label};
  out.events.reserve(seq.events.size());
  for (const auto id : seq.events) out.events.push_back(vocab.event_of(id));
  return out;
}

std::vector<EventSequence> encode_all(const std::vector<EventSequence>& seqs,
                                      const Vocabulary& vocab) {
  std::vector<EventSequence> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(encode(s, vocab));
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
}

std::size_t train_count(double p, std::size_t n) {
  return static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 0.5));
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

SplitResult split_train_test(const std::vector<EventSequence>& sequences, const SplitSpec& spec) {
  spec.validate();
  SplitResult out;
  std::vector<const EventSequence*> normal;
  for (const auto& s : sequences) {
    if (s.label == Label::Normal) normal.push_back(&s);
    else out.anomalous.push_back(s);
  }
  const auto n = normal.size();
  const auto k = train_count(spec.train_fraction, n);
  if (k == 0 || k == n) {
    throw std::domain_error("degenerate split: " + std::to_string(k) + " of " +
                            std::to_string(n) + " normal sequences would train");
  }
  const auto perm = seeded_permutation(n, spec.seed);
  out.train.reserve(k);
  out.test.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i) {
    (i < k ? out.train : out.test).push_back(*normal[perm[i]]);
  }
  return out;
}

std::vector<EventSequence> dedup_sequences(const std::vector<EventSequence>& sequences) {
  std::unordered_set<std::vector<std::int32_t>, EventsHash> seen;
  std::vector<EventSequence> out;
  for (const auto& s : sequences) {
    if (seen.insert(s.events).second) out.push_back(s);
  }
  return out;
}

std::size_t count_distinct(const std::vector<EventSequence>& sequences) {
  std::unordered_set<std::vector<std::int32_t>, EventsHash> seen;
  for (const auto& s : sequences) seen.insert(s.events);
  return seen.size();
}

void WindowSpec::validate() const {
  if (window < 2) throw std::invalid_argument("window size must be >= 2");
  if (mask < 0 || mask > window - 1) {
    throw std::invalid_argument("mask position must lie in [0, window - 1]");
  }
}

std::vector<MaskedSample> pad_and_window(const EventSequence& seq, WindowSpec spec, Padding pad,
                                         std::size_t seq_index) {
  spec.validate();
  const auto len = static_cast<long long>(seq.events.size());
  const long long left = spec.mask_index();
  const long long right = spec.mask;
  auto at = [&](long long i) -> EventId {
    if (i < 0) return pad.sos;
    if (i >= len) return pad.eos;
    return seq.events[static_cast<std::size_t>(i)];
  };
  std::vector<MaskedSample> out;
  out.reserve(static_cast<std::size_t>(len + 1));
  for (long long t = 0; t <= len; ++t) {
    MaskedSample s;
    s.context.reserve(static_cast<std::size_t>(spec.context_size()));
    for (long long i = t - left; i < t; ++i) s.context.push_back(at(i));
    for (long long i = t + 1; i <= t + right; ++i) s.context.push_back(at(i));
    s.target = at(t);
    s.seq_index = seq_index;
    s.t = static_cast<std::size_t>(t);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<MaskedSample> pad_and_window(const EventSequence& seq, WindowSpec spec,
                                         const Vocabulary& vocab, std::size_t seq_index) {
  return pad_and_window(seq, spec, Padding{vocab.sos(), vocab.eos()}, seq_index);
}

std::vector<MaskedSample> window_all(const std::vector<EventSequence>& seqs, WindowSpec spec,
                                     const Vocabulary& vocab) {
  std::vector<MaskedSample> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    auto part = pad_and_window(seqs[i], spec, vocab, i);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

void write_samples(std::ostream& out, std::span<const MaskedSample> samples,
                   const std::vector<EventSequence>& origin) {
  for (const auto& s : samples) {
    out << origin.at(s.seq_index).seq_id << '\t' << s.t << '\t';
    for (std::size_t i = 0; i < s.context.size(); ++i) {
      if (i > 0) out << ',';
      out << s.context[i];
    }
    out << '\t' << s.target << '\n';
  }
}

}  // namespace logmask
