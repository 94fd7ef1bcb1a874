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

#include "logmask/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "logmask/windowing.hpp"

namespace logmask {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

MarkovChain MarkovChain::random(int vocab, int order, std::uint64_t seed, double end_prob,
                                double sharpness) {
  if (vocab < 1 || order < 1) throw std::invalid_argument("markov chain needs vocab >= 1, order >= 1");
  if (!(end_prob > 0.0 && end_prob < 1.0)) throw std::invalid_argument("end_prob must lie in (0,1)");
  MarkovChain c;
  c.vocab_ = vocab;
  c.order_ = order;
  const auto width = static_cast<std::size_t>(vocab + 1);
  std::size_t rows = 1;
  for (int i = 0; i < order; ++i) rows *= width;
  c.rows_.assign(rows * width, 0.0);
  std::mt19937_64 rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = c.rows_.data() + r * width;
    double sum = 0.0;
    for (int e = 0; e < vocab; ++e) {
      row[e] = std::pow(unit(rng), sharpness) + 1e-9;
      sum += row[e];
    }
    // Row 0 is the all-start history: a sequence has at least one event.
    const double end = r == 0 ? 0.0 : end_prob;
    for (int e = 0; e < vocab; ++e) row[e] *= (1.0 - end) / sum;
    row[vocab] = end;
  }
  return c;
}

std::size_t MarkovChain::row_index(std::span<const TemplateId> history) const {
  const auto width = static_cast<std::size_t>(vocab_ + 1);
  std::size_t idx = 0;
  for (int i = 0; i < order_; ++i) {
    // Symbol i counts back from the most recent event; 0 means "before the start".
    const auto pos = static_cast<long long>(history.size()) - 1 - i;
    std::size_t sym = 0;
    if (pos >= 0) {
      const auto id = history[static_cast<std::size_t>(pos)];
      if (id < 1 || id > vocab_) throw std::invalid_argument("markov history id out of range");
      sym = static_cast<std::size_t>(id);
    }
    idx = idx * width + sym;
  }
  return idx;
}

std::span<const double> MarkovChain::row(std::span<const TemplateId> history) const {
  const auto width = static_cast<std::size_t>(vocab_ + 1);
  return {rows_.data() + row_index(history) * width, width};
}

std::vector<EventSequence> MarkovChain::sample(std::size_t count, std::uint64_t seed,
                                               std::size_t max_length,
                                               const std::string& prefix) const {
  std::mt19937_64 rng(seed);
  std::vector<EventSequence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EventSequence s{prefix + "-" + std::to_string(i), {}, Label::Normal};
    while (s.events.size() < max_length) {
      const auto r = row(s.events);
      double u = unit(rng);
      int outcome = vocab_;
      for (int e = 0; e <= vocab_; ++e) {
        if (u < r[static_cast<std::size_t>(e)]) {
          outcome = e;
          break;
        }
        u -= r[static_cast<std::size_t>(e)];
      }
      if (outcome == vocab_) break;
      s.events.push_back(outcome + 1);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EventSequence> deterministic_corpus(std::size_t sequences, std::size_t scripts,
                                                std::uint64_t seed, std::size_t min_length,
                                                std::size_t max_length) {
  if (scripts == 0 || min_length < 2 || max_length < min_length) {
    throw std::invalid_argument("deterministic corpus: need scripts >= 1 and 2 <= min <= max length");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<TemplateId>> bodies;
  TemplateId next = 1;
  for (std::size_t s = 0; s < scripts; ++s) {
    const auto len = min_length + static_cast<std::size_t>(rng() % (max_length - min_length + 1));
    std::vector<TemplateId> body(len);
    for (auto& e : body) e = next++;
    // Shuffle within the script so ids do not encode positions.
    const auto perm = seeded_permutation(len, rng());
    std::vector<TemplateId> shuffled(len);
    for (std::size_t i = 0; i < len; ++i) shuffled[i] = body[perm[i]];
    bodies.push_back(std::move(shuffled));
  }
  std::vector<EventSequence> out;
  out.reserve(sequences);
  for (std::size_t i = 0; i < sequences; ++i) {
    out.push_back({"det-" + std::to_string(i), bodies[i % scripts], Label::Normal});
  }
  return out;
}

EventSequence inject_event(EventSequence seq, std::size_t position, TemplateId foreign) {
  position = std::min(position, seq.events.size());
  seq.events.insert(seq.events.begin() + static_cast<std::ptrdiff_t>(position), foreign);
  return seq;
}

}  // namespace logmask
