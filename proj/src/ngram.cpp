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

#include "logmask/ngram.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "logmask/config_file.hpp"

namespace logmask {

namespace {
constexpr const char* kMagic = "logmask-ngram";
constexpr int kFormatVersion = 1;
}  // namespace

std::size_t ContextHash::operator()(const std::vector<EventId>& v) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull ^ v.size();
  for (const auto x : v) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x)) + 0x9e3779b97f4a7c15ull +
         (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<int> backoff_keep_order(WindowSpec spec) {
  spec.validate();
  const int q = spec.mask_index();
  std::vector<int> slots(static_cast<std::size_t>(spec.context_size()));
  std::iota(slots.begin(), slots.end(), 0);
  auto distance = [q](int slot) {
    const int w = slot < q ? slot : slot + 1;
    return w < q ? q - w : w - q;
  };
  std::stable_sort(slots.begin(), slots.end(), [&](int a, int b) {
    const int da = distance(a);
    const int db = distance(b);
    if (da != db) return da < db;
    return a > b;  // the right-hand slot outlives the left one
  });
  return slots;
}

NgramModel::NgramModel(WindowSpec spec) : spec_(spec) {
  spec_.validate();
  const auto order = backoff_keep_order(spec_);
  const auto slots = static_cast<std::size_t>(spec_.context_size());
  positions_.resize(slots + 1);
  for (std::size_t k = 1; k <= slots; ++k) {
    positions_[k].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(positions_[k].begin(), positions_[k].end());
  }
  levels_.resize(slots + 1);
}

std::vector<EventId> NgramModel::key_at(std::span<const EventId> context, int level) const {
  std::vector<EventId> key;
  const auto& pos = positions_.at(static_cast<std::size_t>(level));
  key.reserve(pos.size());
  for (const int p : pos) key.push_back(context[static_cast<std::size_t>(p)]);
  return key;
}

NgramModel NgramModel::fit(std::span<const MaskedSample> samples, WindowSpec spec,
                           std::size_t vocab_size) {
  if (samples.empty()) throw std::invalid_argument("ngram fit: no training samples");
  NgramModel model(spec);
  const auto ctx_size = static_cast<std::size_t>(spec.context_size());
  EventId max_id = 0;
  for (const auto& s : samples) {
    if (s.context.size() != ctx_size) {
      throw std::invalid_argument("ngram fit: sample context length differs from window - 1");
    }
    max_id = std::max(max_id, s.target);
    for (const auto e : s.context) max_id = std::max(max_id, e);
    for (std::size_t k = 1; k <= ctx_size; ++k) {
      auto& counts = model.levels_[k][model.key_at(s.context, static_cast<int>(k))];
      ++counts.by_event[s.target];
      ++counts.total;
    }
    ++model.global_.by_event[s.target];
    ++model.global_.total;
  }
  model.vocab_size_ = std::max(vocab_size, static_cast<std::size_t>(max_id) + 1);
  model.finalize();
  return model;
}

void NgramModel::finalize() {
  global_dense_.assign(vocab_size_, 0);
  for (const auto& [e, c] : global_.by_event) {
    if (e >= 0 && static_cast<std::size_t>(e) < vocab_size_) global_dense_[e] = c;
  }
  std::vector<EventId> order(vocab_size_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](EventId a, EventId b) {
    return global_dense_[a] > global_dense_[b];
  });
  global_rank_.assign(vocab_size_, 0);
  for (std::size_t i = 0; i < order.size(); ++i) global_rank_[order[i]] = i;
}

std::uint64_t NgramModel::global_count(EventId e) const {
  return e >= 0 && static_cast<std::size_t>(e) < vocab_size_ ? global_dense_[e] : 0;
}

bool NgramModel::before(EventId a, std::uint64_t count_a, EventId b, std::uint64_t count_b) const {
  if (count_a != count_b) return count_a > count_b;
  const auto ga = global_count(a);
  const auto gb = global_count(b);
  if (ga != gb) return ga > gb;
  return a < b;
}

const EventCounts& NgramModel::counts_for(std::span<const EventId> context, int* level) const {
  if (context.size() != static_cast<std::size_t>(spec_.context_size())) {
    throw std::invalid_argument("ngram: context length differs from window - 1");
  }
  for (int k = spec_.context_size(); k >= 1; --k) {
    const auto& map = levels_[static_cast<std::size_t>(k)];
    const auto it = map.find(key_at(context, k));
    if (it != map.end()) {
      if (level) *level = k;
      return it->second;
    }
  }
  if (level) *level = 0;
  return global_;
}

int NgramModel::level_for(std::span<const EventId> context) const {
  int level = 0;
  (void)counts_for(context, &level);
  return level;
}

NgramPrediction NgramModel::predict_detailed(std::span<const EventId> context) const {
  int level = 0;
  const auto& counts = counts_for(context, &level);
  EventId best = counts.by_event.begin()->first;
  std::uint64_t best_count = counts.by_event.begin()->second;
  for (const auto& [e, c] : counts.by_event) {
    if (before(e, c, best, best_count)) {
      best = e;
      best_count = c;
    }
  }
  return {best, static_cast<double>(best_count) / static_cast<double>(counts.total), level};
}

double NgramModel::prob_of(std::span<const EventId> context, EventId event) const {
  const auto& counts = counts_for(context, nullptr);
  const auto it = counts.by_event.find(event);
  if (it == counts.by_event.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(counts.total);
}

Prediction NgramModel::predict(std::span<const EventId> context) const {
  const auto p = predict_detailed(context);
  return {p.event, p.probability};
}

Assessment NgramModel::assess(std::span<const EventId> context, EventId actual) const {
  int level = 0;
  const auto& counts = counts_for(context, &level);
  Assessment a;
  std::uint64_t best_count = 0;
  bool first = true;
  for (const auto& [e, c] : counts.by_event) {
    if (first || before(e, c, a.predicted, best_count)) {
      a.predicted = e;
      best_count = c;
      first = false;
    }
  }
  const auto total = static_cast<double>(counts.total);
  a.p_predicted = static_cast<double>(best_count) / total;

  const auto it = counts.by_event.find(actual);
  const std::uint64_t actual_count = it == counts.by_event.end() ? 0 : it->second;
  a.p_actual = static_cast<double>(actual_count) / total;

  // Events with a positive count at this level that outrank the actual event.
  std::size_t ahead = 0;
  for (const auto& [e, c] : counts.by_event) {
    if (e != actual && before(e, c, actual, actual_count)) ++ahead;
  }
  if (actual_count == 0) {
    // Zero-count events follow the global order; count those preceding `actual`.
    const bool in_universe = actual >= 0 && static_cast<std::size_t>(actual) < vocab_size_;
    const std::size_t pos = in_universe ? global_rank_[actual] : vocab_size_;
    std::size_t seen_before = 0;
    for (const auto& [e, c] : counts.by_event) {
      if (e >= 0 && static_cast<std::size_t>(e) < vocab_size_ && global_rank_[e] < pos) {
        ++seen_before;
      }
    }
    ahead += pos - seen_before;
  }
  a.rank = ahead + 1;
  return a;
}

void NgramModel::save(std::ostream& out) const {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << spec_.window << ' ' << spec_.mask << ' ' << vocab_size_ << '\n';
  auto row = [&](int level, const std::vector<EventId>& key, EventId e, std::uint64_t c) {
    out << spec_.window << '\t' << spec_.mask << '\t' << level << '\t';
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i > 0) out << ',';
      out << key[i];
    }
    out << '\t' << e << '\t' << c << '\n';
  };
  for (const auto& [e, c] : global_.by_event) row(0, {}, e, c);
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    std::vector<const std::vector<EventId>*> keys;
    keys.reserve(levels_[k].size());
    for (const auto& [key, counts] : levels_[k]) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    for (const auto* key : keys) {
      for (const auto& [e, c] : levels_[k].at(*key).by_event) row(static_cast<int>(k), *key, e, c);
    }
  }
  out << "end\n";
}

NgramModel NgramModel::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw std::invalid_argument("not an ngram model file");
  }
  if (version != kFormatVersion) {
    throw std::invalid_argument("unsupported ngram model version " + std::to_string(version));
  }
  WindowSpec spec;
  std::size_t vocab = 0;
  if (!(in >> spec.window >> spec.mask >> vocab)) throw std::invalid_argument("bad ngram header");
  NgramModel model(spec);
  model.vocab_size_ = vocab;
  std::string line;
  std::getline(in, line);
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto f = split_list(line, '\t');
    if (f.size() != 6) throw std::invalid_argument("bad ngram row: " + line);
    if (parse_int(f[0]) != spec.window || parse_int(f[1]) != spec.mask) {
      throw std::invalid_argument("ngram row window/mask mismatch");
    }
    const auto level = static_cast<std::size_t>(parse_int(f[2]));
    std::vector<EventId> key;
    for (const auto& tok : split_list(f[3], ',')) key.push_back(static_cast<EventId>(parse_int(tok)));
    const auto e = static_cast<EventId>(parse_int(f[4]));
    const auto c = static_cast<std::uint64_t>(parse_int(f[5]));
    if (level >= model.levels_.size() || key.size() != level) {
      throw std::invalid_argument("ngram row level/key mismatch");
    }
    auto& counts = level == 0 ? model.global_ : model.levels_[level][key];
    counts.by_event[e] += c;
    counts.total += c;
  }
  if (!ended) throw std::invalid_argument("truncated ngram model file");
  if (model.global_.total == 0) throw std::invalid_argument("ngram model has no counts");
  model.finalize();
  return model;
}

bool operator==(const NgramModel& a, const NgramModel& b) {
  auto same_counts = [](const EventCounts& x, const EventCounts& y) {
    return x.total == y.total && x.by_event == y.by_event;
  };
  if (a.spec_.window != b.spec_.window || a.spec_.mask != b.spec_.mask ||
      a.vocab_size_ != b.vocab_size_ || !same_counts(a.global_, b.global_) ||
      a.levels_.size() != b.levels_.size()) {
    return false;
  }
  for (std::size_t k = 1; k < a.levels_.size(); ++k) {
    if (a.levels_[k].size() != b.levels_[k].size()) return false;
    for (const auto& [key, counts] : a.levels_[k]) {
      const auto it = b.levels_[k].find(key);
      if (it == b.levels_[k].end() || !same_counts(counts, it->second)) return false;
    }
  }
  return true;
}

}  // namespace logmask
