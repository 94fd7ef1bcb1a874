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

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "logmask/ngram.hpp"

using namespace logmask;

namespace {

MaskedSample smp(std::vector<EventId> ctx, EventId target) {
  return MaskedSample{std::move(ctx), target, 0, 0};
}

// Independent restatement of the backoff rule: sort slots by distance to the
// masked slot, right before left, and keep the first k.
std::vector<int> kept_slots(WindowSpec spec, int k) {
  const int q = spec.mask_index();
  std::vector<std::pair<std::pair<int, int>, int>> keyed;
  for (int slot = 0; slot < spec.context_size(); ++slot) {
    const int pos = slot < q ? slot : slot + 1;
    keyed.push_back({{std::abs(pos - q), pos < q ? 1 : 0}, slot});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> out;
  for (int i = 0; i < k; ++i) out.push_back(keyed[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

struct Oracle {
  EventId event;
  double probability;
  int level;
};

Oracle brute_force(const std::vector<MaskedSample>& train, WindowSpec spec,
                   const std::vector<EventId>& ctx) {
  std::map<EventId, int> global;
  for (const auto& s : train) ++global[s.target];
  for (int k = spec.context_size(); k >= 0; --k) {
    const auto slots = kept_slots(spec, k);
    std::map<EventId, int> counts;
    int total = 0;
    for (const auto& s : train) {
      bool same = true;
      for (const int p : slots) same = same && s.context[p] == ctx[p];
      if (same) {
        ++counts[s.target];
        ++total;
      }
    }
    if (total == 0) continue;
    EventId best = -1;
    for (const auto& [e, c] : counts) {
      if (best < 0) {
        best = e;
        continue;
      }
      const auto bc = counts[best];
      if (c > bc || (c == bc && global[e] > global[best])) best = e;
    }
    return {best, static_cast<double>(counts[best]) / total, k};
  }
  return {-1, 0.0, -1};
}

}  // namespace

TEST_CASE("most frequent continuation wins") {
  const WindowSpec spec{3, 0};
  const std::vector<MaskedSample> train{smp({1, 2}, 3), smp({1, 2}, 3), smp({1, 2}, 4)};
  const auto m = NgramModel::fit(train, spec, 6);
  const auto p = m.predict_detailed(std::vector<EventId>{1, 2});
  CHECK(p.event == 3);
  CHECK(p.probability == doctest::Approx(2.0 / 3.0));
  CHECK(p.level == 2);
}

TEST_CASE("unseen context backs off to the nearest slot") {
  const WindowSpec spec{3, 0};
  const std::vector<MaskedSample> train{smp({1, 2}, 3), smp({5, 2}, 3), smp({9, 9}, 4),
                                        smp({8, 8}, 4), smp({7, 7}, 4)};
  const auto m = NgramModel::fit(train, spec, 10);
  const auto p = m.predict_detailed(std::vector<EventId>{6, 2});
  CHECK(p.level == 1);
  CHECK(p.event == 3);
  CHECK(p.probability == 1.0);
  const auto g = m.predict_detailed(std::vector<EventId>{0, 0});
  CHECK(g.level == 0);
  CHECK(g.event == 4);
  CHECK(g.probability == doctest::Approx(0.6));
}

TEST_CASE("backoff keeps right neighbours longer at equal distance") {
  CHECK(backoff_keep_order(WindowSpec{5, 2}) == std::vector<int>{2, 1, 3, 0});
  CHECK(backoff_keep_order(WindowSpec{5, 0}) == std::vector<int>{3, 2, 1, 0});
  CHECK(backoff_keep_order(WindowSpec{4, 3}) == std::vector<int>{0, 1, 2});
  for (int n = 2; n <= 12; ++n) {
    for (int m = 0; m < n; ++m) {
      const auto order = backoff_keep_order(WindowSpec{n, m});
      for (int k = 1; k < n; ++k) {
        std::vector<int> got(order.begin(), order.begin() + k);
        std::sort(got.begin(), got.end());
        CHECK(got == kept_slots(WindowSpec{n, m}, k));
      }
    }
  }
}

TEST_CASE("ties go to the globally frequent event, then the smaller id") {
  const WindowSpec spec{2, 0};
  const std::vector<MaskedSample> train{smp({1}, 4), smp({1}, 3), smp({2}, 4), smp({5}, 6),
                                        smp({5}, 2)};
  const auto m = NgramModel::fit(train, spec, 8);
  CHECK(m.predict(std::vector<EventId>{1}).event == 4);
  CHECK(m.predict(std::vector<EventId>{5}).event == 2);
}

TEST_CASE("fit rejects bad input") {
  CHECK_THROWS_AS(NgramModel::fit({}, WindowSpec{3, 0}), std::invalid_argument);
  const std::vector<MaskedSample> train{smp({1}, 2)};
  CHECK_THROWS_AS(NgramModel::fit(train, WindowSpec{3, 0}), std::invalid_argument);
  const auto m = NgramModel::fit(train, WindowSpec{2, 0});
  CHECK_THROWS_AS((void)m.predict(std::vector<EventId>{1, 2}), std::invalid_argument);
}

TEST_CASE("assessment rank and probabilities") {
  const WindowSpec spec{2, 0};
  // Global order: 3 (x3), 1 (x2), 2 (x1), then zero-count ids 0, 4, 5.
  const std::vector<MaskedSample> train{smp({0}, 1), smp({0}, 1), smp({0}, 2),
                                        smp({4}, 3), smp({4}, 3), smp({4}, 3)};
  const auto m = NgramModel::fit(train, spec, 6);
  const std::vector<EventId> ctx{0};
  auto a = m.assess(ctx, 1);
  CHECK(a.predicted == 1);
  CHECK(a.rank == 1);
  CHECK(a.p_actual == doctest::Approx(2.0 / 3.0));
  a = m.assess(ctx, 2);
  CHECK(a.rank == 2);
  a = m.assess(ctx, 3);  // zero count here, first in global order
  CHECK(a.rank == 3);
  CHECK(a.p_actual == 0.0);
  CHECK(m.assess(ctx, 0).rank == 4);
  CHECK(m.assess(ctx, 5).rank == 6);
}

TEST_CASE("the model agrees with a brute-force counter") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const WindowSpec spec{n, static_cast<int>(rng() % n)};
    const EventId vocab = 2 + static_cast<EventId>(rng() % 5);
    std::vector<MaskedSample> train;
    const auto count = 1 + rng() % 80;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<EventId> ctx;
      for (int j = 0; j < n - 1; ++j) ctx.push_back(static_cast<EventId>(rng() % vocab));
      train.push_back(smp(ctx, static_cast<EventId>(rng() % vocab)));
    }
    const auto model = NgramModel::fit(train, spec, static_cast<std::size_t>(vocab));
    for (int q = 0; q < 40; ++q) {
      std::vector<EventId> ctx;
      for (int j = 0; j < n - 1; ++j) ctx.push_back(static_cast<EventId>(rng() % vocab));
      const auto want = brute_force(train, spec, ctx);
      const auto got = model.predict_detailed(ctx);
      CHECK(got.event == want.event);
      CHECK(got.level == want.level);
      CHECK(got.probability == doctest::Approx(want.probability));
      double sum = 0.0;
      for (EventId e = 0; e < vocab; ++e) sum += model.prob_of(ctx, e);
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("a context seen in training never backs off") {
  std::mt19937_64 rng(8);
  const WindowSpec spec{4, 1};
  std::vector<MaskedSample> train;
  for (int i = 0; i < 200; ++i) {
    train.push_back(smp({EventId(rng() % 4), EventId(rng() % 4), EventId(rng() % 4)},
                        EventId(rng() % 4)));
  }
  const auto model = NgramModel::fit(train, spec);
  for (const auto& s : train) CHECK(model.level_for(s.context) == 3);
}

TEST_CASE("deterministic training data is memorized") {
  const WindowSpec spec{3, 1};
  std::vector<MaskedSample> train;
  for (EventId a = 0; a < 5; ++a) {
    for (EventId b = 0; b < 5; ++b) train.push_back(smp({a, b}, (a * 3 + b) % 7));
  }
  const auto model = NgramModel::fit(train, spec);
  for (const auto& s : train) {
    const auto a = model.assess(s.context, s.target);
    CHECK(a.predicted == s.target);
    CHECK(a.rank == 1);
    CHECK(a.p_actual == 1.0);
  }
}

TEST_CASE("save and load round trip") {
  std::mt19937_64 rng(2);
  const WindowSpec spec{5, 2};
  std::vector<MaskedSample> train;
  for (int i = 0; i < 100; ++i) {
    std::vector<EventId> ctx;
    for (int j = 0; j < 4; ++j) ctx.push_back(static_cast<EventId>(rng() % 6));
    train.push_back(smp(ctx, static_cast<EventId>(rng() % 6)));
  }
  const auto model = NgramModel::fit(train, spec, 9);
  std::stringstream ss;
  model.save(ss);
  const auto text = ss.str();
  const auto back = NgramModel::load(ss);
  CHECK(back == model);
  CHECK(back.vocab_size() == 9);
  std::stringstream again;
  back.save(again);
  CHECK(again.str() == text);

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(NgramModel::load(truncated), std::invalid_argument);
  std::istringstream wrong("logmask-cnn 1\n");
  CHECK_THROWS_AS(NgramModel::load(wrong), std::invalid_argument);
}
