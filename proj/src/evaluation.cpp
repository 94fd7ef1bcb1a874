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

#include "logmask/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace logmask {

namespace {

void check_window(const Predictor& predictor, WindowSpec spec) {
  spec.validate();
  const auto own = predictor.window();
  if (own.window != spec.window || own.mask != spec.mask) {
    throw std::invalid_argument("window/mask differ from the predictor's training settings");
  }
}

double ratio(std::size_t hits, std::size_t total) {
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

EvalReport evaluate_accuracy(const Predictor& predictor, const std::vector<EventSequence>& test,
                             WindowSpec spec, const Vocabulary& vocab, EvalOptions opts) {
  check_window(predictor, spec);
  if (test.empty()) throw std::invalid_argument("evaluation: empty test set");
  EvalReport r;
  const EventId unk = vocab.unk();
  for (std::size_t i = 0; i < test.size(); ++i) {
    SequenceAccuracy seq_acc{test[i].seq_id, 0, 0};
    for (const auto& s : pad_and_window(test[i], spec, vocab, i)) {
      ++r.n_samples;
      ++seq_acc.samples;
      bool hit = false;
      std::size_t rank = 0;
      EventId predicted = 0;
      if (s.target == unk) {
        ++r.unk_target_count;
        predicted = predictor.predict(s.context).event;
      } else {
        const auto a = predictor.assess(s.context, s.target);
        predicted = a.predicted;
        rank = a.rank;
        hit = a.predicted == s.target;
        if (hit) ++r.top1_hits;
        if (a.rank <= 3) ++r.top3_hits;
        if (a.rank <= 5) ++r.top5_hits;
      }
      if (hit) ++seq_acc.hits;
      if (opts.keep_outcomes) r.outcomes.push_back({i, s.t, s.target, predicted, rank, hit});
    }
    if (opts.per_sequence) r.per_sequence.push_back(std::move(seq_acc));
  }
  r.top1_accuracy = ratio(r.top1_hits, r.n_samples);
  r.top3_accuracy = ratio(r.top3_hits, r.n_samples);
  r.top5_accuracy = ratio(r.top5_hits, r.n_samples);
  return r;
}

std::vector<EventScore> score_sequence(const Predictor& predictor, const EventSequence& seq,
                                       WindowSpec spec, const Vocabulary& vocab) {
  check_window(predictor, spec);
  std::vector<EventScore> out;
  for (const auto& s : pad_and_window(seq, spec, vocab)) {
    EventScore sc;
    sc.seq_id = seq.seq_id;
    sc.t = s.t;
    sc.actual = s.target;
    const auto a = predictor.assess(s.context, s.target);
    sc.predicted = a.predicted;
    sc.rank = a.rank;
    sc.p_actual = s.target == vocab.unk() ? 0.0 : std::clamp(a.p_actual, 0.0, 1.0);
    sc.suspiciousness = 1.0 - sc.p_actual;
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<EventScore> topk_suspicious(std::vector<EventScore> scores, std::size_t k) {
  if (k < 1) throw std::invalid_argument("topk_suspicious: k must be >= 1");
  std::stable_sort(scores.begin(), scores.end(), [](const EventScore& a, const EventScore& b) {
    if (a.suspiciousness != b.suspiciousness) return a.suspiciousness > b.suspiciousness;
    if (a.seq_id != b.seq_id) return a.seq_id < b.seq_id;
    return a.t < b.t;
  });
  if (scores.size() > k) scores.resize(k);
  return scores;
}

void write_scores(std::ostream& out, const std::vector<EventScore>& scores) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : scores) {
    out << s.seq_id << '\t' << s.t << '\t' << s.actual << '\t' << s.predicted << '\t'
        << s.p_actual << '\t' << s.suspiciousness << '\t' << s.rank << '\n';
  }
  out.precision(old);
}

void write_report(std::ostream& out, const EvalReport& r) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "n_samples=" << r.n_samples << '\n'
      << "top1_hits=" << r.top1_hits << '\n'
      << "top3_hits=" << r.top3_hits << '\n'
      << "top5_hits=" << r.top5_hits << '\n'
      << "top1_accuracy=" << r.top1_accuracy << '\n'
      << "top3_accuracy=" << r.top3_accuracy << '\n'
      << "top5_accuracy=" << r.top5_accuracy << '\n'
      << "unk_target_count=" << r.unk_target_count << '\n';
  for (const auto& s : r.per_sequence) {
    out << "sequence." << s.seq_id << "=" << s.hits << '/' << s.samples << '\n';
  }
  out.precision(old);
}

}  // namespace logmask
