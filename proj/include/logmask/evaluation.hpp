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
#include <iosfwd>
#include <string>
#include <vector>

#include "logmask/predictor.hpp"
#include "logmask/sequence.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

struct SequenceAccuracy {
  std::string seq_id;
  std::size_t samples = 0;
  std::size_t hits = 0;
};

/// Per-sample outcome kept for audits of the report numbers.
struct SampleOutcome {
  std::size_t seq_index = 0;
  std::size_t t = 0;
  EventId target = 0;
  EventId predicted = 0;
  std::size_t rank = 0;
  bool hit = false;
};

struct EvalReport {
  std::size_t n_samples = 0;
  std::size_t top1_hits = 0;
  std::size_t top3_hits = 0;
  std::size_t top5_hits = 0;
  double top1_accuracy = 0.0;
  double top3_accuracy = 0.0;
  double top5_accuracy = 0.0;
  std::size_t unk_target_count = 0;
  std::vector<SequenceAccuracy> per_sequence;
  std::vector<SampleOutcome> outcomes;
};

struct EvalOptions {
  bool per_sequence = false;
  bool keep_outcomes = false;
};

/// Top-1/3/5 accuracy over every masked sample of `test` (encoded with the
/// training vocabulary). Unknown targets always count as misses. Throws on an
/// empty test set or when `spec` differs from the predictor's window.
EvalReport evaluate_accuracy(const Predictor& predictor, const std::vector<EventSequence>& test,
                             WindowSpec spec, const Vocabulary& vocab, EvalOptions opts = {});

struct EventScore {
  std::string seq_id;
  std::size_t t = 0;
  EventId actual = 0;
  EventId predicted = 0;
  double p_actual = 0.0;
  double suspiciousness = 0.0;  // 1 - p_actual
  std::size_t rank = 1;
};

/// One score per target index t in [0, L]. Unknown actual events score
/// p_actual = 0, i.e. maximal suspiciousness.
std::vector<EventScore> score_sequence(const Predictor& predictor, const EventSequence& seq,
                                       WindowSpec spec, const Vocabulary& vocab);

/// The k most suspicious scores; ties by (seq_id, t) ascending. k above the
/// number of scores returns all of them.
std::vector<EventScore> topk_suspicious(std::vector<EventScore> scores, std::size_t k);

/// `seq_id<TAB>t<TAB>actual<TAB>predicted<TAB>p_actual<TAB>suspiciousness<TAB>rank`.
void write_scores(std::ostream& out, const std::vector<EventScore>& scores);
/// `key=value` lines with every report field.
void write_report(std::ostream& out, const EvalReport& report);

}  // namespace logmask
