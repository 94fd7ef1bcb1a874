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
#include <span>
#include <string_view>

#include "logmask/types.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

struct Prediction {
  EventId event = 0;
  double probability = 0.0;
};

/// What a predictor thinks of one masked slot whose true event is known.
struct Assessment {
  EventId predicted = 0;
  double p_predicted = 0.0;
  double p_actual = 0.0;
  /// 1-based position of the actual event in the predictor's ranking.
  std::size_t rank = 1;
};

/// Common surface of the masked-event models. Implementations are immutable
/// after training and safe to query from several threads.
class Predictor {
 public:
  virtual ~Predictor() = default;

  [[nodiscard]] virtual std::string_view kind() const = 0;
  [[nodiscard]] virtual WindowSpec window() const = 0;
  [[nodiscard]] virtual std::size_t vocab_size() const = 0;

  [[nodiscard]] virtual Prediction predict(std::span<const EventId> context) const = 0;
  [[nodiscard]] virtual Assessment assess(std::span<const EventId> context,
                                          EventId actual) const = 0;
};

}  // namespace logmask
