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

#include <iosfwd>
#include <optional>
#include <span>

#include "logmask/cnn.hpp"
#include "logmask/predictor.hpp"

namespace logmask {

/// Trained convolutional model behind the Predictor interface.
class CnnPredictor final : public Predictor {
 public:
  CnnPredictor(CnnModel<double> model, WindowSpec spec);

  [[nodiscard]] std::string_view kind() const override { return "cnn"; }
  [[nodiscard]] WindowSpec window() const override { return spec_; }
  [[nodiscard]] std::size_t vocab_size() const override { return model_.vocab_size(); }
  [[nodiscard]] Prediction predict(std::span<const EventId> context) const override;
  [[nodiscard]] Assessment assess(std::span<const EventId> context,
                                  EventId actual) const override;

  [[nodiscard]] const CnnModel<double>& model() const { return model_; }

  /// Text checkpoint: hyperparameters, seed, then each tensor with its shape.
  void save(std::ostream& out) const;
  static CnnPredictor load(std::istream& in);

 private:
  CnnModel<double> model_;
  WindowSpec spec_;
};

struct CnnTrainResult {
  CnnModel<double> model;
  TrainState<double> state;
};

/// Initializes and trains for `epochs` epochs.
CnnTrainResult train_cnn(std::span<const MaskedSample> samples, std::size_t vocab_size,
                         WindowSpec spec, const CnnHyperParams& hp, std::uint64_t seed,
                         int epochs);

}  // namespace logmask
