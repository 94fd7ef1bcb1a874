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
#include <optional>
#include <string>
#include <vector>

#include "logmask/cnn.hpp"
#include "logmask/config_file.hpp"
#include "logmask/sequence.hpp"

namespace logmask {

enum class ModelKind { Ngram, Cnn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Studied values of each setting.
namespace studied {
inline const std::vector<int> kWindows{2, 5, 10, 15, 20};
inline const std::vector<int> kMasks{0, 1, 2, 3, 4};
inline const std::vector<double> kSplits{0.1, 0.25, 0.5, 0.75, 0.9};
inline const std::vector<bool> kUnique{false, true};
inline constexpr int kDefaultWindow = 5;
inline constexpr int kDefaultMask = 0;
inline constexpr double kDefaultSplit = 0.5;
inline constexpr bool kDefaultUnique = false;
inline constexpr int kBaselineWindow = 10;
inline constexpr int kBaselineMask = 1;
}  // namespace studied

struct ExperimentConfig {
  std::string dataset = "data";
  ModelKind model = ModelKind::Ngram;
  int window = studied::kDefaultWindow;
  int mask = studied::kDefaultMask;
  double split = studied::kDefaultSplit;
  bool unique_only = studied::kDefaultUnique;
  std::uint64_t seed = 0;
  // Neural runs use exactly one of these.
  std::optional<int> epochs;
  std::optional<double> time_budget;
  CnnHyperParams cnn;

  /// Throws std::invalid_argument when the config is not runnable.
  void validate() const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

struct ResultRow {
  ExperimentConfig config;
  double accuracy = 0.0;
  std::size_t n_train_seq = 0;
  std::size_t n_unique_train_seq = 0;
  std::size_t n_test_samples = 0;
  double train_seconds = 0.0;
  int epochs_run = 0;
  std::string error;

  [[nodiscard]] bool ok() const { return error.empty(); }
};

/// Per-setting value lists plus the defaults they vary around.
struct GridSpec {
  std::string dataset = "data";
  std::vector<ModelKind> models{ModelKind::Ngram, ModelKind::Cnn};
  std::vector<int> windows = studied::kWindows;
  std::vector<int> masks = studied::kMasks;
  std::vector<double> splits = studied::kSplits;
  std::vector<bool> unique = studied::kUnique;
  ExperimentConfig defaults;
  /// Full cross product instead of one setting at a time.
  bool factorial = false;
  /// Runs of each config with seeds seed, seed+1, ...
  int replicates = 1;
  /// Appended after the grid for every model (dataset/model/seed taken from the grid).
  std::vector<ExperimentConfig> extra;

  /// Sweep spec file; see README for the keys.
  static GridSpec from_key_values(const KeyValueFile& kv);
};

/// One-factor-at-a-time expansion (or factorial), deduplicated, followed by the
/// extra configs. Combinations with mask >= window are dropped and reported in
/// `warnings`.
std::vector<ExperimentConfig> expand_grid(const GridSpec& spec,
                                          std::vector<std::string>* warnings = nullptr);

/// split -> optional dedup -> vocabulary -> windows -> fit/train -> evaluate.
/// Failures are reported in ResultRow::error instead of thrown.
ResultRow run_experiment(const ExperimentConfig& cfg, const std::vector<EventSequence>& data);

/// Runs every config on `workers` threads; rows come back in config order.
std::vector<ResultRow> run_sweep(const std::vector<ExperimentConfig>& configs,
                                 const std::vector<EventSequence>& data, int workers = 1);

struct CsvOptions {
  /// Wall-clock columns vary between runs; off keeps the CSV byte-reproducible.
  bool include_timing = false;
};

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       CsvOptions opts = {});

struct BaselineComparison {
  ModelKind model;
  ResultRow default_row;
  ResultRow baseline_row;
};

/// Default settings (n=5, m=0) against the suggested baseline (n=10, m=1),
/// both on total data with p = 0.5, per model. `base` supplies dataset name,
/// seed and neural training settings.
std::vector<BaselineComparison> baseline_vs_default(const std::vector<EventSequence>& data,
                                                    const ExperimentConfig& base,
                                                    const std::vector<ModelKind>& models,
                                                    int workers = 1);

void write_baseline_table(std::ostream& out, const std::vector<BaselineComparison>& rows);

}  // namespace logmask
