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

#include "logmask/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "logmask/cnn_predictor.hpp"
#include "logmask/evaluation.hpp"
#include "logmask/ngram.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Ngram ? "ngram" : "cnn"; }

ModelKind parse_model_kind(std::string_view text) {
  const auto t = trim(text);
  if (t == "ngram" || t == "n-gram") return ModelKind::Ngram;
  if (t == "cnn") return ModelKind::Cnn;
  throw std::invalid_argument("unknown model '" + std::string(t) + "' (expected ngram or cnn)");
}

void ExperimentConfig::validate() const {
  WindowSpec{window, mask}.validate();
  SplitSpec{split, seed, unique_only}.validate();
  if (model == ModelKind::Cnn) {
    if (epochs.has_value() == time_budget.has_value()) {
      throw std::invalid_argument("cnn runs need exactly one of epochs / time_budget");
    }
    if (epochs && *epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (time_budget && !(*time_budget > 0.0)) throw std::invalid_argument("time_budget must be > 0");
    cnn.validate();
  }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.dataset == b.dataset && a.model == b.model && a.window == b.window &&
         a.mask == b.mask && a.split == b.split && a.unique_only == b.unique_only &&
         a.seed == b.seed && a.epochs == b.epochs && a.time_budget == b.time_budget;
}

namespace {

template <typename T, typename Parse>
std::vector<T> parse_values(const KeyValueFile& kv, const std::string& key, std::vector<T> fallback,
                            Parse parse) {
  const auto v = kv.get(key);
  if (!v) return fallback;
  std::vector<T> out;
  for (const auto& item : split_list(*v)) out.push_back(parse(item));
  if (out.empty()) throw std::invalid_argument("sweep spec: '" + key + "' has no values");
  return out;
}

int to_int(const std::string& s) { return static_cast<int>(parse_int(s)); }

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "window") cfg.window = static_cast<int>(parse_int(value));
  else if (key == "mask") cfg.mask = static_cast<int>(parse_int(value));
  else if (key == "split") cfg.split = parse_double(value);
  else if (key == "unique") cfg.unique_only = parse_bool(value);
  else throw std::invalid_argument("unknown setting '" + std::string(key) + "'");
}

const std::set<std::string, std::less<>> kSweepKeys{
    "dataset", "models", "window", "mask", "split", "unique", "default.window", "default.mask",
    "default.split", "default.unique", "seed", "replicates", "factorial", "baseline", "epochs",
    "time_budget", "cnn.embedding_dim", "cnn.filters", "cnn.filter_width", "cnn.hidden",
    "cnn.learning_rate", "cnn.batch_size"};

}  // namespace

GridSpec GridSpec::from_key_values(const KeyValueFile& kv) {
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("extra.", 0) == 0) continue;
    if (kSweepKeys.count(k) == 0) throw std::invalid_argument("sweep spec: unknown key '" + k + "'");
  }
  GridSpec g;
  g.dataset = kv.get_or("dataset", g.dataset);
  g.models = parse_values<ModelKind>(kv, "models", g.models,
                                     [](const std::string& s) { return parse_model_kind(s); });
  g.windows = parse_values<int>(kv, "window", g.windows, to_int);
  g.masks = parse_values<int>(kv, "mask", g.masks, to_int);
  g.splits = parse_values<double>(kv, "split", g.splits,
                                  [](const std::string& s) { return parse_double(s); });
  g.unique = parse_values<bool>(kv, "unique", g.unique,
                                [](const std::string& s) { return parse_bool(s); });
  g.factorial = kv.get_bool("factorial", false);
  g.replicates = static_cast<int>(kv.get_int("replicates", 1));
  if (g.replicates < 1) throw std::invalid_argument("sweep spec: replicates must be >= 1");

  auto& d = g.defaults;
  d.dataset = g.dataset;
  d.window = static_cast<int>(kv.get_int("default.window", d.window));
  d.mask = static_cast<int>(kv.get_int("default.mask", d.mask));
  d.split = kv.get_double("default.split", d.split);
  d.unique_only = kv.get_bool("default.unique", d.unique_only);
  const auto seed = kv.get_int("seed", 0);
  if (seed < 0) throw std::invalid_argument("sweep spec: seed must be >= 0");
  d.seed = static_cast<std::uint64_t>(seed);
  if (kv.has("epochs")) d.epochs = static_cast<int>(kv.get_int("epochs", 1));
  if (kv.has("time_budget")) d.time_budget = kv.get_double("time_budget", 1.0);
  if (!d.epochs && !d.time_budget) d.epochs = 10;
  d.cnn.embedding_dim = static_cast<int>(kv.get_int("cnn.embedding_dim", d.cnn.embedding_dim));
  d.cnn.filters = static_cast<int>(kv.get_int("cnn.filters", d.cnn.filters));
  d.cnn.filter_width = static_cast<int>(kv.get_int("cnn.filter_width", d.cnn.filter_width));
  d.cnn.hidden = static_cast<int>(kv.get_int("cnn.hidden", d.cnn.hidden));
  d.cnn.learning_rate = kv.get_double("cnn.learning_rate", d.cnn.learning_rate);
  d.cnn.batch_size = static_cast<int>(kv.get_int("cnn.batch_size", d.cnn.batch_size));

  if (kv.get_bool("baseline", false)) {
    ExperimentConfig b = d;
    b.window = studied::kBaselineWindow;
    b.mask = studied::kBaselineMask;
    b.split = studied::kDefaultSplit;
    b.unique_only = false;
    g.extra.push_back(b);
  }
  for (const auto& [name, value] : kv.with_prefix("extra.")) {
    ExperimentConfig e = d;
    for (const auto& item : split_list(value, ' ')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("sweep spec: extra." + name + " expects key=value items");
      }
      apply_setting(e, item.substr(0, eq), item.substr(eq + 1));
    }
    g.extra.push_back(e);
  }

  // Every value must be individually sane; m >= n pairs are filtered later.
  for (const int w : g.windows) {
    if (w < 2) throw std::invalid_argument("sweep spec: window values must be >= 2");
  }
  for (const int m : g.masks) {
    if (m < 0) throw std::invalid_argument("sweep spec: mask values must be >= 0");
  }
  for (const double p : g.splits) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("sweep spec: split values must be in (0,1)");
  }
  ExperimentConfig probe = d;
  probe.model = ModelKind::Cnn;
  probe.validate();
  return g;
}

std::vector<ExperimentConfig> expand_grid(const GridSpec& spec, std::vector<std::string>* warnings) {
  std::vector<ExperimentConfig> base;
  auto add = [&](ExperimentConfig c) {
    if (c.mask > c.window - 1) {
      if (warnings) {
        warnings->push_back("dropped window=" + std::to_string(c.window) +
                            " mask=" + std::to_string(c.mask) + ": mask must be < window");
      }
      return;
    }
    if (std::find(base.begin(), base.end(), c) == base.end()) base.push_back(std::move(c));
  };

  const auto& d = spec.defaults;
  if (spec.factorial) {
    for (const int w : spec.windows) {
      for (const int m : spec.masks) {
        for (const double p : spec.splits) {
          for (const bool u : spec.unique) {
            ExperimentConfig c = d;
            c.window = w;
            c.mask = m;
            c.split = p;
            c.unique_only = u;
            add(c);
          }
        }
      }
    }
  } else {
    add(d);
    for (const int w : spec.windows) {
      ExperimentConfig c = d;
      c.window = w;
      add(c);
    }
    for (const int m : spec.masks) {
      ExperimentConfig c = d;
      c.mask = m;
      add(c);
    }
    for (const double p : spec.splits) {
      ExperimentConfig c = d;
      c.split = p;
      add(c);
    }
    for (const bool u : spec.unique) {
      ExperimentConfig c = d;
      c.unique_only = u;
      add(c);
    }
  }
  for (const auto& e : spec.extra) add(e);

  std::vector<ExperimentConfig> out;
  for (const auto model : spec.models) {
    for (const auto& c : base) {
      for (int r = 0; r < spec.replicates; ++r) {
        ExperimentConfig x = c;
        x.dataset = spec.dataset;
        x.model = model;
        x.seed = d.seed + static_cast<std::uint64_t>(r);
        out.push_back(std::move(x));
      }
    }
  }
  return out;
}

ResultRow run_experiment(const ExperimentConfig& cfg, const std::vector<EventSequence>& data) {
  ResultRow row;
  row.config = cfg;
  try {
    cfg.validate();
    const auto split = split_train_test(data, SplitSpec{cfg.split, cfg.seed, cfg.unique_only});
    row.n_train_seq = split.train.size();
    row.n_unique_train_seq = count_distinct(split.train);
    const auto train = cfg.unique_only ? dedup_sequences(split.train) : split.train;
    const auto vocab = Vocabulary::build(train);
    const auto enc_train = encode_all(train, vocab);
    const auto enc_test = encode_all(split.test, vocab);
    const WindowSpec spec{cfg.window, cfg.mask};
    const auto samples = window_all(enc_train, spec, vocab);

    const auto start = std::chrono::steady_clock::now();
    std::unique_ptr<Predictor> predictor;
    if (cfg.model == ModelKind::Ngram) {
      predictor = std::make_unique<NgramModel>(NgramModel::fit(samples, spec, vocab.size()));
    } else {
      CnnHyperParams hp = cfg.cnn;
      // Short windows get a narrower filter instead of failing outright.
      hp.filter_width = std::min(hp.filter_width, spec.context_size());
      auto model = CnnModel<double>::init(vocab.size(), spec.context_size(), hp, cfg.seed);
      const auto data_matrix = to_sample_matrix(samples, spec.context_size());
      const int epochs =
          cfg.epochs ? *cfg.epochs : calibrate_epochs(model, data_matrix, *cfg.time_budget);
      auto state = make_train_state(model);
      for (int e = 0; e < epochs; ++e) train_epoch(model, state, data_matrix, hp.batch_size);
      row.epochs_run = epochs;
      predictor = std::make_unique<CnnPredictor>(std::move(model), spec);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    row.train_seconds = elapsed.count();

    const auto report = evaluate_accuracy(*predictor, enc_test, spec, vocab);
    row.accuracy = report.top1_accuracy;
    row.n_test_samples = report.n_samples;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<ResultRow> run_sweep(const std::vector<ExperimentConfig>& configs,
                                 const std::vector<EventSequence>& data, int workers) {
  std::vector<ResultRow> rows(configs.size());
  const auto n_workers = static_cast<std::size_t>(std::max(1, workers));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      rows[i] = run_experiment(configs[i], data);
    }
  };
  if (n_workers == 1 || configs.size() <= 1) {
    work();
    return rows;
  }
  std::vector<std::jthread> pool;
  pool.reserve(std::min(n_workers, configs.size()));
  for (std::size_t w = 0; w < std::min(n_workers, configs.size()); ++w) pool.emplace_back(work);
  pool.clear();  // joins
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, CsvOptions opts) {
  out << "dataset,model,window,mask,split,unique,seed,accuracy,n_train_seq,n_unique_train_seq,"
         "n_test_samples,train_seconds,epochs_run,error\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    out << csv_field(c.dataset) << ',' << to_string(c.model) << ',' << c.window << ',' << c.mask
        << ',' << format_double(c.split) << ',' << (c.unique_only ? "unique" : "total") << ','
        << c.seed << ',' << (r.ok() ? format_double(r.accuracy) : "") << ',' << r.n_train_seq
        << ',' << r.n_unique_train_seq << ',' << r.n_test_samples << ','
        << (opts.include_timing ? format_double(r.train_seconds) : "") << ',' << r.epochs_run
        << ',' << csv_field(r.error) << '\n';
  }
}

std::vector<BaselineComparison> baseline_vs_default(const std::vector<EventSequence>& data,
                                                    const ExperimentConfig& base,
                                                    const std::vector<ModelKind>& models,
                                                    int workers) {
  std::vector<ExperimentConfig> configs;
  for (const auto model : models) {
    ExperimentConfig d = base;
    d.model = model;
    d.window = studied::kDefaultWindow;
    d.mask = studied::kDefaultMask;
    d.split = studied::kDefaultSplit;
    d.unique_only = false;
    ExperimentConfig b = d;
    b.window = studied::kBaselineWindow;
    b.mask = studied::kBaselineMask;
    configs.push_back(d);
    configs.push_back(b);
  }
  const auto rows = run_sweep(configs, data, workers);
  std::vector<BaselineComparison> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    out.push_back({models[i], rows[2 * i], rows[2 * i + 1]});
  }
  return out;
}

void write_baseline_table(std::ostream& out, const std::vector<BaselineComparison>& rows) {
  out << "dataset,model,default_accuracy,baseline_accuracy,default_error,baseline_error\n";
  for (const auto& r : rows) {
    out << csv_field(r.default_row.config.dataset) << ',' << to_string(r.model) << ','
        << (r.default_row.ok() ? format_double(r.default_row.accuracy) : "") << ','
        << (r.baseline_row.ok() ? format_double(r.baseline_row.accuracy) : "") << ','
        << csv_field(r.default_row.error) << ',' << csv_field(r.baseline_row.error) << '\n';
  }
}

}  // namespace logmask
