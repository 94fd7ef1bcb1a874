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

// Command-line entry point: parse, prep, train, eval, score, sweep, gen-synth.
//
// Standard output carries `key=value` summaries. Exit codes: 0 success,
// 1 degraded (some sweep rows failed), 2 usage or input error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "logmask/cnn_predictor.hpp"
#include "logmask/drain.hpp"
#include "logmask/evaluation.hpp"
#include "logmask/experiment.hpp"
#include "logmask/ingest.hpp"
#include "logmask/model_io.hpp"
#include "logmask/ngram.hpp"
#include "logmask/synthetic.hpp"
#include "logmask/windowing.hpp"

namespace fs = std::filesystem;
using namespace logmask;

namespace {

constexpr int kOk = 0;
constexpr int kDegraded = 1;
constexpr int kUsage = 2;

/// Input problems detected by a subcommand; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw UsageError("cannot write " + p.string());
  return out;
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw UsageError("missing input: " + p.string());
}

// ---------------------------------------------------------------- parse

struct ParseArgs {
  std::vector<std::string> inputs;
  std::string config;
  std::string templates_out;
  std::string events_out;
  std::string grouped_out;
  std::string frozen_templates;
};

int cmd_parse(const ParseArgs& a) {
  LoaderConfig cfg = LoaderConfig::per_file_default();
  KeyValueFile kv;
  if (!a.config.empty()) {
    require_file(a.config);
    cfg = LoaderConfig::load(a.config);
    kv = cfg.raw;
  }
  const auto rules = compile_mask_rules(cfg.mask_rules);
  const auto params = DrainParams::from_config(kv);

  DrainParser parser(params);
  const bool frozen = !a.frozen_templates.empty();
  if (frozen) {
    require_file(a.frozen_templates);
    std::ifstream in(a.frozen_templates);
    parser = DrainParser::import_templates(read_templates(in), params);
  }

  std::vector<EventSequence> events;
  GroupedLog all_groups;
  std::size_t lines = 0;
  std::size_t mismatches = 0;
  for (const auto& input : a.inputs) {
    require_file(input);
    const auto log = load_raw_log(input, cfg);
    const auto grouped = group_sequences(log.records, cfg);
    auto seqs = parse_groups(log, grouped, parser, rules, frozen);
    lines += log.records.size();
    mismatches += log.header_mismatches;
    events.insert(events.end(), seqs.begin(), seqs.end());
    all_groups.groups.insert(all_groups.groups.end(), grouped.groups.begin(), grouped.groups.end());
    all_groups.rejects.insert(all_groups.rejects.end(), grouped.rejects.begin(),
                              grouped.rejects.end());
  }

  if (!a.templates_out.empty()) {
    auto out = open_out(a.templates_out);
    write_templates(out, parser.export_templates());
  }
  {
    auto out = open_out(a.events_out);
    write_event_sequences(out, events);
  }
  if (!a.grouped_out.empty()) {
    auto out = open_out(a.grouped_out);
    write_grouped_log(out, all_groups);
  }
  std::size_t anomalous = 0;
  for (const auto& s : events) anomalous += s.label == Label::Anomalous ? 1 : 0;
  std::cout << "lines=" << lines << '\n'
            << "templates=" << parser.template_count() << '\n'
            << "sequences=" << events.size() << '\n'
            << "anomalous_sequences=" << anomalous << '\n'
            << "rejected_lines=" << all_groups.rejects.size() << '\n'
            << "header_mismatches=" << mismatches << '\n';
  return kOk;
}

// ---------------------------------------------------------------- prep

struct PrepArgs {
  std::string events;
  std::string out_dir;
  double split = studied::kDefaultSplit;
  std::uint64_t seed = 0;
  bool unique = false;
};

int cmd_prep(const PrepArgs& a) {
  require_file(a.events);
  const auto seqs = read_event_sequences(fs::path(a.events));
  SplitResult split;
  try {
    split = split_train_test(seqs, SplitSpec{a.split, a.seed, a.unique});
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const auto total_train = split.train.size();
  const auto distinct = count_distinct(split.train);
  if (a.unique) split.train = dedup_sequences(split.train);
  fs::create_directories(a.out_dir);
  write_event_sequences(fs::path(a.out_dir) / "train.tsv", split.train);
  write_event_sequences(fs::path(a.out_dir) / "test.tsv", split.test);
  write_event_sequences(fs::path(a.out_dir) / "anomalous.tsv", split.anomalous);
  std::cout << "normal_sequences=" << total_train + split.test.size() << '\n'
            << "train_sequences=" << total_train << '\n'
            << "unique_train_sequences=" << distinct << '\n'
            << "written_train_sequences=" << split.train.size() << '\n'
            << "test_sequences=" << split.test.size() << '\n'
            << "anomalous_sequences=" << split.anomalous.size() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string train;
  std::string out;
  std::string model = "ngram";
  int window = studied::kDefaultWindow;
  int mask = studied::kDefaultMask;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  std::optional<double> time_budget;
  CnnHyperParams cnn;
};

int cmd_train(const TrainArgs& a) {
  require_file(a.train);
  const WindowSpec spec{a.window, a.mask};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto kind = parse_model_kind(a.model);
  const auto train = read_event_sequences(fs::path(a.train));
  std::vector<EventSequence> normal;
  for (const auto& s : train) {
    if (s.label == Label::Normal) normal.push_back(s);
  }
  const auto vocab = Vocabulary::build(normal);
  const auto samples = window_all(encode_all(normal, vocab), spec, vocab);

  std::unique_ptr<Predictor> predictor;
  int epochs_run = 0;
  if (kind == ModelKind::Ngram) {
    predictor = std::make_unique<NgramModel>(NgramModel::fit(samples, spec, vocab.size()));
  } else {
    if (a.epochs.has_value() == a.time_budget.has_value()) {
      throw UsageError("cnn training needs exactly one of --epochs / --time-budget");
    }
    auto model = CnnModel<double>::init(vocab.size(), spec.context_size(), a.cnn, a.seed);
    const auto data = to_sample_matrix(samples, spec.context_size());
    epochs_run = a.epochs ? *a.epochs : calibrate_epochs(model, data, *a.time_budget);
    auto state = make_train_state(model);
    for (int e = 0; e < epochs_run; ++e) train_epoch(model, state, data, a.cnn.batch_size);
    std::cout << "final_loss=" << state.loss_history.back() << '\n';
    predictor = std::make_unique<CnnPredictor>(std::move(model), spec);
  }
  auto out = open_out(a.out);
  save_bundle(out, vocab, *predictor);
  std::cout << "model=" << predictor->kind() << '\n'
            << "window=" << spec.window << '\n'
            << "mask_position=" << spec.mask << '\n'
            << "train_sequences=" << normal.size() << '\n'
            << "train_samples=" << samples.size() << '\n'
            << "vocab_size=" << vocab.size() << '\n'
            << "epochs_run=" << epochs_run << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval / score

ModelBundle load_model(const std::string& path) {
  require_file(path);
  try {
    return load_bundle(fs::path(path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("model file: ") + e.what());
  } catch (const ModelMismatch& e) {
    throw UsageError(e.what());
  }
}

WindowSpec resolve_window(const Predictor& p, std::optional<int> window, std::optional<int> mask) {
  const auto own = p.window();
  if ((window && *window != own.window) || (mask && *mask != own.mask)) {
    throw UsageError("requested window/mask (" + std::to_string(window.value_or(own.window)) + "/" +
                     std::to_string(mask.value_or(own.mask)) + ") do not match the model (" +
                     std::to_string(own.window) + "/" + std::to_string(own.mask) + ")");
  }
  return own;
}

struct EvalArgs {
  std::string model;
  std::string test;
  std::string report;
  std::optional<int> window;
  std::optional<int> mask;
  bool per_sequence = false;
};

int cmd_eval(const EvalArgs& a) {
  const auto bundle = load_model(a.model);
  require_file(a.test);
  const auto spec = resolve_window(*bundle.predictor, a.window, a.mask);
  std::vector<EventSequence> normal;
  for (auto& s : read_event_sequences(fs::path(a.test))) {
    if (s.label == Label::Normal) normal.push_back(encode(s, bundle.vocab));
  }
  if (normal.empty()) throw UsageError("no normal sequences to evaluate");
  const auto report = evaluate_accuracy(*bundle.predictor, normal, spec, bundle.vocab,
                                        EvalOptions{a.per_sequence, false});
  write_report(std::cout, report);
  if (!a.report.empty()) {
    auto out = open_out(a.report);
    write_report(out, report);
  }
  return kOk;
}

struct ScoreArgs {
  std::string model;
  std::string events;
  std::string out;
  std::optional<int> window;
  std::optional<int> mask;
  std::size_t top = 10;
};

int cmd_score(const ScoreArgs& a) {
  const auto bundle = load_model(a.model);
  require_file(a.events);
  const auto spec = resolve_window(*bundle.predictor, a.window, a.mask);
  if (a.top < 1) throw UsageError("--top must be >= 1");
  std::vector<EventScore> all;
  for (const auto& s : read_event_sequences(fs::path(a.events))) {
    auto scores = score_sequence(*bundle.predictor, encode(s, bundle.vocab), spec, bundle.vocab);
    all.insert(all.end(), scores.begin(), scores.end());
  }
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_scores(out, all);
  }
  std::cout << "scored_events=" << all.size() << '\n';
  std::cout.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : topk_suspicious(all, a.top)) {
    std::cout << "suspicious seq_id=" << s.seq_id << " t=" << s.t << " actual=" << s.actual
              << " predicted=" << s.predicted << " p_actual=" << s.p_actual
              << " suspiciousness=" << s.suspiciousness << " rank=" << s.rank << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string events;
  std::string spec;
  std::string out;
  std::string baseline_table;
  int workers = 1;
  bool timing = false;
};

int cmd_sweep(const SweepArgs& a) {
  require_file(a.events);
  require_file(a.spec);
  GridSpec grid;
  try {
    grid = GridSpec::from_key_values(KeyValueFile::load(a.spec));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sweep spec: ") + e.what());
  }
  if (a.workers < 1) throw UsageError("--workers must be >= 1");
  const auto data = read_event_sequences(fs::path(a.events));
  std::vector<std::string> warnings;
  const auto configs = expand_grid(grid, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  const auto rows = run_sweep(configs, data, a.workers);

  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  {
    auto out = open_out(a.out);
    write_results_csv(out, rows, CsvOptions{a.timing});
  }
  if (!a.baseline_table.empty()) {
    const auto table = baseline_vs_default(data, grid.defaults, grid.models, a.workers);
    for (const auto& t : table) {
      failed += (t.default_row.ok() ? 0 : 1) + (t.baseline_row.ok() ? 0 : 1);
    }
    auto out = open_out(a.baseline_table);
    write_baseline_table(out, table);
  }
  std::cout << "configs=" << configs.size() << '\n'
            << "dropped=" << warnings.size() << '\n'
            << "failed=" << failed << '\n';
  return failed == 0 ? kOk : kDegraded;
}

// ---------------------------------------------------------------- gen-synth

struct SynthArgs {
  std::string kind = "markov";
  std::string out;
  std::size_t sequences = 1000;
  int vocab = 10;
  int order = 1;
  std::size_t scripts = 5;
  std::size_t max_length = 200;
  double end_prob = 0.05;
  std::uint64_t seed = 0;
  std::size_t anomalous = 0;
};

int cmd_gen_synth(const SynthArgs& a) {
  std::vector<EventSequence> seqs;
  TemplateId foreign = 0;
  if (a.kind == "markov") {
    const auto chain = MarkovChain::random(a.vocab, a.order, a.seed, a.end_prob);
    seqs = chain.sample(a.sequences, a.seed + 1, a.max_length, "markov");
    foreign = a.vocab + 1;
  } else if (a.kind == "deterministic") {
    seqs = deterministic_corpus(a.sequences, a.scripts, a.seed);
    for (const auto& s : seqs) {
      for (const auto e : s.events) foreign = std::max(foreign, e + 1);
    }
  } else {
    throw UsageError("--kind must be markov or deterministic");
  }
  // Anomalous copies: an unseen event injected into the middle of a normal sequence.
  const auto n_normal = seqs.size();
  for (std::size_t i = 0; i < a.anomalous && n_normal > 0; ++i) {
    auto s = inject_event(seqs[i % n_normal], seqs[i % n_normal].events.size() / 2, foreign);
    s.seq_id = "anomaly-" + std::to_string(i);
    s.label = Label::Anomalous;
    seqs.push_back(std::move(s));
  }
  auto out = open_out(a.out);
  write_event_sequences(out, seqs);
  std::cout << "sequences=" << seqs.size() << '\n' << "anomalous_sequences=" << a.anomalous << '\n';
  return kOk;
}

void add_cnn_flags(CLI::App* cmd, CnnHyperParams& hp) {
  cmd->add_option("--embedding-dim", hp.embedding_dim, "CNN embedding size")->capture_default_str();
  cmd->add_option("--filters", hp.filters, "CNN filter count")->capture_default_str();
  cmd->add_option("--filter-width", hp.filter_width, "CNN filter width")->capture_default_str();
  cmd->add_option("--hidden", hp.hidden, "CNN hidden units")->capture_default_str();
  cmd->add_option("--learning-rate", hp.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", hp.batch_size, "mini-batch size")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logmask: masked event prediction for software log anomaly detection"};
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "parse raw logs into templates and event sequences");
  parse->add_option("-i,--input", parse_args.inputs, "raw log file(s)")->required();
  parse->add_option("-c,--config", parse_args.config, "loader config file");
  parse->add_option("--templates", parse_args.templates_out, "template output file");
  parse->add_option("-o,--events", parse_args.events_out, "parsed-event output file")->required();
  parse->add_option("--grouped", parse_args.grouped_out, "grouped-log output file");
  parse->add_option("--frozen-templates", parse_args.frozen_templates,
                    "match against an existing template file without learning new ones");

  PrepArgs prep_args;
  auto* prep = app.add_subcommand("prep", "split parsed sequences into train/test sets");
  prep->add_option("-e,--events", prep_args.events, "parsed-event file")->required();
  prep->add_option("-o,--out", prep_args.out_dir, "output directory")->required();
  prep->add_option("--split", prep_args.split, "split for train data")->capture_default_str();
  prep->add_option("--seed", prep_args.seed, "shuffle seed")->capture_default_str();
  prep->add_flag("--unique", prep_args.unique, "keep only unique training sequences");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a masked-event predictor");
  train->add_option("-t,--train", train_args.train, "training event file")->required();
  train->add_option("-o,--out", train_args.out, "model output file")->required();
  train->add_option("--model", train_args.model, "ngram or cnn")->capture_default_str();
  train->add_option("--window", train_args.window, "sliding window")->capture_default_str();
  train->add_option("--mask-position", train_args.mask, "mask position")->capture_default_str();
  train->add_option("--seed", train_args.seed, "initialization/shuffle seed")->capture_default_str();
  train->add_option("--epochs", train_args.epochs, "CNN epochs");
  train->add_option("--time-budget", train_args.time_budget, "CNN time budget in seconds");
  add_cnn_flags(train, train_args.cnn);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "masked prediction accuracy on held-out sequences");
  eval->add_option("-m,--model-file", eval_args.model, "trained model file")->required();
  eval->add_option("-t,--test", eval_args.test, "test event file")->required();
  eval->add_option("-r,--report", eval_args.report, "report output file");
  eval->add_option("--window", eval_args.window, "expected sliding window");
  eval->add_option("--mask-position", eval_args.mask, "expected mask position");
  eval->add_flag("--per-sequence", eval_args.per_sequence, "include per-sequence accuracy");

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "per-event suspiciousness scores");
  score->add_option("-m,--model-file", score_args.model, "trained model file")->required();
  score->add_option("-e,--events", score_args.events, "event file to score")->required();
  score->add_option("-o,--out", score_args.out, "scores output file");
  score->add_option("--window", score_args.window, "expected sliding window");
  score->add_option("--mask-position", score_args.mask, "expected mask position");
  score->add_option("-k,--top", score_args.top, "how many suspicious events to list")
      ->capture_default_str();

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "run a configuration sweep");
  sweep->add_option("-e,--events", sweep_args.events, "parsed-event file")->required();
  sweep->add_option("-s,--spec", sweep_args.spec, "sweep spec file")->required();
  sweep->add_option("-o,--out", sweep_args.out, "results CSV")->required();
  sweep->add_option("--baseline-table", sweep_args.baseline_table,
                    "also write default-vs-baseline comparison CSV");
  sweep->add_option("-w,--workers", sweep_args.workers, "parallel workers")->capture_default_str();
  sweep->add_flag("--timing", sweep_args.timing, "record train_seconds (not reproducible)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("gen-synth", "write a synthetic parsed-event dataset");
  synth->add_option("-o,--out", synth_args.out, "output event file")->required();
  synth->add_option("--kind", synth_args.kind, "markov or deterministic")->capture_default_str();
  synth->add_option("--sequences", synth_args.sequences, "number of sequences")->capture_default_str();
  synth->add_option("--vocab", synth_args.vocab, "Markov event count")->capture_default_str();
  synth->add_option("--order", synth_args.order, "Markov order")->capture_default_str();
  synth->add_option("--scripts", synth_args.scripts, "deterministic scripts")->capture_default_str();
  synth->add_option("--max-length", synth_args.max_length, "Markov length cap")->capture_default_str();
  synth->add_option("--end-prob", synth_args.end_prob, "Markov end probability")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "generator seed")->capture_default_str();
  synth->add_option("--anomalous", synth_args.anomalous, "injected anomalous sequences")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_args);
    if (*prep) return cmd_prep(prep_args);
    if (*train) return cmd_train(train_args);
    if (*eval) return cmd_eval(eval_args);
    if (*score) return cmd_score(score_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*synth) return cmd_gen_synth(synth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
