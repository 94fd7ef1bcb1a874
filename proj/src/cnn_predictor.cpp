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

#include "logmask/cnn_predictor.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace logmask {

namespace {
constexpr const char* kMagic = "logmask-cnn";
constexpr int kFormatVersion = 1;
}  // namespace

SampleMatrix to_sample_matrix(std::span<const MaskedSample> samples, int context_size) {
  SampleMatrix m;
  const auto n = static_cast<Eigen::Index>(samples.size());
  m.contexts.resize(n, context_size);
  m.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (static_cast<int>(s.context.size()) != context_size) {
      throw std::invalid_argument("sample context length differs from window - 1");
    }
    for (int j = 0; j < context_size; ++j) m.contexts(i, j) = s.context[static_cast<std::size_t>(j)];
    m.targets(i) = s.target;
  }
  return m;
}

int epochs_for_budget(double seconds_per_epoch, double budget_seconds) {
  if (!(seconds_per_epoch > 0.0)) throw std::invalid_argument("epoch time must be positive");
  const double ratio = std::floor(budget_seconds / seconds_per_epoch);
  if (ratio < 1.0) return 1;
  if (ratio > static_cast<double>(std::numeric_limits<int>::max())) {
    return std::numeric_limits<int>::max();
  }
  return static_cast<int>(ratio);
}

CnnPredictor::CnnPredictor(CnnModel<double> model, WindowSpec spec)
    : model_(std::move(model)), spec_(spec) {
  spec_.validate();
  if (spec_.context_size() != model_.context_size()) {
    throw std::invalid_argument("cnn model context size does not match the window");
  }
}

Prediction CnnPredictor::predict(std::span<const EventId> context) const {
  const auto [e, p] = model_.predict(context);
  return {e, p};
}

Assessment CnnPredictor::assess(std::span<const EventId> context, EventId actual) const {
  const Eigen::VectorXd p = model_.distribution(context);
  Assessment a;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p(i) > p(best)) best = i;
  }
  a.predicted = static_cast<EventId>(best);
  a.p_predicted = p(best);
  const bool known = actual >= 0 && actual < p.size();
  a.p_actual = known ? p(actual) : 0.0;
  std::size_t ahead = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i == actual) continue;
    if (p(i) > a.p_actual || (p(i) == a.p_actual && (!known || i < actual))) ++ahead;
  }
  a.rank = ahead + 1;
  return a;
}

void CnnPredictor::save(std::ostream& out) const {
  const auto& hp = model_.hyper_params();
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "window " << spec_.window << " mask " << spec_.mask << '\n';
  out << "vocab " << model_.vocab_size() << " seed " << model_.seed() << '\n';
  out << "hyper " << hp.embedding_dim << ' ' << hp.filters << ' ' << hp.filter_width << ' '
      << hp.hidden << ' ' << hp.learning_rate << ' ' << hp.batch_size << ' ' << hp.beta1 << ' '
      << hp.beta2 << ' ' << hp.epsilon << ' ' << hp.init_scale << '\n';
  model_.parameters().for_each([&](const char* name, const auto& t) {
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        if (j > 0) out << ' ';
        out << t(i, j);
      }
      out << '\n';
    }
  });
  out << "end\n";
  out.precision(old);
}

CnnPredictor CnnPredictor::load(std::istream& in) {
  auto expect = [&](const char* word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw std::invalid_argument(std::string("cnn checkpoint: expected '") + word + "'");
    }
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw std::invalid_argument("not a cnn checkpoint");
  }
  if (version != kFormatVersion) {
    throw std::invalid_argument("unsupported cnn checkpoint version " + std::to_string(version));
  }
  WindowSpec spec;
  std::size_t vocab = 0;
  std::uint64_t seed = 0;
  CnnHyperParams hp;
  expect("window");
  in >> spec.window;
  expect("mask");
  in >> spec.mask;
  expect("vocab");
  in >> vocab;
  expect("seed");
  in >> seed;
  expect("hyper");
  in >> hp.embedding_dim >> hp.filters >> hp.filter_width >> hp.hidden >> hp.learning_rate >>
      hp.batch_size >> hp.beta1 >> hp.beta2 >> hp.epsilon >> hp.init_scale;
  if (!in) throw std::invalid_argument("cnn checkpoint: malformed header");

  CnnParameters<double> params;
  params.for_each([&](const char* name, auto& t) {
    expect("tensor");
    std::string got;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    in >> got >> rows >> cols;
    if (!in || got != name || rows < 0 || cols < 0) {
      throw std::invalid_argument(std::string("cnn checkpoint: bad tensor header for ") + name);
    }
    if constexpr (std::decay_t<decltype(t)>::ColsAtCompileTime == 1) {
      if (cols != 1) throw std::invalid_argument("cnn checkpoint: vector tensor with cols != 1");
      t.resize(rows);
    } else {
      t.resize(rows, cols);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(in >> t(i, j))) throw std::invalid_argument("cnn checkpoint: truncated tensor");
      }
    }
  });
  expect("end");
  if (static_cast<std::size_t>(params.embedding.rows()) != vocab) {
    throw std::invalid_argument("cnn checkpoint: vocabulary size mismatch");
  }
  spec.validate();
  return CnnPredictor(
      CnnModel<double>::from_parameters(std::move(params), spec.context_size(), hp, seed), spec);
}

CnnTrainResult train_cnn(std::span<const MaskedSample> samples, std::size_t vocab_size,
                         WindowSpec spec, const CnnHyperParams& hp, std::uint64_t seed,
                         int epochs) {
  if (epochs < 1) throw std::invalid_argument("cnn: epochs must be >= 1");
  auto model = CnnModel<double>::init(vocab_size, spec.context_size(), hp, seed);
  auto state = make_train_state(model);
  const auto data = to_sample_matrix(samples, spec.context_size());
  for (int e = 0; e < epochs; ++e) train_epoch(model, state, data, hp.batch_size);
  return {std::move(model), std::move(state)};
}

}  // namespace logmask
