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

#include <cmath>
#include <random>
#include <sstream>

#include "logmask/cnn_predictor.hpp"

using namespace logmask;

namespace {

CnnHyperParams small_hp() {
  CnnHyperParams hp;
  hp.embedding_dim = 6;
  hp.filters = 4;
  hp.filter_width = 3;
  hp.hidden = 8;
  hp.batch_size = 5;
  return hp;
}

ContextBatch random_batch(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, int vocab) {
  ContextBatch b(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) b(i, j) = static_cast<EventId>(rng() % vocab);
  }
  return b;
}

// Largest relative error between analytic and central-difference gradients.
double gradient_check(CnnModel<double>& model, const ContextBatch& x, const TargetVector& y,
                      double eps) {
  const auto analytic = model.loss_and_gradients(x, y).gradients;
  double worst = 0.0;
  auto& params = model.parameters();
  std::vector<Eigen::MatrixXd> grads;
  analytic.for_each([&](const char*, const auto& g) { grads.emplace_back(g); });
  std::size_t index = 0;
  params.for_each([&](const char*, auto& tensor) {
    const auto& g = grads[index++];
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.data()[i];
      tensor.data()[i] = saved + eps;
      const double up = model.loss_and_gradients(x, y).loss;
      tensor.data()[i] = saved - eps;
      const double down = model.loss_and_gradients(x, y).loss;
      tensor.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = g.data()[i];
      const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(a - numeric) / scale);
    }
  });
  return worst;
}

}  // namespace

TEST_CASE("output shape and normalization") {
  const auto model = CnnModel<double>::init(12, 4, small_hp(), 1);
  std::mt19937_64 rng(1);
  const auto x = random_batch(rng, 5, 4, 12);
  const auto probs = model.forward(x);
  REQUIRE(probs.rows() == 5);
  REQUIRE(probs.cols() == 12);
  for (Eigen::Index b = 0; b < 5; ++b) {
    CHECK(probs.row(b).sum() == doctest::Approx(1.0));
    CHECK(probs.row(b).minCoeff() > 0.0);
  }
}

TEST_CASE("initialization is seeded and bounded") {
  const auto a = CnnModel<double>::init(12, 4, small_hp(), 7);
  const auto b = CnnModel<double>::init(12, 4, small_hp(), 7);
  const auto c = CnnModel<double>::init(12, 4, small_hp(), 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.parameters().embedding.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(a.parameters().conv_bias.isZero());
  CHECK(a.parameters().output_bias.isZero());
}

TEST_CASE("invalid shapes are rejected") {
  CHECK_THROWS_AS(CnnModel<double>::init(3, 4, small_hp(), 1), std::invalid_argument);
  CHECK_THROWS_AS(CnnModel<double>::init(12, 2, small_hp(), 1), std::invalid_argument);
  const auto model = CnnModel<double>::init(12, 4, small_hp(), 1);
  ContextBatch wrong(1, 5);
  wrong.setZero();
  CHECK_THROWS_AS((void)model.forward(wrong), std::invalid_argument);
  ContextBatch out_of_range(1, 4);
  out_of_range << 0, 1, 2, 12;
  CHECK_THROWS_AS((void)model.forward(out_of_range), std::invalid_argument);
}

TEST_CASE("zero weights give a uniform distribution and loss ln V") {
  auto model = CnnModel<double>::init(12, 4, small_hp(), 1);
  model.parameters() = model.parameters().zeros_like();
  std::mt19937_64 rng(2);
  const auto x = random_batch(rng, 5, 4, 12);
  const auto probs = model.forward(x);
  for (Eigen::Index i = 0; i < probs.size(); ++i) CHECK(probs.data()[i] == doctest::Approx(1.0 / 12));
  TargetVector y(5);
  y << 0, 3, 5, 7, 11;
  CHECK(model.loss_and_gradients(x, y).loss == doctest::Approx(std::log(12.0)));
}

TEST_CASE("embeddings of absent events get no gradient") {
  auto model = CnnModel<double>::init(12, 4, small_hp(), 3);
  ContextBatch x(2, 4);
  x << 0, 1, 2, 3, 3, 2, 1, 0;
  TargetVector y(2);
  y << 5, 6;
  const auto g = model.loss_and_gradients(x, y).gradients;
  for (int e = 4; e < 12; ++e) CHECK(g.embedding.row(e).isZero());
  CHECK_FALSE(g.embedding.topRows(4).isZero());
}

TEST_CASE("analytic gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto hp = small_hp();
    hp.init_scale = 0.5;  // away from ReLU kinks and pooling ties
    auto model = CnnModel<double>::init(12, 4, hp, seed);
    std::mt19937_64 rng(seed);
    model.parameters().conv_bias.setRandom();
    model.parameters().hidden_bias.setRandom();
    const auto x = random_batch(rng, 5, 4, 12);
    TargetVector y(5);
    for (int i = 0; i < 5; ++i) y(i) = static_cast<EventId>(rng() % 12);
    CHECK(gradient_check(model, x, y, 1e-5) < 1e-4);
  }
}

TEST_CASE("max pooling is invariant to shifting the winning window") {
  // The same three-event motif at different offsets pools to the same features
  // when the rest of the context is a neutral event.
  auto hp = small_hp();
  auto model = CnnModel<double>::init(12, 6, hp, 5);
  model.parameters().embedding.row(0).setZero();
  model.parameters().conv_bias.setConstant(-10.0);
  model.parameters().conv_weight *= 100.0;
  ContextBatch x(2, 6);
  x << 3, 4, 5, 0, 0, 0,  //
      0, 0, 0, 3, 4, 5;
  const auto probs = model.forward(x);
  CHECK((probs.row(0) - probs.row(1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("training a tiny set drives the loss down") {
  std::vector<MaskedSample> samples;
  for (int i = 0; i < 20; ++i) {
    samples.push_back(MaskedSample{{EventId(i % 5), EventId((i / 5) % 4), EventId(i % 3), 1},
                                   EventId(i % 10), 0, 0});
  }
  auto hp = small_hp();
  hp.embedding_dim = 16;
  hp.filters = 32;
  hp.hidden = 32;
  hp.learning_rate = 1e-2;
  hp.batch_size = 4;
  const auto result = train_cnn(samples, 12, WindowSpec{5, 0}, hp, 9, 50);
  REQUIRE(result.state.loss_history.size() == 50);
  CHECK(result.state.loss_history.front() > 2.0);
  CHECK(result.state.loss_history.back() < 0.1);
  CHECK(result.model.parameters().all_finite());
  const auto again = train_cnn(samples, 12, WindowSpec{5, 0}, hp, 9, 50);
  CHECK(again.model == result.model);
  CHECK(again.state.loss_history == result.state.loss_history);
}

TEST_CASE("divergent training is reported") {
  std::vector<MaskedSample> samples{{{0, 1, 2, 3}, 4, 0, 0}, {{3, 2, 1, 0}, 5, 0, 0}};
  auto model = CnnModel<double>::init(12, 4, small_hp(), 1);
  model.parameters().output_weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  auto state = make_train_state(model);
  CHECK_THROWS_AS(train_epoch(model, state, to_sample_matrix(samples, 4), 2), std::runtime_error);
}

TEST_CASE("epoch budget arithmetic") {
  CHECK(epochs_for_budget(4.8, 300.0) == 62);
  CHECK(epochs_for_budget(10.0, 5.0) == 1);
  CHECK_THROWS_AS(epochs_for_budget(0.0, 5.0), std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves predictions") {
  std::vector<MaskedSample> samples;
  for (int i = 0; i < 12; ++i) {
    samples.push_back(MaskedSample{{EventId(i % 4), EventId(i % 3), EventId(i % 2), 0},
                                   EventId(i % 6), 0, 0});
  }
  const WindowSpec spec{5, 1};
  const auto result = train_cnn(samples, 10, spec, small_hp(), 4, 3);
  const CnnPredictor predictor(result.model, spec);
  std::stringstream ss;
  predictor.save(ss);
  const auto loaded = CnnPredictor::load(ss);
  CHECK(loaded.model() == predictor.model());
  CHECK(loaded.window().mask == 1);
  for (const auto& s : samples) {
    const auto a = predictor.assess(s.context, s.target);
    const auto b = loaded.assess(s.context, s.target);
    CHECK(a.predicted == b.predicted);
    CHECK(a.p_actual == b.p_actual);
    CHECK(a.rank == b.rank);
  }
  std::istringstream bad("logmask-cnn 1\n5 1\n");
  CHECK_THROWS(CnnPredictor::load(bad));
}

TEST_CASE("assessment rank counts strictly better events") {
  auto model = CnnModel<double>::init(8, 3, small_hp(), 1);
  model.parameters() = model.parameters().zeros_like();
  model.parameters().output_bias << 0, 2, 1, 2, 0, 0, 0, 0;
  const CnnPredictor p(model, WindowSpec{4, 0});
  const std::vector<EventId> ctx{0, 1, 2};
  CHECK(p.predict(ctx).event == 1);
  CHECK(p.assess(ctx, 1).rank == 1);
  CHECK(p.assess(ctx, 3).rank == 2);
  CHECK(p.assess(ctx, 2).rank == 3);
  CHECK(p.assess(ctx, 0).rank == 4);
  CHECK(p.assess(ctx, 7).rank == 8);
}
