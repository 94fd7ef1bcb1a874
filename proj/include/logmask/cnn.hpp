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

// Convolutional masked-event predictor: embedding -> 1-D convolution (valid,
// ReLU) -> global max pooling -> dense ReLU -> linear -> softmax.
// Dense tensors are Eigen matrices templated on the scalar type so the
// gradient check can run the same code the trainer uses.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "logmask/types.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

/// Rows are samples, columns are context slots.
using ContextBatch = Eigen::Matrix<EventId, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using TargetVector = Eigen::Matrix<EventId, Eigen::Dynamic, 1>;

struct CnnHyperParams {
  int embedding_dim = 50;
  int filters = 64;
  int filter_width = 3;
  int hidden = 100;
  double learning_rate = 1e-3;
  int batch_size = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double init_scale = 0.05;

  void validate() const {
    if (embedding_dim < 1 || filters < 1 || filter_width < 1 || hidden < 1) {
      throw std::invalid_argument("cnn dimensions must be positive");
    }
    if (!(learning_rate > 0.0) || batch_size < 1) {
      throw std::invalid_argument("cnn learning rate and batch size must be positive");
    }
  }
};

template <typename Scalar>
struct CnnParameters {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix embedding;      // vocab x d_emb
  Matrix conv_weight;    // filters x (width * d_emb); a row is one flattened filter
  Vector conv_bias;      // filters
  Matrix hidden_weight;  // hidden x filters
  Vector hidden_bias;    // hidden
  Matrix output_weight;  // vocab x hidden
  Vector output_bias;    // vocab

  static constexpr int kTensorCount = 7;

  /// Calls `fn(name, tensor)` for each tensor in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("embedding", embedding);
    fn("conv_weight", conv_weight);
    fn("conv_bias", conv_bias);
    fn("hidden_weight", hidden_weight);
    fn("hidden_bias", hidden_bias);
    fn("output_weight", output_weight);
    fn("output_bias", output_bias);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<CnnParameters*>(this)->for_each(
        [&](const char* name, auto& t) { fn(name, static_cast<const std::decay_t<decltype(t)>&>(t)); });
  }

  /// Same shapes, all zero.
  [[nodiscard]] CnnParameters zeros_like() const {
    CnnParameters z = *this;
    z.for_each([](const char*, auto& t) { t.setZero(); });
    return z;
  }

  [[nodiscard]] bool all_finite() const {
    bool ok = true;
    for_each([&](const char*, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
  }

  friend bool operator==(const CnnParameters& a, const CnnParameters& b) {
    bool same = true;
    auto check = [&](const auto& x, const auto& y) {
      same = same && x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    check(a.embedding, b.embedding);
    check(a.conv_weight, b.conv_weight);
    check(a.conv_bias, b.conv_bias);
    check(a.hidden_weight, b.hidden_weight);
    check(a.hidden_bias, b.hidden_bias);
    check(a.output_weight, b.output_weight);
    check(a.output_bias, b.output_bias);
    return same;
  }
};

template <typename Scalar>
struct LossAndGradients {
  Scalar loss = 0;
  CnnParameters<Scalar> gradients;
};

/// Adam accumulators plus the per-epoch history.
template <typename Scalar>
struct TrainState {
  CnnParameters<Scalar> first_moment;
  CnnParameters<Scalar> second_moment;
  std::uint64_t steps = 0;
  int epochs = 0;
  std::vector<double> loss_history;
  std::vector<double> epoch_seconds;
};

template <typename Scalar>
class CnnModel {
 public:
  using Matrix = typename CnnParameters<Scalar>::Matrix;
  using Vector = typename CnnParameters<Scalar>::Vector;

  CnnModel() = default;

  /// Weights ~ U(-init_scale, init_scale) from a seeded engine, biases zero.
  static CnnModel init(std::size_t vocab_size, int context_size, const CnnHyperParams& hp,
                       std::uint64_t seed) {
    hp.validate();
    if (vocab_size < 4) throw std::invalid_argument("cnn vocabulary must hold at least 4 ids");
    if (context_size < hp.filter_width) {
      throw std::invalid_argument("cnn filter width " + std::to_string(hp.filter_width) +
                                  " exceeds context size " + std::to_string(context_size));
    }
    CnnModel m;
    m.hp_ = hp;
    m.vocab_ = static_cast<Eigen::Index>(vocab_size);
    m.context_ = context_size;
    m.seed_ = seed;
    const Eigen::Index d = hp.embedding_dim;
    const Eigen::Index f = hp.filters;
    const Eigen::Index w = hp.filter_width;
    const Eigen::Index h = hp.hidden;
    auto& p = m.params_;
    p.embedding.resize(m.vocab_, d);
    p.conv_weight.resize(f, w * d);
    p.conv_bias = Vector::Zero(f);
    p.hidden_weight.resize(h, f);
    p.hidden_bias = Vector::Zero(h);
    p.output_weight.resize(m.vocab_, h);
    p.output_bias = Vector::Zero(m.vocab_);

    std::mt19937_64 rng(seed);
    const double scale = hp.init_scale;
    // 53 random bits mapped to [-scale, scale); independent of <random> distributions.
    auto draw = [&]() {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      return static_cast<Scalar>((2.0 * u - 1.0) * scale);
    };
    for (auto* t : {&p.embedding, &p.conv_weight, &p.hidden_weight, &p.output_weight}) {
      for (Eigen::Index j = 0; j < t->cols(); ++j) {
        for (Eigen::Index i = 0; i < t->rows(); ++i) (*t)(i, j) = draw();
      }
    }
    return m;
  }

  [[nodiscard]] const CnnHyperParams& hyper_params() const { return hp_; }
  [[nodiscard]] std::size_t vocab_size() const { return static_cast<std::size_t>(vocab_); }
  [[nodiscard]] int context_size() const { return context_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] CnnParameters<Scalar>& parameters() { return params_; }
  [[nodiscard]] const CnnParameters<Scalar>& parameters() const { return params_; }

  /// Rebuilds a model from stored tensors (checkpoint loading).
  static CnnModel from_parameters(CnnParameters<Scalar> params, int context_size,
                                  const CnnHyperParams& hp, std::uint64_t seed) {
    CnnModel m;
    m.hp_ = hp;
    m.context_ = context_size;
    m.seed_ = seed;
    m.vocab_ = params.embedding.rows();
    const Eigen::Index d = hp.embedding_dim;
    const Eigen::Index f = hp.filters;
    const Eigen::Index h = hp.hidden;
    const bool ok = params.embedding.cols() == d &&
                    params.conv_weight.rows() == f &&
                    params.conv_weight.cols() == hp.filter_width * d &&
                    params.conv_bias.size() == f && params.hidden_weight.rows() == h &&
                    params.hidden_weight.cols() == f && params.hidden_bias.size() == h &&
                    params.output_weight.rows() == m.vocab_ &&
                    params.output_weight.cols() == h && params.output_bias.size() == m.vocab_ &&
                    context_size >= hp.filter_width;
    if (!ok) throw std::invalid_argument("cnn tensor shapes are inconsistent");
    m.params_ = std::move(params);
    return m;
  }

  /// Softmax distributions, one row per context row.
  [[nodiscard]] Matrix forward(const ContextBatch& contexts) const {
    Cache cache;
    run_forward(contexts, cache);
    return cache.probs.transpose();
  }

  /// Mean cross-entropy over the batch and its exact gradients.
  [[nodiscard]] LossAndGradients<Scalar> loss_and_gradients(const ContextBatch& contexts,
                                                            const TargetVector& targets) const {
    if (targets.size() != contexts.rows()) {
      throw std::invalid_argument("cnn: target count differs from batch size");
    }
    for (Eigen::Index b = 0; b < targets.size(); ++b) {
      if (targets(b) < 0 || targets(b) >= vocab_) {
        throw std::invalid_argument("cnn: target id outside the vocabulary");
      }
    }
    Cache c;
    run_forward(contexts, c);
    const Eigen::Index batch = contexts.rows();
    const Scalar inv = Scalar(1) / static_cast<Scalar>(batch);
    const Scalar floor = static_cast<Scalar>(1e-12);

    LossAndGradients<Scalar> out;
    out.gradients = params_.zeros_like();
    auto& g = out.gradients;

    Matrix d_out = c.probs;  // vocab x batch
    Scalar loss = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
      loss -= std::log(std::max(c.probs(targets(b), b), floor));
      d_out(targets(b), b) -= Scalar(1);
    }
    out.loss = loss * inv;
    d_out *= inv;

    g.output_weight.noalias() = d_out * c.hidden.transpose();
    g.output_bias = d_out.rowwise().sum();
    Matrix d_hidden = params_.output_weight.transpose() * d_out;
    d_hidden = (c.hidden_pre.array() > Scalar(0)).select(d_hidden, Scalar(0));
    g.hidden_weight.noalias() = d_hidden * c.pooled.transpose();
    g.hidden_bias = d_hidden.rowwise().sum();
    const Matrix d_pooled = params_.hidden_weight.transpose() * d_hidden;  // filters x batch

    const Eigen::Index d = hp_.embedding_dim;
    const Eigen::Index w = hp_.filter_width;
    Matrix d_patch(c.patches[0].rows(), c.patches[0].cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      const Matrix& patches = c.patches[static_cast<std::size_t>(b)];
      const Matrix& conv = c.conv[static_cast<std::size_t>(b)];
      d_patch.setZero();
      for (Eigen::Index f = 0; f < hp_.filters; ++f) {
        const Eigen::Index j = c.argmax(f, b);
        if (!(conv(j, f) > Scalar(0))) continue;
        const Scalar dz = d_pooled(f, b);
        g.conv_weight.row(f).noalias() += dz * patches.row(j);
        g.conv_bias(f) += dz;
        d_patch.row(j).noalias() += dz * params_.conv_weight.row(f);
      }
      for (Eigen::Index j = 0; j < d_patch.rows(); ++j) {
        for (Eigen::Index k = 0; k < w; ++k) {
          g.embedding.row(contexts(b, j + k)).noalias() +=
              d_patch.row(j).segment(k * d, d);
        }
      }
    }
    return out;
  }

  /// Argmax of the distribution; ties go to the smallest id.
  [[nodiscard]] std::pair<EventId, Scalar> predict(std::span<const EventId> context) const {
    const Vector p = distribution(context);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p.size(); ++i) {
      if (p(i) > p(best)) best = i;
    }
    return {static_cast<EventId>(best), p(best)};
  }

  [[nodiscard]] Vector distribution(std::span<const EventId> context) const {
    ContextBatch one(1, static_cast<Eigen::Index>(context.size()));
    for (std::size_t i = 0; i < context.size(); ++i) one(0, static_cast<Eigen::Index>(i)) = context[i];
    Cache c;
    run_forward(one, c);
    return c.probs.col(0);
  }

  friend bool operator==(const CnnModel& a, const CnnModel& b) {
    return a.vocab_ == b.vocab_ && a.context_ == b.context_ && a.seed_ == b.seed_ &&
           a.params_ == b.params_;
  }

 private:
  struct Cache {
    std::vector<Matrix> patches;  // per sample: positions x (width * d_emb)
    std::vector<Matrix> conv;     // per sample: positions x filters, pre-activation
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> argmax;  // filters x batch
    Matrix pooled;      // filters x batch
    Matrix hidden_pre;  // hidden x batch
    Matrix hidden;      // hidden x batch
    Matrix probs;       // vocab x batch
  };

  void run_forward(const ContextBatch& contexts, Cache& c) const {
    if (contexts.cols() != context_) {
      throw std::invalid_argument("cnn: context length " + std::to_string(contexts.cols()) +
                                  " differs from " + std::to_string(context_));
    }
    if (contexts.rows() == 0) throw std::invalid_argument("cnn: empty batch");
    const Eigen::Index batch = contexts.rows();
    const Eigen::Index d = hp_.embedding_dim;
    const Eigen::Index w = hp_.filter_width;
    const Eigen::Index f = hp_.filters;
    const Eigen::Index positions = context_ - w + 1;

    c.patches.resize(static_cast<std::size_t>(batch));
    c.conv.resize(static_cast<std::size_t>(batch));
    c.argmax.resize(f, batch);
    c.pooled.resize(f, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      Matrix& patches = c.patches[static_cast<std::size_t>(b)];
      patches.resize(positions, w * d);
      for (Eigen::Index j = 0; j < positions; ++j) {
        for (Eigen::Index k = 0; k < w; ++k) {
          const EventId e = contexts(b, j + k);
          if (e < 0 || e >= vocab_) throw std::invalid_argument("cnn: context id outside vocabulary");
          patches.row(j).segment(k * d, d) = params_.embedding.row(e);
        }
      }
      Matrix& conv = c.conv[static_cast<std::size_t>(b)];
      conv.noalias() = patches * params_.conv_weight.transpose();
      conv.rowwise() += params_.conv_bias.transpose();
      for (Eigen::Index fi = 0; fi < f; ++fi) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < positions; ++j) {
          if (conv(j, fi) > conv(best, fi)) best = j;
        }
        c.argmax(fi, b) = best;
        c.pooled(fi, b) = std::max(conv(best, fi), Scalar(0));
      }
    }
    c.hidden_pre.noalias() = params_.hidden_weight * c.pooled;
    c.hidden_pre.colwise() += params_.hidden_bias;
    c.hidden = c.hidden_pre.cwiseMax(Scalar(0));
    c.probs.noalias() = params_.output_weight * c.hidden;
    c.probs.colwise() += params_.output_bias;
    for (Eigen::Index b = 0; b < batch; ++b) {
      auto col = c.probs.col(b);
      const Scalar top = col.maxCoeff();
      col = (col.array() - top).exp();
      col /= col.sum();
    }
  }

  CnnHyperParams hp_;
  Eigen::Index vocab_ = 0;
  int context_ = 0;
  std::uint64_t seed_ = 0;
  CnnParameters<Scalar> params_;
};

template <typename Scalar>
TrainState<Scalar> make_train_state(const CnnModel<Scalar>& model) {
  TrainState<Scalar> s;
  s.first_moment = model.parameters().zeros_like();
  s.second_moment = model.parameters().zeros_like();
  return s;
}

/// One Adam step on `grads`.
template <typename Scalar>
void adam_step(CnnModel<Scalar>& model, TrainState<Scalar>& state,
               const CnnParameters<Scalar>& grads) {
  const auto& hp = model.hyper_params();
  ++state.steps;
  const auto t = static_cast<double>(state.steps);
  const Scalar b1 = static_cast<Scalar>(hp.beta1);
  const Scalar b2 = static_cast<Scalar>(hp.beta2);
  const Scalar step = static_cast<Scalar>(hp.learning_rate * std::sqrt(1.0 - std::pow(hp.beta2, t)) /
                                          (1.0 - std::pow(hp.beta1, t)));
  const Scalar eps = static_cast<Scalar>(hp.epsilon);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= step * m.array() / (v.array().sqrt() + eps);
  };
  auto& p = model.parameters();
  auto& m = state.first_moment;
  auto& v = state.second_moment;
  update(p.embedding, grads.embedding, m.embedding, v.embedding);
  update(p.conv_weight, grads.conv_weight, m.conv_weight, v.conv_weight);
  update(p.conv_bias, grads.conv_bias, m.conv_bias, v.conv_bias);
  update(p.hidden_weight, grads.hidden_weight, m.hidden_weight, v.hidden_weight);
  update(p.hidden_bias, grads.hidden_bias, m.hidden_bias, v.hidden_bias);
  update(p.output_weight, grads.output_weight, m.output_weight, v.output_weight);
  update(p.output_bias, grads.output_bias, m.output_bias, v.output_bias);
}

/// Training samples laid out as Eigen blocks.
struct SampleMatrix {
  ContextBatch contexts;
  TargetVector targets;

  [[nodiscard]] Eigen::Index size() const { return targets.size(); }
};

SampleMatrix to_sample_matrix(std::span<const MaskedSample> samples, int context_size);

/// One shuffled pass of mini-batch Adam. The shuffle is seeded by the model
/// seed and the epoch number. Throws std::runtime_error on a non-finite loss.
template <typename Scalar>
void train_epoch(CnnModel<Scalar>& model, TrainState<Scalar>& state, const SampleMatrix& data,
                 int batch_size) {
  if (data.size() == 0) throw std::invalid_argument("cnn: no training samples");
  if (batch_size < 1) throw std::invalid_argument("cnn: batch size must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(data.size());
  const auto perm = seeded_permutation(
      n, model.seed() ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(state.epochs + 1)));
  double weighted_loss = 0.0;
  ContextBatch ctx;
  TargetVector tgt;
  for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(n, begin + static_cast<std::size_t>(batch_size));
    const auto rows = static_cast<Eigen::Index>(end - begin);
    ctx.resize(rows, data.contexts.cols());
    tgt.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto src = static_cast<Eigen::Index>(perm[begin + static_cast<std::size_t>(r)]);
      ctx.row(r) = data.contexts.row(src);
      tgt(r) = data.targets(src);
    }
    auto lg = model.loss_and_gradients(ctx, tgt);
    if (!std::isfinite(static_cast<double>(lg.loss))) {
      throw std::runtime_error("cnn training diverged: non-finite loss at epoch " +
                               std::to_string(state.epochs + 1) + ", batch starting at " +
                               std::to_string(begin));
    }
    weighted_loss += static_cast<double>(lg.loss) * static_cast<double>(rows);
    adam_step(model, state, lg.gradients);
  }
  if (!model.parameters().all_finite()) {
    throw std::runtime_error("cnn training produced non-finite parameters at epoch " +
                             std::to_string(state.epochs + 1));
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  ++state.epochs;
  state.loss_history.push_back(weighted_loss / static_cast<double>(n));
  state.epoch_seconds.push_back(std::max(elapsed.count(), std::numeric_limits<double>::min()));
}

/// max(1, floor(budget / seconds_per_epoch)).
int epochs_for_budget(double seconds_per_epoch, double budget_seconds);

/// Times one epoch on a copy of `model` and converts the budget into an epoch count.
template <typename Scalar>
int calibrate_epochs(const CnnModel<Scalar>& model, const SampleMatrix& data,
                     double budget_seconds) {
  if (!(budget_seconds > 0.0)) throw std::invalid_argument("time budget must be positive");
  CnnModel<Scalar> probe = model;
  auto state = make_train_state(probe);
  train_epoch(probe, state, data, probe.hyper_params().batch_size);
  return epochs_for_budget(state.epoch_seconds.back(), budget_seconds);
}

}  // namespace logmask
