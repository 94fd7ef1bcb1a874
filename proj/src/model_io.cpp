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

#include "logmask/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "logmask/cnn_predictor.hpp"
#include "logmask/ngram.hpp"

namespace logmask {

namespace {
constexpr const char* kMagic = "logmask-model";
constexpr int kFormatVersion = 1;
}  // namespace

void save_bundle(std::ostream& out, const Vocabulary& vocab, const Predictor& predictor) {
  if (predictor.vocab_size() != vocab.size()) {
    throw ModelMismatch("predictor vocabulary size differs from the vocabulary");
  }
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "kind " << predictor.kind() << '\n';
  out << "vocab " << vocab.template_count();
  for (const auto id : vocab.templates()) out << ' ' << id;
  out << '\n';
  if (const auto* ngram = dynamic_cast<const NgramModel*>(&predictor)) {
    ngram->save(out);
  } else if (const auto* cnn = dynamic_cast<const CnnPredictor*>(&predictor)) {
    cnn->save(out);
  } else {
    throw std::invalid_argument("unsupported predictor kind");
  }
}

ModelBundle load_bundle(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw std::invalid_argument("not a model file");
  if (version != kFormatVersion) {
    throw std::invalid_argument("unsupported model file version " + std::to_string(version));
  }
  std::string word;
  std::string kind;
  if (!(in >> word >> kind) || word != "kind") throw std::invalid_argument("model file: missing kind");
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "vocab") throw std::invalid_argument("model file: missing vocab");
  std::vector<TemplateId> ids(count);
  for (auto& id : ids) {
    if (!(in >> id)) throw std::invalid_argument("model file: truncated vocabulary");
  }
  ModelBundle b;
  b.vocab = Vocabulary::from_templates(std::move(ids));
  if (kind == "ngram") {
    b.predictor = std::make_unique<NgramModel>(NgramModel::load(in));
  } else if (kind == "cnn") {
    b.predictor = std::make_unique<CnnPredictor>(CnnPredictor::load(in));
  } else {
    throw std::invalid_argument("model file: unknown kind '" + kind + "'");
  }
  if (b.predictor->vocab_size() != b.vocab.size()) {
    throw ModelMismatch("model vocabulary (" + std::to_string(b.vocab.size()) +
                        ") does not match predictor output size (" +
                        std::to_string(b.predictor->vocab_size()) + ")");
  }
  return b;
}

void save_bundle(const std::filesystem::path& path, const Vocabulary& vocab,
                 const Predictor& predictor) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  save_bundle(out, vocab, predictor);
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return load_bundle(in);
}

}  // namespace logmask
