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

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "logmask/predictor.hpp"
#include "logmask/windowing.hpp"

namespace logmask {

/// A trained predictor together with the vocabulary it was trained on.
struct ModelBundle {
  Vocabulary vocab;
  std::unique_ptr<Predictor> predictor;
};

/// Thrown when a bundle's vocabulary and predictor disagree.
class ModelMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_bundle(std::ostream& out, const Vocabulary& vocab, const Predictor& predictor);
ModelBundle load_bundle(std::istream& in);
void save_bundle(const std::filesystem::path& path, const Vocabulary& vocab,
                 const Predictor& predictor);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace logmask
