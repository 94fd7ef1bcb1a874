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
#include <string>
#include <string_view>

namespace logmask {

/// Integer id of a parsed log template; ids start at 1, 0 means "no template".
using TemplateId = std::int32_t;
/// Dense integer id inside a trained vocabulary (reserved ids included).
using EventId = std::int32_t;

inline constexpr TemplateId kNoTemplate = 0;

enum class Label : std::uint8_t { Normal, Anomalous };

inline std::string_view to_string(Label l) {
  return l == Label::Normal ? "normal" : "anomalous";
}

Label parse_label(std::string_view text);

}  // namespace logmask
