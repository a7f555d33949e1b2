// Copyright 2026 The dialex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace dialex {

// Judgment classes. Enum order is also the argmax tie-break order.
enum class Label : unsigned char { kYes = 0, kInflected = 1, kNo = 2 };

inline constexpr std::size_t kLabelCount = 3;
inline constexpr std::array<Label, kLabelCount> kAllLabels = {Label::kYes, Label::kInflected,
                                                              Label::kNo};

constexpr std::size_t index(Label l) { return static_cast<std::size_t>(l); }

constexpr std::string_view to_string(Label l) {
  switch (l) {
    case Label::kYes: return "yes";
    case Label::kInflected: return "inflected";
    case Label::kNo: return "no";
  }
  return "?";
}

constexpr std::optional<Label> parse_label(std::string_view s) {
  if (s == "yes") return Label::kYes;
  if (s == "inflected") return Label::kInflected;
  if (s == "no") return Label::kNo;
  return std::nullopt;
}

}  // namespace dialex
