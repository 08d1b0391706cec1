// Copyright 2026 The soundtrig Authors
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

#include <optional>
#include <string>

#include "json.hpp"
#include "soundtrig/acoustics.hpp"
#include "soundtrig/episodes.hpp"
#include "soundtrig/perception.hpp"
#include "soundtrig/skill_chain.hpp"

namespace soundtrig {

// Exactly what the Navigate skill observes at the first step; nothing more.
struct PlannerObservation {
  BinauralFrame audio;
  RangeScan scan;
  std::optional<Category> known_first_source;  // BiSonic hint

  bool bisonic() const { return known_first_source.has_value(); }
};

enum class Backend { Oracle, RuleBased, Remote };
std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

struct PlannerVerdict {
  Plan chain;
  Backend backend = Backend::Oracle;
  std::optional<std::string> raw_response;
  std::optional<bool> planning_correct;
  double confidence = 1.0;
  bool fallback = false;  // rule-based chain chosen without a usable signal
};

PlannerVerdict plan_oracle(const Episode& ep);

PlannerVerdict plan_rule_based(const PlannerObservation& obs, const CategoryClassifier& classifier);

// Raw value of the "plan" key. Lists must be non-empty and vocabulary-pure;
// maps must have exactly first_sound and second_sound. Throws PlanInvalid.
Plan validate_chain(const nlohmann::json& raw);
Plan validate_chain(const nlohmann::json& raw, bool expect_bisonic);

// Removes a surrounding ``` / ```json fence if present.
std::string strip_markdown_fences(const std::string& text);

// Parses a model reply into a validated plan. Throws PlanParse when the text is
// not a JSON object and PlanInvalid for structure or vocabulary violations.
Plan parse_plan_response(const std::string& text, bool expect_bisonic);

// Name used for a category in the bi-source prompt's {obj_1} slot.
std::string bisonic_prompt_name(Category c);
std::string system_prompt_for(const PlannerObservation& obs);

}  // namespace soundtrig
