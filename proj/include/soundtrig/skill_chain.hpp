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

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace soundtrig {

enum class Skill { Nav, Pick, Place, OpenDoor, CloseSink };

inline constexpr std::array<Skill, 5> kSkillVocabulary = {Skill::Nav, Skill::Pick, Skill::Place,
                                                          Skill::OpenDoor, Skill::CloseSink};

std::string_view to_string(Skill s);
// Throws PlanInvalid carrying the token when it is not in the vocabulary.
Skill skill_from_string(std::string_view token);

using SkillChain = std::vector<Skill>;

struct BiSonicChain {
  SkillChain first_sound;
  SkillChain second_sound;
  bool operator==(const BiSonicChain&) const = default;
};

using Plan = std::variant<SkillChain, BiSonicChain>;

std::string format_chain(const SkillChain& chain);
nlohmann::json chain_to_json(const SkillChain& chain);
nlohmann::json plan_to_json(const Plan& plan);

}  // namespace soundtrig
