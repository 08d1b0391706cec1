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


#include "soundtrig/skill_chain.hpp"

#include "soundtrig/errors.hpp"

namespace soundtrig {

std::string_view to_string(Skill s) {
  switch (s) {
    case Skill::Nav: return "nav";
    case Skill::Pick: return "pick";
    case Skill::Place: return "place";
    case Skill::OpenDoor: return "open_door";
    case Skill::CloseSink: return "close_sink";
  }
  return "?";
}

Skill skill_from_string(std::string_view token) {
  for (Skill s : kSkillVocabulary) {
    if (to_string(s) == token) return s;
  }
  throw PlanInvalid(std::string(token));
}

std::string format_chain(const SkillChain& chain) {
  std::string out = "[";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += ", ";
    out += to_string(chain[i]);
  }
  return out + "]";
}

nlohmann::json chain_to_json(const SkillChain& chain) {
  auto j = nlohmann::json::array();
  for (Skill s : chain) j.push_back(std::string(to_string(s)));
  return j;
}

nlohmann::json plan_to_json(const Plan& plan) {
  if (const auto* c = std::get_if<SkillChain>(&plan)) return chain_to_json(*c);
  const auto& b = std::get<BiSonicChain>(plan);
  return {{"first_sound", chain_to_json(b.first_sound)},
          {"second_sound", chain_to_json(b.second_sound)}};
}

}  // namespace soundtrig
