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

#include <string>

namespace soundtrig::prompts {

// Verbatim planner prompts, compiled in from assets/prompts.
const std::string& single_source_system();
const std::string& bi_source_system_template();  // contains the {obj_1} slot
const std::string& user_text();

}  // namespace soundtrig::prompts
