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

#include <filesystem>

#include "json.hpp"
#include "soundtrig/world.hpp"

namespace soundtrig {

/// Current scene document version. Documents with another version are rejected.
inline constexpr int kSceneSchemaVersion = 1;

nlohmann::json scene_to_json(const Scene& scene);
/// Parses and validates; throws FormatError or InvalidScene.
Scene scene_from_json(const nlohmann::json& doc);

void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

nlohmann::json vec_to_json(Vec2 v);
Vec2 vec_from_json(const nlohmann::json& j);
nlohmann::json rect_to_json(const Rect& r);
Rect rect_from_json(const nlohmann::json& j);

nlohmann::json object_to_json(const ObjectInstance& o);
ObjectInstance object_from_json(const nlohmann::json& j);

nlohmann::json sink_to_json(const SinkSpec& s);
SinkSpec sink_from_json(const nlohmann::json& j);

}  // namespace soundtrig
