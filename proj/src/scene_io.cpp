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

#include "soundtrig/scene_io.hpp"

#include <fstream>

#include "soundtrig/errors.hpp"

namespace soundtrig {

using nlohmann::json;

json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json rect_to_json(const Rect& r) { return json{{"min", vec_to_json(r.min)}, {"max", vec_to_json(r.max)}}; }

Rect rect_from_json(const json& j) { return {vec_from_json(j.at("min")), vec_from_json(j.at("max"))}; }

json sink_to_json(const SinkSpec& s) {
  return json{{"id", s.id},
              {"footprint", rect_to_json(s.footprint)},
              {"orientation", s.orientation},
              {"handle_pivot", vec_to_json(s.handle_pivot)},
              {"handle_height", s.handle_height}};
}

SinkSpec sink_from_json(const json& j) {
  SinkSpec s;
  s.id = j.at("id").get<std::string>();
  s.footprint = rect_from_json(j.at("footprint"));
  s.orientation = j.at("orientation").get<double>();
  s.handle_pivot = vec_from_json(j.at("handle_pivot"));
  s.handle_height = j.at("handle_height").get<double>();
  return s;
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["schema_version"] = kSceneSchemaVersion;
  doc["id"] = scene.id;
  doc["bounds"] = rect_to_json(scene.bounds);
  doc["cell_size"] = scene.cell_size;
  json materials = json::object();
  for (const auto& [name, m] : scene.materials) {
    materials[name] = {{"absorption", m.absorption}, {"transmission", m.transmission}};
  }
  doc["materials"] = materials;
  doc["walls"] = json::array();
  for (const auto& w : scene.walls) {
    doc["walls"].push_back({{"a", vec_to_json(w.a)}, {"b", vec_to_json(w.b)}, {"material", w.material}});
  }
  doc["receptacles"] = json::array();
  for (const auto& r : scene.receptacles) {
    doc["receptacles"].push_back({{"id", r.id}, {"top", rect_to_json(r.top)}, {"height", r.height}});
  }
  doc["doors"] = json::array();
  for (const auto& d : scene.doors) {
    doc["doors"].push_back({{"id", d.id},
                            {"hinge", vec_to_json(d.hinge)},
                            {"leaf_end", vec_to_json(d.leaf_end)},
                            {"handle", vec_to_json(d.handle)},
                            {"swing_side", d.swing_side},
                            {"material", d.material},
                            {"handle_height", d.handle_height}});
  }
  doc["sinks"] = json::array();
  for (const auto& s : scene.sinks) doc["sinks"].push_back(sink_to_json(s));
  return doc;
}

Scene scene_from_json(const json& doc) {
  Scene scene;
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kSceneSchemaVersion) {
      throw FormatError("unsupported scene schema_version " + std::to_string(version));
    }
    scene.id = doc.at("id").get<std::string>();
    scene.bounds = rect_from_json(doc.at("bounds"));
    scene.cell_size = doc.at("cell_size").get<double>();
    for (const auto& [name, m] : doc.at("materials").items()) {
      MaterialProperties p;
      p.absorption = m.at("absorption").get<std::array<double, kBandCount>>();
      p.transmission = m.at("transmission").get<std::array<double, kBandCount>>();
      scene.materials[name] = p;
    }
    for (const auto& w : doc.at("walls")) {
      scene.walls.push_back({vec_from_json(w.at("a")), vec_from_json(w.at("b")),
                             w.at("material").get<std::string>()});
    }
    for (const auto& r : doc.at("receptacles")) {
      scene.receptacles.push_back(
          {r.at("id").get<std::string>(), rect_from_json(r.at("top")), r.at("height").get<double>()});
    }
    for (const auto& d : doc.at("doors")) {
      DoorSpec door;
      door.id = d.at("id").get<std::string>();
      door.hinge = vec_from_json(d.at("hinge"));
      door.leaf_end = vec_from_json(d.at("leaf_end"));
      door.handle = vec_from_json(d.at("handle"));
      door.swing_side = d.at("swing_side").get<int>();
      door.material = d.at("material").get<std::string>();
      door.handle_height = d.at("handle_height").get<double>();
      scene.doors.push_back(door);
    }
    for (const auto& s : doc.at("sinks")) scene.sinks.push_back(sink_from_json(s));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scene document: ") + e.what());
  }
  scene.validate();
  return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << scene_to_json(scene).dump(2) << '\n';
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

std::uint64_t Scene::hash() const {
  const std::string text = scene_to_json(*this).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

json object_to_json(const ObjectInstance& o) {
  json j{{"id", o.id},
         {"category", std::string(to_string(o.category))},
         {"kind", o.kind == ObjectKind::Rigid ? "rigid" : "articulated"},
         {"position", vec_to_json(o.position)},
         {"support_height", o.support_height},
         {"orientation", o.orientation},
         {"emitting", o.emitting}};
  if (o.joint_angle) j["joint_angle"] = *o.joint_angle;
  if (o.joint_limits) j["joint_limits"] = *o.joint_limits;
  if (o.sound_clip_id) j["sound_clip_id"] = *o.sound_clip_id;
  if (!o.bound_to.empty()) j["bound_to"] = o.bound_to;
  return j;
}

ObjectInstance object_from_json(const json& j) {
  ObjectInstance o;
  o.id = j.at("id").get<std::string>();
  o.category = category_from_string(j.at("category").get<std::string>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "rigid" && kind != "articulated") throw FormatError("bad object kind: " + kind);
  o.kind = kind == "rigid" ? ObjectKind::Rigid : ObjectKind::Articulated;
  o.position = vec_from_json(j.at("position"));
  o.support_height = j.at("support_height").get<double>();
  o.orientation = j.at("orientation").get<double>();
  o.emitting = j.at("emitting").get<bool>();
  if (j.contains("joint_angle")) o.joint_angle = j["joint_angle"].get<double>();
  if (j.contains("joint_limits")) o.joint_limits = j["joint_limits"].get<std::array<double, 2>>();
  if (j.contains("sound_clip_id")) o.sound_clip_id = j["sound_clip_id"].get<std::string>();
  if (j.contains("bound_to")) o.bound_to = j["bound_to"].get<std::string>();
  o.validate();
  return o;
}

}  // namespace soundtrig
