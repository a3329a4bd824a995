#include "patchsmith/frame_json.hpp"

#include "patchsmith/errors.hpp"

namespace patchsmith {

nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ParamError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json to_json(const ElementRef& ref) { return {{"kind", to_string(ref.kind)}, {"id", ref.id}}; }

ElementRef element_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    ElementRef ref;
    if (kind == "face") ref.kind = ElementKind::Face;
    else if (kind == "vertex") ref.kind = ElementKind::Vertex;
    else if (kind == "edge") ref.kind = ElementKind::Edge;
    else throw ParamError("unknown element kind '" + kind + "'");
    ref.id = j.at("id").get<std::uint32_t>();
    return ref;
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad element reference: ") + e.what());
  }
}

nlohmann::json to_json(const PolygonFrame& frame) {
  nlohmann::json corners = nlohmann::json::array();
  for (const auto& c : frame.corners) corners.push_back(to_json(c));
  return {{"owner", to_json(frame.owner)}, {"corners", corners},        {"keys", frame.keys},
          {"scale", frame.scale},          {"rotation", frame.rotation}, {"offset", to_json(frame.offset)}};
}

PolygonFrame frame_from_json(const nlohmann::json& j) {
  try {
    PolygonFrame f;
    f.owner = element_from_json(j.at("owner"));
    for (const auto& c : j.at("corners")) f.corners.push_back(vec3_from_json(c));
    if (j.contains("keys")) f.keys = j.at("keys").get<std::vector<HalfEdgeId>>();
    f.scale = j.value("scale", 1.0);
    f.rotation = j.value("rotation", 0.0);
    if (j.contains("offset")) f.offset = vec3_from_json(j.at("offset"));
    if (f.corners.size() < 3) throw ParamError("frame needs at least 3 corners");
    f.update_centroid();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad frame: ") + e.what());
  }
}

nlohmann::json to_json(const FrameSet& frames) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : frames.frames) list.push_back(to_json(f));
  return {{"frames", list}};
}

void apply_frames_json(FrameSet& frames, const nlohmann::json& j) {
  if (!j.contains("frames") || !j["frames"].is_array()) throw ParamError("frames JSON needs a 'frames' array");
  for (const auto& item : j["frames"]) {
    auto loaded = frame_from_json(item);
    auto* target = frames.find(loaded.owner);
    if (!target)
      throw ParamError(std::string("no ") + to_string(loaded.owner.kind) + " " + std::to_string(loaded.owner.id));
    if (target->size() != loaded.size())
      throw ParamError(std::string(to_string(loaded.owner.kind)) + " frame " + std::to_string(loaded.owner.id) +
                       " expects " + std::to_string(target->size()) + " corners");
    if (!loaded.keys.empty() && loaded.keys != target->keys)
      throw ParamError("frame keys do not match the mesh");
    target->corners = loaded.corners;
    target->scale = loaded.scale;
    target->rotation = loaded.rotation;
    target->offset = loaded.offset;
    target->update_centroid();
    target->normal = fit_plane_normal(target->corners, target->centroid);
    if (target->size() != 4 && frame_quality(*target).planarity > 1e-12) *target = planarize(*target);
  }
}

}  // namespace patchsmith
