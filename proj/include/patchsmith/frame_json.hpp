#pragma once

#include "patchsmith/polygon_frame.hpp"

#include "json.hpp"

namespace patchsmith {

/// `{owner:{kind,id}, corners:[[x,y,z],...], keys:[...], scale, rotation, offset}`
nlohmann::json to_json(const PolygonFrame& frame);
PolygonFrame frame_from_json(const nlohmann::json& j);

/// `{frames:[...]}`
nlohmann::json to_json(const FrameSet& frames);

/// Replaces the corners (and recorded parameters) of every frame listed in
/// `j`. Throws ParamError on unknown owners or side-count mismatches.
void apply_frames_json(FrameSet& frames, const nlohmann::json& j);

ElementRef element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ElementRef& ref);

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

}  // namespace patchsmith
