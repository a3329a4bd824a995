#include "patchsmith/pipeline.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"

namespace patchsmith {

FrameOptions PipelineConfig::frame_options() const {
  FrameOptions o;
  o.ds_iterations = ds_iterations;
  o.dual_iterations = dual_iterations;
  return o;
}

TessellationOptions PipelineConfig::tessellation_options() const {
  TessellationOptions o;
  o.max_depth = max_depth;
  o.leaf_resolution = leaf_resolution;
  o.mode = mode;
  return o;
}

void PipelineConfig::validate() const {
  if (ds_iterations < 1) throw ParamError("ds_iterations must be at least 1");
  if (dual_iterations < 0 || dual_iterations % 2 != 0) throw ParamError("dual_iterations must be even");
  patchsmith::validate(tessellation_options());
}

void update_config(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ParamError("config must be an object");
  try {
    if (j.contains("ds_iterations")) c.ds_iterations = j.at("ds_iterations").get<int>();
    if (j.contains("dual_iterations")) c.dual_iterations = j.at("dual_iterations").get<int>();
    if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<int>();
    if (j.contains("leaf_resolution")) c.leaf_resolution = j.at("leaf_resolution").get<int>();
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad config: ") + e.what());
  }
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"ds_iterations", c.ds_iterations},
          {"dual_iterations", c.dual_iterations},
          {"max_depth", c.max_depth},
          {"leaf_resolution", c.leaf_resolution},
          {"mode", to_string(c.mode)}};
}

FrameOverride override_from_json(const nlohmann::json& j) {
  FrameOverride o;
  try {
    if (j.contains("scale")) o.scale = j.at("scale").get<double>();
    if (j.contains("rotation")) o.rotation = j.at("rotation").get<double>();
    if (j.contains("offset")) o.offset = vec3_from_json(j.at("offset"));
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad frame parameters: ") + e.what());
  }
  return o;
}

nlohmann::json to_json(const FrameOverride& o) {
  return {{"scale", o.scale}, {"rotation", o.rotation}, {"offset", to_json(o.offset)}};
}

PolygonFrame build_frame(const HalfEdgeMesh& mesh, const ElementRef& owner, const PipelineConfig& config,
                         double bbox_diagonal) {
  auto f = assign_frame(mesh, owner, config.frame_options(), bbox_diagonal);
  if (auto it = config.frame_overrides.find(owner); it != config.frame_overrides.end())
    f = set_frame_params(f, it->second.scale, it->second.rotation, it->second.offset);
  return f;
}

FrameSet build_frames(const HalfEdgeMesh& mesh, const PipelineConfig& config) {
  auto frames = assign_frames(mesh, config.frame_options());
  for (const auto& [owner, o] : config.frame_overrides) {
    auto* f = frames.find(owner);
    if (!f) throw ParamError(std::string("no ") + to_string(owner.kind) + " frame " + std::to_string(owner.id));
    *f = set_frame_params(*f, o.scale, o.rotation, o.offset);
  }
  if (!config.frames.is_null()) apply_frames_json(frames, config.frames);
  return frames;
}

PipelineResult run_pipeline(const HalfEdgeMesh& mesh, const PipelineConfig& config) {
  config.validate();
  PipelineResult r;
  r.frames = build_frames(mesh, config);
  r.patches = build_patches(mesh, r.frames);
  r.tessellation = tessellate(r.patches, config.tessellation_options());
  AnalysisOptions a;
  a.depth = config.max_depth;
  a.mode = config.mode;
  r.defects = analyze(r.patches, r.tessellation.trees, a).summary;
  return r;
}

nlohmann::json stats_json(const PipelineResult& r) {
  auto j = to_json(r.tessellation.stats);
  j["defect_summary"] = to_json(r.defects);
  return j;
}

}  // namespace patchsmith
