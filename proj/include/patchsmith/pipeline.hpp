#pragma once

#include "patchsmith/continuity.hpp"
#include "patchsmith/polygon_frame.hpp"
#include "patchsmith/tessellation.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>

namespace patchsmith {

/// Designer controls for one frame, applied to the assigned frame as
/// set_frame_params(frame, scale, rotation, offset).
struct FrameOverride {
  double scale = 1.0;
  double rotation = 0.0;
  Vec3 offset = Vec3::Zero();
};

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  int ds_iterations = 1;
  int dual_iterations = 0;
  int max_depth = 4;
  int leaf_resolution = 5;
  SubdivisionMode mode = SubdivisionMode::Modified;
  std::map<ElementRef, FrameOverride> frame_overrides;
  /// Frames JSON applied after the overrides (`--frames`); null for none.
  nlohmann::json frames = nullptr;

  FrameOptions frame_options() const;
  TessellationOptions tessellation_options() const;
  /// Throws ParamError for odd dual_iterations, bad resolution or depth.
  void validate() const;
};

/// Reads the tunable fields present in `j` (ds_iterations, dual_iterations,
/// max_depth, leaf_resolution, mode); other fields are left as they are.
void update_config(PipelineConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);

FrameOverride override_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FrameOverride& o);

/// Assigned frames with the overrides and the frames JSON applied. Throws
/// ParamError when an override names a missing owner.
FrameSet build_frames(const HalfEdgeMesh& mesh, const PipelineConfig& config);
/// The same for a single owner.
PolygonFrame build_frame(const HalfEdgeMesh& mesh, const ElementRef& owner, const PipelineConfig& config,
                         double bbox_diagonal);

struct PipelineResult {
  FrameSet frames;
  PatchSet patches;
  Tessellation tessellation;
  DefectSummary defects;
};

/// frames -> patches -> tessellation -> defect summary.
PipelineResult run_pipeline(const HalfEdgeMesh& mesh, const PipelineConfig& config);

/// `{patches, leaves, max_depth_reached, triangles, ..., defect_summary}`
nlohmann::json stats_json(const PipelineResult& result);

}  // namespace patchsmith
