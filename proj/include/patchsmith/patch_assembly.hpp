#pragma once

#include "patchsmith/bezier.hpp"
#include "patchsmith/polygon_frame.hpp"

#include "json.hpp"

namespace patchsmith {

/// An interior boundary and the two patch slots that share it.
struct SharedBoundary {
  std::uint32_t patch_a = kInvalidId;
  std::uint8_t boundary_a = 0;
  std::uint32_t patch_b = kInvalidId;
  std::uint8_t boundary_b = 0;
};

/// Patches meeting at one frame centroid, in the frame's corner order.
struct CornerFan {
  ElementRef frame;
  std::vector<std::pair<std::uint32_t, std::uint8_t>> members;  // (patch, corner)
  bool extraordinary() const { return members.size() != 4; }
};

struct PatchSet {
  std::vector<BezierPatch> patches;
  std::vector<std::uint32_t> index_of;  // by input half-edge id
  std::vector<SharedBoundary> boundaries;
  std::vector<CornerFan> fans;
  double bbox_diagonal = 1.0;

  std::size_t size() const { return patches.size(); }
  /// Patch built for input half-edge h; throws AssemblyError if absent.
  const BezierPatch& by_id(HalfEdgeId h) const;
};

/// One patch per face corner of `mesh`, in alive half-edge order (the quad
/// order of vertex_insertion_remesh). Throws AssemblyError when a frame or
/// a sector corner is missing.
PatchSet build_patches(const HalfEdgeMesh& mesh, const FrameSet& frames);

/// Single patch for face corner h with neighbour links left unset.
BezierPatch build_patch(const HalfEdgeMesh& mesh, const FrameSet& frames, HalfEdgeId h);

enum class PatchClass { Regular, Extraordinary };
PatchClass classify_patch(const BezierPatch& patch);
const char* to_string(PatchClass c);

struct BoundaryResidual {
  std::uint32_t patch_a = 0;
  std::uint8_t boundary_a = 0;
  std::uint32_t patch_b = 0;
  std::uint8_t boundary_b = 0;
  double gap = 0.0;  // max |P^0_i0 - P^1_i0|
};

struct CornerResidual {
  std::uint32_t patch = 0;
  std::uint8_t corner = 0;
  int valence = 4;
  /// max |P^0_i1 + P^1_i1 - 2 P_i0| over the two boundary points next to
  /// the corner, and over the corner point itself when valence is 4.
  double midpoint = 0.0;
  /// Distance of the corner's first-order control points from the frame
  /// plane; zero for valence 4.
  double coplanarity = 0.0;
};

struct BoundaryConditionReport {
  std::vector<BoundaryResidual> boundaries;
  std::vector<CornerResidual> corners;
  double max_gap = 0.0;
  double max_midpoint = 0.0;
  double max_coplanarity = 0.0;
  double bbox_diagonal = 1.0;

  /// Largest residual divided by the bounding box diagonal.
  double max_relative() const {
    return std::max({max_gap, max_midpoint, max_coplanarity}) / bbox_diagonal;
  }
};

BoundaryConditionReport check_boundary_conditions(const PatchSet& patches);

/// `{patches:[{id, P:[[x,y,z] x16], corners:[...], neighbors:[...]}]}`, P in
/// row-major order P00, P01, ..., P33.
nlohmann::json to_json(const BezierPatch& patch);
nlohmann::json to_json(const PatchSet& patches);

}  // namespace patchsmith
