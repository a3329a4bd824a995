#pragma once

#include "patchsmith/tessellation.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace patchsmith {

/// Cross-boundary defects between two patches sharing a boundary. All three
/// metrics are ratios and so invariant under rigid motion and scale.
///   c1: max |d0 + d1| / max(|d0|, |d1|) of the inward cross derivatives
///   g1: max angle between the two tangent planes (radians)
///   c2: max |s0 - s1| of the second cross derivatives, divided by the
///       largest |s| seen along the boundary
struct BoundaryDefect {
  std::uint32_t patch_a = 0;
  std::uint8_t boundary_a = 0;
  std::uint32_t patch_b = 0;
  std::uint8_t boundary_b = 0;
  int samples = 0;
  bool ev_start = false;  // corner boundary_a is extraordinary
  bool ev_end = false;    // corner boundary_a + 1 is extraordinary
  double c1 = 0.0;
  double g1 = 0.0;
  double c2 = 0.0;

  bool ev_emanating() const { return ev_start || ev_end; }
};

/// Samples boundary `ba` of `a` at s = i / intervals, i = 0..intervals, and
/// the matching point of boundary `bb` of `b` at 1 - s. Endpoints flagged
/// in `skip_start` / `skip_end` are left out. Throws AnalysisError when the
/// two boundaries do not coincide point for point.
BoundaryDefect boundary_defects(const PatchTree& a, int ba, const PatchTree& b, int bb, int intervals,
                                bool skip_start = false, bool skip_end = false);
BoundaryDefect boundary_defects(const BezierPatch& a, int ba, const BezierPatch& b, int bb, int intervals);

/// One member of the ring around a corner: the corner point, the interior
/// (yellow) point diagonal to it, the boundary (blue) point shared with the
/// next member, and the surface normal at the corner.
struct RingSample {
  Vec3 corner = Vec3::Zero();
  Vec3 yellow = Vec3::Zero();
  Vec3 blue = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Ring sample of corner c of a net. `blue_leaves_corner` picks the blue
/// point on boundary c (true) or on boundary c - 1 (false).
RingSample ring_sample(const ControlNet& net, int c, bool blue_leaves_corner);

struct CornerDefect {
  ElementRef frame;
  int valence = 0;
  /// Max pairwise angle between member normals (radians).
  double normal_spread = 0.0;
  /// Max distance of corner, yellow and blue points from their
  /// least-squares plane, over the ring radius.
  double planarity = 0.0;
  /// max_k |B_k - (Y_k + Y_k+1) / 2| over the ring radius.
  double unbroken_line = 0.0;
  /// Mean |Y_k - corner|.
  double radius = 0.0;
};

CornerDefect ring_defects(const std::vector<RingSample>& ring);

/// Ring of a corner fan, read from the corner leaves of the trees.
std::vector<RingSample> corner_ring(const PatchSet& patches, const std::vector<PatchTree>& trees,
                                    const CornerFan& fan);

struct AnalysisOptions {
  int depth = 0;
  SubdivisionMode mode = SubdivisionMode::Modified;
  /// Boundary sampling: s = i / intervals.
  int intervals = 32;
};

struct DefectSummary {
  double max_c1 = 0.0;
  double max_g1 = 0.0;
  double max_c2 = 0.0;
  double max_c1_ev = 0.0;  // over extraordinary-vertex emanating boundaries
  double max_g1_ev = 0.0;
  double max_normal_spread_ev = 0.0;
  double max_unbroken_line_ev = 0.0;
  double max_planarity = 0.0;
};

struct DefectReport {
  AnalysisOptions options;
  std::vector<BoundaryDefect> boundaries;
  std::vector<CornerDefect> corners;
  DefectSummary summary;
};

/// Defects of the hierarchy obtained by subdividing every extraordinary
/// patch to `options.depth` with the chosen table. Extraordinary endpoints
/// are excluded from boundary sampling.
DefectReport analyze(const PatchSet& patches, const AnalysisOptions& options);
/// Same, reusing trees built elsewhere.
DefectReport analyze(const PatchSet& patches, const std::vector<PatchTree>& trees, const AnalysisOptions& options);

struct ModeRow {
  int depth = 0;
  SubdivisionMode mode = SubdivisionMode::Modified;
  DefectSummary summary;
};

/// Standard and modified analyses at each depth, standard first.
std::vector<ModeRow> compare_modes(const PatchSet& patches, const std::vector<int>& depths, int intervals = 32);

/// Max C2 defect across the two internal boundaries (u = 1/2, v = 1/2) of a
/// subdivision result, children in quadrant order 00, 01, 10, 11.
double child_c2_defect(const std::array<ControlNet, 4>& children, int intervals = 32);

std::string modes_csv(const std::vector<ModeRow>& rows);
/// metric: c1, g1, c2 (per boundary) or ring (per corner).
std::string defects_csv(const DefectReport& report, const std::string& metric);
nlohmann::json to_json(const DefectSummary& summary);
nlohmann::json to_json(const DefectReport& report);

}  // namespace patchsmith
