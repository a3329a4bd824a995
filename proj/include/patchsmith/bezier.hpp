#pragma once

#include "patchsmith/half_edge_mesh.hpp"

#include <array>

namespace patchsmith {

/// Bicubic control net, P[i][j] with i the u index and j the v index.
using ControlNet = std::array<std::array<Vec3, 4>, 4>;

/// Corner c of a patch sits at parameter (0,0), (1,0), (1,1), (0,1) for
/// c = 0..3, i.e. at P00, P30, P33, P03.
struct CornerMeta {
  int valence = 4;
  bool extraordinary = false;
  ElementRef frame;
  std::uint32_t frame_corner = kInvalidId;
  Vec3 frame_normal = Vec3::Zero();
};

/// Boundary b runs from corner b to corner b+1. Neighbouring patches always
/// traverse a shared boundary in opposite directions.
struct NeighborLink {
  std::uint32_t patch = kInvalidId;
  std::uint8_t boundary = 0;
  bool reversed = true;
};

struct BezierPatch {
  /// Input half-edge (face corner) the patch was built for.
  HalfEdgeId id = kInvalidId;
  ControlNet P{};
  std::array<CornerMeta, 4> corners{};
  std::array<NeighborLink, 4> neighbors{};

  bool extraordinary() const {
    for (const auto& c : corners)
      if (c.extraordinary) return true;
    return false;
  }
};

struct SurfacePoint {
  Vec3 point = Vec3::Zero();
  Vec3 du = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 duu = Vec3::Zero();
  Vec3 dvv = Vec3::Zero();
  Vec3 duv = Vec3::Zero();
};

/// Bernstein evaluation with first and second partial derivatives.
SurfacePoint evaluate_bezier(const ControlNet& P, double u, double v);
inline SurfacePoint evaluate_bezier(const BezierPatch& patch, double u, double v) {
  return evaluate_bezier(patch.P, u, v);
}

/// Parameter of corner c.
inline std::array<double, 2> corner_uv(int c) {
  static constexpr double uv[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return {uv[c][0], uv[c][1]};
}

/// Control point index of corner c.
inline std::array<int, 2> corner_index(int c) {
  static constexpr int ij[4][2] = {{0, 0}, {3, 0}, {3, 3}, {0, 3}};
  return {ij[c][0], ij[c][1]};
}

/// Control point (i,j) of boundary b at position t = 0..3 from corner b,
/// and at depth d = 0..3 into the patch (d = 0 is the boundary row).
std::array<int, 2> boundary_index(int b, int t, int d);

/// Parameter of boundary b at position s in [0,1] from corner b.
std::array<double, 2> boundary_uv(int b, double s);

}  // namespace patchsmith
