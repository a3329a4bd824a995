#pragma once

#include "patchsmith/half_edge_mesh.hpp"

namespace patchsmith {

/// Catmull-Clark vertex insertion without smoothing. Quad i of the output
/// belongs to the original face corner `quad_corner[i]` (a half-edge of the
/// input) and has corners (face point, edge point of prev(h), vertex point,
/// edge point of h) in that order.
struct VertexInsertionResult {
  HalfEdgeMesh mesh;
  std::vector<HalfEdgeId> quad_corner;
  std::vector<ElementRef> vertex_source;
};

VertexInsertionResult vertex_insertion_remesh(const HalfEdgeMesh& mesh);

/// One Doo-Sabin step. New vertex i sits in the original face corner
/// `vertex_corner[i]`. Faces are ordered face-faces, vertex-faces, then
/// edge-faces; `face_corners[f]` lists the original corner of every vertex
/// of output face f in loop order.
struct DooSabinResult {
  HalfEdgeMesh mesh;
  std::vector<HalfEdgeId> vertex_corner;
  std::vector<ElementRef> face_source;
  std::vector<std::vector<HalfEdgeId>> face_corners;
};

/// Doo-Sabin point of a face corner: mean of the vertex, the midpoints of
/// its two edges in the face, and the face centroid.
Vec3 doo_sabin_point(const HalfEdgeMesh& mesh, HalfEdgeId corner);

DooSabinResult doo_sabin_refine(const HalfEdgeMesh& mesh);

/// Dual vertex i is the centroid of face `vertex_face[i]`; dual face j is
/// the fan of vertex `face_vertex[j]`. Throws TopologyError when an edge
/// has the same face on both sides (the dual would contain a loop).
struct DualResult {
  HalfEdgeMesh mesh;
  std::vector<FaceId> vertex_face;
  std::vector<VertexId> face_vertex;
};

DualResult dual_mesh(const HalfEdgeMesh& mesh);

}  // namespace patchsmith
