#pragma once

#include "patchsmith/geometry.hpp"

#include <cstdint>
#include <compare>
#include <string>
#include <vector>

namespace patchsmith {

using VertexId = std::uint32_t;
using HalfEdgeId = std::uint32_t;
using EdgeId = std::uint32_t;
using FaceId = std::uint32_t;

inline constexpr std::uint32_t kInvalidId = 0xffffffffu;

/// A corner of a face, addressed by (face, vertex). When the vertex occurs
/// more than once on the face loop, `occurrence` picks which one (0-based,
/// counted from the face's anchor half-edge).
struct CornerRef {
  FaceId face = kInvalidId;
  VertexId vertex = kInvalidId;
  std::uint32_t occurrence = 0;

  friend bool operator==(const CornerRef&, const CornerRef&) = default;
};

/// Reference to an element of a mesh, used for provenance and frame owners.
enum class ElementKind : std::uint8_t { Face, Vertex, Edge };

struct ElementRef {
  ElementKind kind = ElementKind::Face;
  std::uint32_t id = kInvalidId;

  friend bool operator==(const ElementRef&, const ElementRef&) = default;
  friend auto operator<=>(const ElementRef&, const ElementRef&) = default;
};

const char* to_string(ElementKind kind);

struct MeshCounts {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  std::size_t components = 0;

  long euler_characteristic() const {
    return static_cast<long>(vertices) - static_cast<long>(edges) + static_cast<long>(faces);
  }
  /// Total genus summed over components; closed orientable surfaces only.
  long genus() const { return (2 * static_cast<long>(components) - euler_characteristic()) / 2; }
};

/// Closed, orientable two-manifold polygon mesh.
///
/// Half-edges come in twin pairs (2e, 2e+1) so the twin of h is h ^ 1 and
/// the edge of h is h / 2. Element ids are stable: removed elements are
/// tombstoned rather than compacted, which keeps ids valid across edits.
class HalfEdgeMesh {
 public:
  struct Vertex {
    Vec3 position = Vec3::Zero();
    HalfEdgeId halfedge = kInvalidId;  // one outgoing half-edge
    bool alive = true;
  };
  struct HalfEdge {
    VertexId origin = kInvalidId;
    HalfEdgeId next = kInvalidId;
    HalfEdgeId prev = kInvalidId;
    FaceId face = kInvalidId;
  };
  struct Face {
    HalfEdgeId halfedge = kInvalidId;  // anchor of the face loop
    bool alive = true;
  };

  HalfEdgeMesh() = default;

  /// Builds a mesh from polygon loops. Each undirected vertex pair must be
  /// used by matching opposite-direction sides; repeated pairs (multi-edges)
  /// are paired so that every vertex link is a single cycle.
  /// Throws ManifoldError, OrientationError or BoundaryError.
  static HalfEdgeMesh from_polygons(std::vector<Vec3> positions,
                                    const std::vector<std::vector<VertexId>>& faces);

  /// Builds a mesh from fully linked half-edges (origin, next, face set;
  /// prev is derived). Used by the refinement schemes, which know the
  /// connectivity directly. Face anchors default to the lowest half-edge id
  /// of each face. Validates the result.
  static HalfEdgeMesh from_halfedges(std::vector<Vec3> positions, std::vector<HalfEdge> halfedges,
                                     std::size_t face_count, const std::vector<HalfEdgeId>& face_anchors = {});

  // --- element access -----------------------------------------------------
  std::size_t vertex_capacity() const { return vertices_.size(); }
  std::size_t halfedge_capacity() const { return halfedges_.size(); }
  std::size_t edge_capacity() const { return halfedges_.size() / 2; }
  std::size_t face_capacity() const { return faces_.size(); }

  bool vertex_alive(VertexId v) const { return v < vertices_.size() && vertices_[v].alive; }
  bool face_alive(FaceId f) const { return f < faces_.size() && faces_[f].alive; }
  bool halfedge_alive(HalfEdgeId h) const {
    return h < halfedges_.size() && halfedges_[h].face != kInvalidId;
  }
  bool edge_alive(EdgeId e) const { return halfedge_alive(2 * e); }

  const Vec3& position(VertexId v) const { return vertices_[v].position; }
  void set_position(VertexId v, const Vec3& p) { vertices_[v].position = p; }

  static HalfEdgeId twin(HalfEdgeId h) { return h ^ 1u; }
  static EdgeId edge(HalfEdgeId h) { return h / 2; }
  HalfEdgeId next(HalfEdgeId h) const { return halfedges_[h].next; }
  HalfEdgeId prev(HalfEdgeId h) const { return halfedges_[h].prev; }
  VertexId origin(HalfEdgeId h) const { return halfedges_[h].origin; }
  VertexId target(HalfEdgeId h) const { return halfedges_[twin(h)].origin; }
  FaceId face(HalfEdgeId h) const { return halfedges_[h].face; }
  HalfEdgeId face_halfedge(FaceId f) const { return faces_[f].halfedge; }
  HalfEdgeId vertex_halfedge(VertexId v) const { return vertices_[v].halfedge; }

  /// Next outgoing half-edge counter-clockwise around origin(h).
  HalfEdgeId rotate_ccw(HalfEdgeId h) const { return twin(prev(h)); }

  std::vector<VertexId> alive_vertices() const;
  std::vector<HalfEdgeId> alive_halfedges() const;
  std::vector<EdgeId> alive_edges() const;
  std::vector<FaceId> alive_faces() const;

  /// Half-edges of face f starting at its anchor.
  std::vector<HalfEdgeId> face_loop(FaceId f) const;
  std::vector<VertexId> face_vertices(FaceId f) const;
  /// Outgoing half-edges of v in counter-clockwise order.
  std::vector<HalfEdgeId> vertex_fan(VertexId v) const;
  std::size_t face_degree(FaceId f) const;
  std::size_t valence(VertexId v) const;
  Vec3 face_centroid(FaceId f) const;
  Vec3 edge_midpoint(EdgeId e) const;
  BoundingBox bounds() const;

  MeshCounts counts() const;

  /// Resolves a corner to the half-edge leaving the corner's vertex inside
  /// the corner's face. Throws CornerError.
  HalfEdgeId corner_halfedge(const CornerRef& corner) const;
  CornerRef corner_of(HalfEdgeId h) const;

  // --- Euler operators ------------------------------------------------------
  /// Inserts an edge between two corners. Corners on the same face split it;
  /// corners on different faces merge the faces (adds a handle, or joins two
  /// components). Returns the new edge id.
  EdgeId insert_edge(const CornerRef& c1, const CornerRef& c2);
  /// Removes an edge; the inverse of insert_edge. Throws TopologyError when
  /// the result would not be a valid closed mesh.
  void delete_edge(EdgeId e);

  /// Structural check. Returns an empty string when valid, otherwise a
  /// description of the first violation found.
  std::string validation_error() const;
  /// Throws ManifoldError / OrientationError on violation.
  void validate() const;

 private:
  HalfEdgeId new_edge_pair(VertexId from, VertexId to);
  void link(HalfEdgeId a, HalfEdgeId b) {
    halfedges_[a].next = b;
    halfedges_[b].prev = a;
  }
  void assign_loop(HalfEdgeId start, FaceId f);
  void debug_validate() const;

  std::vector<Vertex> vertices_;
  std::vector<HalfEdge> halfedges_;
  std::vector<Face> faces_;
};

}  // namespace patchsmith
