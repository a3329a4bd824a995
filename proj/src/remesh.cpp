#include "patchsmith/remesh.hpp"

#include "patchsmith/errors.hpp"

namespace patchsmith {

namespace {

// Dense renumbering of the alive elements of a tombstoned id space.
std::vector<std::uint32_t> dense_index(std::size_t capacity, const std::vector<std::uint32_t>& alive) {
  std::vector<std::uint32_t> index(capacity, kInvalidId);
  for (std::uint32_t i = 0; i < alive.size(); ++i) index[alive[i]] = i;
  return index;
}

}  // namespace

VertexInsertionResult vertex_insertion_remesh(const HalfEdgeMesh& mesh) {
  const auto faces = mesh.alive_faces();
  const auto edges = mesh.alive_edges();
  const auto verts = mesh.alive_vertices();
  const auto hes = mesh.alive_halfedges();
  const auto face_idx = dense_index(mesh.face_capacity(), faces);
  const auto edge_idx = dense_index(mesh.edge_capacity(), edges);
  const auto vert_idx = dense_index(mesh.vertex_capacity(), verts);
  const auto he_idx = dense_index(mesh.halfedge_capacity(), hes);

  VertexInsertionResult out;
  std::vector<Vec3> positions;
  positions.reserve(faces.size() + edges.size() + verts.size());
  for (auto f : faces) {
    positions.push_back(mesh.face_centroid(f));
    out.vertex_source.push_back({ElementKind::Face, f});
  }
  for (auto e : edges) {
    positions.push_back(mesh.edge_midpoint(e));
    out.vertex_source.push_back({ElementKind::Edge, e});
  }
  for (auto v : verts) {
    positions.push_back(mesh.position(v));
    out.vertex_source.push_back({ElementKind::Vertex, v});
  }
  const auto fp = [&](FaceId f) { return face_idx[f]; };
  const auto ep = [&](EdgeId e) { return static_cast<VertexId>(faces.size() + edge_idx[e]); };
  const auto vp = [&](VertexId v) { return static_cast<VertexId>(faces.size() + edges.size() + vert_idx[v]); };

  // Quad i has half-edges k0..k3 = (c0->c1, c1->c2, c2->c3, c3->c0).
  // Edge 2i pairs k3 of quad i with k0 of quad next(h); edge 2i+1 pairs k2
  // of quad i with k1 of quad next(twin h).
  std::vector<HalfEdgeMesh::HalfEdge> qh(4 * hes.size());
  out.quad_corner = hes;
  std::vector<HalfEdgeId> anchors(hes.size());
  for (std::uint32_t i = 0; i < hes.size(); ++i) {
    const HalfEdgeId h = hes[i];
    const HalfEdgeId p = mesh.prev(h);
    const HalfEdgeId k0 = 4 * he_idx[p] + 1;
    const HalfEdgeId k1 = 4 * he_idx[HalfEdgeMesh::twin(p)] + 3;
    const HalfEdgeId k2 = 4 * i + 2;
    const HalfEdgeId k3 = 4 * i;
    anchors[i] = k0;
    qh[k0] = {fp(mesh.face(h)), k1, kInvalidId, i};
    qh[k1] = {ep(HalfEdgeMesh::edge(p)), k2, kInvalidId, i};
    qh[k2] = {vp(mesh.origin(h)), k3, kInvalidId, i};
    qh[k3] = {ep(HalfEdgeMesh::edge(h)), k0, kInvalidId, i};
  }
  out.mesh = HalfEdgeMesh::from_halfedges(std::move(positions), std::move(qh), hes.size(), anchors);
  return out;
}

Vec3 doo_sabin_point(const HalfEdgeMesh& mesh, HalfEdgeId corner) {
  const VertexId v = mesh.origin(corner);
  const Vec3& p = mesh.position(v);
  const Vec3 m_out = midpoint(p, mesh.position(mesh.target(corner)));
  const Vec3 m_in = midpoint(p, mesh.position(mesh.origin(mesh.prev(corner))));
  return (p + m_out + m_in + mesh.face_centroid(mesh.face(corner))) / 4.0;
}

DooSabinResult doo_sabin_refine(const HalfEdgeMesh& mesh) {
  const auto hes = mesh.alive_halfedges();
  const auto he_idx = dense_index(mesh.halfedge_capacity(), hes);

  DooSabinResult out;
  out.vertex_corner = hes;
  std::vector<Vec3> positions;
  positions.reserve(hes.size());
  for (auto h : hes) positions.push_back(doo_sabin_point(mesh, h));

  std::vector<std::vector<VertexId>> polys;
  auto add_face = [&](ElementRef src, std::vector<HalfEdgeId> corners) {
    std::vector<VertexId> poly;
    for (auto h : corners) poly.push_back(he_idx[h]);
    polys.push_back(std::move(poly));
    out.face_source.push_back(src);
    out.face_corners.push_back(std::move(corners));
  };
  for (auto f : mesh.alive_faces()) add_face({ElementKind::Face, f}, mesh.face_loop(f));
  for (auto v : mesh.alive_vertices()) add_face({ElementKind::Vertex, v}, mesh.vertex_fan(v));
  for (auto e : mesh.alive_edges()) {
    const HalfEdgeId a = 2 * e, b = 2 * e + 1;
    add_face({ElementKind::Edge, e}, {a, mesh.next(b), b, mesh.next(a)});
  }
  out.mesh = HalfEdgeMesh::from_polygons(std::move(positions), polys);
  return out;
}

DualResult dual_mesh(const HalfEdgeMesh& mesh) {
  const auto faces = mesh.alive_faces();
  const auto face_idx = dense_index(mesh.face_capacity(), faces);
  DualResult out;
  out.vertex_face = faces;
  std::vector<Vec3> positions;
  for (auto f : faces) positions.push_back(mesh.face_centroid(f));
  std::vector<std::vector<VertexId>> polys;
  for (auto e : mesh.alive_edges()) {
    if (mesh.face(2 * e) == mesh.face(2 * e + 1))
      throw TopologyError("dual undefined: edge " + std::to_string(e) + " borders a single face");
  }
  for (auto v : mesh.alive_vertices()) {
    std::vector<VertexId> poly;
    for (auto h : mesh.vertex_fan(v)) poly.push_back(face_idx[mesh.face(h)]);
    polys.push_back(std::move(poly));
    out.face_vertex.push_back(v);
  }
  out.mesh = HalfEdgeMesh::from_polygons(std::move(positions), polys);
  return out;
}

}  // namespace patchsmith
