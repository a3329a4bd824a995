#include "patchsmith/half_edge_mesh.hpp"

#include "patchsmith/errors.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace patchsmith {

namespace {

struct Side {
  FaceId face;
  std::uint32_t index;  // position in the face loop
  VertexId from;
  VertexId to;
};

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

std::string describe_pair(VertexId a, VertexId b) {
  std::ostringstream os;
  os << "edge (" << a + 1 << ", " << b + 1 << ")";
  return os.str();
}

}  // namespace

HalfEdgeMesh HalfEdgeMesh::from_polygons(std::vector<Vec3> positions,
                                         const std::vector<std::vector<VertexId>>& faces) {
  const std::size_t nv = positions.size();
  std::vector<Side> sides;
  std::vector<std::size_t> face_offset(faces.size() + 1, 0);
  for (FaceId f = 0; f < faces.size(); ++f) {
    const auto& loop = faces[f];
    if (loop.size() < 3) throw ManifoldError("face " + std::to_string(f + 1) + " has fewer than 3 sides");
    face_offset[f] = sides.size();
    for (std::uint32_t i = 0; i < loop.size(); ++i) {
      const VertexId a = loop[i], b = loop[(i + 1) % loop.size()];
      if (a >= nv || b >= nv) throw ManifoldError("face " + std::to_string(f + 1) + " references a missing vertex");
      if (a == b) throw ManifoldError("face " + std::to_string(f + 1) + " has a degenerate side");
      sides.push_back({f, i, a, b});
    }
  }
  face_offset[faces.size()] = sides.size();

  // Group sides by undirected vertex pair.
  std::map<std::pair<VertexId, VertexId>, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t s = 0; s < sides.size(); ++s) {
    const auto [a, b] = std::minmax(sides[s].from, sides[s].to);
    auto& g = groups[{a, b}];
    (sides[s].from == a ? g.first : g.second).push_back(s);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (forward side, backward side)
  struct MultiGroup {
    std::vector<std::size_t> forward, backward;
  };
  std::vector<MultiGroup> multi;
  // Winding problems are reported before non-manifold edges, and those
  // before open boundaries, so the error names the most specific defect.
  std::string winding, nonmanifold, boundary;
  for (const auto& [key, g] : groups) {
    const std::size_t total = g.first.size() + g.second.size();
    if (total == 1) {
      if (boundary.empty()) boundary = "open boundary at " + describe_pair(key.first, key.second);
      continue;
    }
    if (g.first.size() != g.second.size()) {
      if (total == 2 && winding.empty()) winding = "inconsistent winding at " + describe_pair(key.first, key.second);
      if (total > 2 && nonmanifold.empty()) nonmanifold = "non-manifold " + describe_pair(key.first, key.second);
      continue;
    }
    if (g.first.size() == 1) {
      pairs.emplace_back(g.first[0], g.second[0]);
    } else {
      multi.push_back({g.first, g.second});
    }
  }
  if (!winding.empty()) throw OrientationError(winding);
  if (!nonmanifold.empty()) throw ManifoldError(nonmanifold);
  if (!boundary.empty()) throw BoundaryError(boundary);

  // Half-edge h of side s is determined once pairing is fixed; prev/next
  // within a face loop are fixed by the face itself.
  std::vector<std::uint32_t> side_twin(sides.size(), kInvalidId);
  for (auto [fw, bw] : pairs) {
    side_twin[fw] = static_cast<std::uint32_t>(bw);
    side_twin[bw] = static_cast<std::uint32_t>(fw);
  }
  auto side_prev = [&](std::size_t s) {
    const auto& sd = sides[s];
    const std::size_t n = faces[sd.face].size();
    return face_offset[sd.face] + (sd.index + n - 1) % n;
  };

  // Every vertex must have exactly one fan orbit.
  std::vector<std::vector<std::size_t>> outgoing(nv);
  for (std::size_t s = 0; s < sides.size(); ++s) outgoing[sides[s].from].push_back(s);
  auto vertex_is_manifold = [&](VertexId v) {
    const auto& out = outgoing[v];
    if (out.empty()) return false;
    std::size_t s = out.front(), count = 0;
    do {
      const auto t = side_twin[side_prev(s)];
      if (t == kInvalidId) return true;  // undecided multi-edge, checked later
      s = t;
      if (++count > out.size()) return false;
    } while (s != out.front());
    return count == out.size();
  };

  if (!multi.empty()) {
    // Backtracking over pairings of repeated vertex pairs.
    std::vector<std::vector<std::size_t>> perms(multi.size());
    std::vector<VertexId> touched;
    for (const auto& g : multi) {
      touched.push_back(sides[g.forward[0]].from);
      touched.push_back(sides[g.forward[0]].to);
    }
    auto assign = [&](std::size_t gi, const std::vector<std::size_t>& perm, bool set) {
      const auto& g = multi[gi];
      for (std::size_t k = 0; k < g.forward.size(); ++k) {
        const auto fw = g.forward[k], bw = g.backward[perm[k]];
        side_twin[fw] = set ? static_cast<std::uint32_t>(bw) : kInvalidId;
        side_twin[bw] = set ? static_cast<std::uint32_t>(fw) : kInvalidId;
      }
    };
    std::function<bool(std::size_t)> search = [&](std::size_t gi) -> bool {
      if (gi == multi.size()) {
        return std::all_of(touched.begin(), touched.end(), vertex_is_manifold);
      }
      std::vector<std::size_t> perm(multi[gi].forward.size());
      std::iota(perm.begin(), perm.end(), 0u);
      do {
        assign(gi, perm, true);
        if (search(gi + 1)) return true;
        assign(gi, perm, false);
      } while (std::next_permutation(perm.begin(), perm.end()));
      return false;
    };
    if (!search(0)) throw ManifoldError("repeated edges cannot be paired into a manifold");
    for (const auto& g : multi) {
      for (auto fw : g.forward) pairs.emplace_back(fw, side_twin[fw]);
    }
  }

  for (VertexId v = 0; v < nv; ++v) {
    if (outgoing[v].empty()) throw ManifoldError("isolated vertex " + std::to_string(v + 1));
    if (!vertex_is_manifold(v)) throw ManifoldError("non-manifold vertex " + std::to_string(v + 1));
  }

  // Stable edge numbering: order pairs by their forward side.
  std::sort(pairs.begin(), pairs.end());
  std::vector<HalfEdgeId> side_he(sides.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    side_he[pairs[e].first] = static_cast<HalfEdgeId>(2 * e);
    side_he[pairs[e].second] = static_cast<HalfEdgeId>(2 * e + 1);
  }

  HalfEdgeMesh mesh;
  mesh.vertices_.resize(nv);
  for (VertexId v = 0; v < nv; ++v) mesh.vertices_[v].position = positions[v];
  mesh.halfedges_.resize(sides.size());
  mesh.faces_.resize(faces.size());
  for (std::size_t s = 0; s < sides.size(); ++s) {
    const auto h = side_he[s];
    const auto& sd = sides[s];
    const std::size_t n = faces[sd.face].size();
    const auto nxt = side_he[face_offset[sd.face] + (sd.index + 1) % n];
    mesh.halfedges_[h].origin = sd.from;
    mesh.halfedges_[h].face = sd.face;
    mesh.link(h, nxt);
    if (sd.index == 0) mesh.faces_[sd.face].halfedge = h;
  }
  for (VertexId v = 0; v < nv; ++v) {
    HalfEdgeId best = kInvalidId;
    for (auto s : outgoing[v]) best = std::min(best, side_he[s]);
    mesh.vertices_[v].halfedge = best;
  }
  mesh.debug_validate();
  return mesh;
}

HalfEdgeMesh HalfEdgeMesh::from_halfedges(std::vector<Vec3> positions, std::vector<HalfEdge> halfedges,
                                           std::size_t face_count,
                                           const std::vector<HalfEdgeId>& face_anchors) {
  HalfEdgeMesh mesh;
  mesh.vertices_.resize(positions.size());
  for (VertexId v = 0; v < positions.size(); ++v) mesh.vertices_[v].position = positions[v];
  mesh.faces_.resize(face_count);
  for (HalfEdgeId h = 0; h < halfedges.size(); ++h) {
    const auto& he = halfedges[h];
    if (he.next >= halfedges.size() || he.face >= face_count || he.origin >= positions.size())
      throw ManifoldError("half-edge " + std::to_string(h) + " is not linked");
    halfedges[he.next].prev = h;
    if (mesh.faces_[he.face].halfedge == kInvalidId) mesh.faces_[he.face].halfedge = h;
    if (mesh.vertices_[he.origin].halfedge == kInvalidId) mesh.vertices_[he.origin].halfedge = h;
  }
  mesh.halfedges_ = std::move(halfedges);
  for (FaceId f = 0; f < face_anchors.size() && f < face_count; ++f) mesh.faces_[f].halfedge = face_anchors[f];
  mesh.validate();
  return mesh;
}

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Face: return "face";
    case ElementKind::Vertex: return "vertex";
    case ElementKind::Edge: return "edge";
  }
  return "unknown";
}

std::vector<VertexId> HalfEdgeMesh::alive_vertices() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < vertices_.size(); ++v)
    if (vertices_[v].alive) out.push_back(v);
  return out;
}

std::vector<HalfEdgeId> HalfEdgeMesh::alive_halfedges() const {
  std::vector<HalfEdgeId> out;
  for (HalfEdgeId h = 0; h < halfedges_.size(); ++h)
    if (halfedge_alive(h)) out.push_back(h);
  return out;
}

std::vector<EdgeId> HalfEdgeMesh::alive_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < edge_capacity(); ++e)
    if (edge_alive(e)) out.push_back(e);
  return out;
}

std::vector<FaceId> HalfEdgeMesh::alive_faces() const {
  std::vector<FaceId> out;
  for (FaceId f = 0; f < faces_.size(); ++f)
    if (faces_[f].alive) out.push_back(f);
  return out;
}

std::vector<HalfEdgeId> HalfEdgeMesh::face_loop(FaceId f) const {
  std::vector<HalfEdgeId> loop;
  const HalfEdgeId start = faces_[f].halfedge;
  HalfEdgeId h = start;
  do {
    loop.push_back(h);
    h = next(h);
  } while (h != start && loop.size() <= halfedges_.size());
  return loop;
}

std::vector<VertexId> HalfEdgeMesh::face_vertices(FaceId f) const {
  std::vector<VertexId> out;
  for (auto h : face_loop(f)) out.push_back(origin(h));
  return out;
}

std::vector<HalfEdgeId> HalfEdgeMesh::vertex_fan(VertexId v) const {
  std::vector<HalfEdgeId> fan;
  const HalfEdgeId start = vertices_[v].halfedge;
  HalfEdgeId h = start;
  do {
    fan.push_back(h);
    h = rotate_ccw(h);
  } while (h != start && fan.size() <= halfedges_.size());
  return fan;
}

std::size_t HalfEdgeMesh::face_degree(FaceId f) const { return face_loop(f).size(); }
std::size_t HalfEdgeMesh::valence(VertexId v) const { return vertex_fan(v).size(); }

Vec3 HalfEdgeMesh::face_centroid(FaceId f) const {
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (auto h : face_loop(f)) {
    sum += position(origin(h));
    ++n;
  }
  return sum / static_cast<double>(n);
}

Vec3 HalfEdgeMesh::edge_midpoint(EdgeId e) const {
  return midpoint(position(origin(2 * e)), position(origin(2 * e + 1)));
}

BoundingBox HalfEdgeMesh::bounds() const {
  BoundingBox box;
  for (const auto& v : vertices_)
    if (v.alive) box.extend(v.position);
  return box;
}

MeshCounts HalfEdgeMesh::counts() const {
  MeshCounts c;
  DisjointSets sets(vertices_.size());
  for (const auto& v : vertices_) c.vertices += v.alive ? 1 : 0;
  for (const auto& f : faces_) c.faces += f.alive ? 1 : 0;
  for (EdgeId e = 0; e < edge_capacity(); ++e) {
    if (!edge_alive(e)) continue;
    ++c.edges;
    sets.unite(origin(2 * e), origin(2 * e + 1));
  }
  for (VertexId v = 0; v < vertices_.size(); ++v)
    if (vertices_[v].alive && sets.find(v) == v) ++c.components;
  return c;
}

HalfEdgeId HalfEdgeMesh::corner_halfedge(const CornerRef& corner) const {
  if (!face_alive(corner.face)) throw CornerError("corner references a missing face");
  if (!vertex_alive(corner.vertex)) throw CornerError("corner references a missing vertex");
  std::uint32_t seen = 0;
  for (auto h : face_loop(corner.face)) {
    if (origin(h) != corner.vertex) continue;
    if (seen++ == corner.occurrence) return h;
  }
  throw CornerError("vertex " + std::to_string(corner.vertex) + " is not corner #" +
                    std::to_string(corner.occurrence) + " of face " + std::to_string(corner.face));
}

CornerRef HalfEdgeMesh::corner_of(HalfEdgeId h) const {
  CornerRef c{face(h), origin(h), 0};
  for (auto g : face_loop(c.face)) {
    if (g == h) break;
    if (origin(g) == c.vertex) ++c.occurrence;
  }
  return c;
}

HalfEdgeId HalfEdgeMesh::new_edge_pair(VertexId from, VertexId to) {
  const auto a = static_cast<HalfEdgeId>(halfedges_.size());
  halfedges_.push_back({from, kInvalidId, kInvalidId, kInvalidId});
  halfedges_.push_back({to, kInvalidId, kInvalidId, kInvalidId});
  return a;
}

void HalfEdgeMesh::assign_loop(HalfEdgeId start, FaceId f) {
  HalfEdgeId h = start;
  do {
    halfedges_[h].face = f;
    h = next(h);
  } while (h != start);
  faces_[f].halfedge = start;
}

namespace {
std::size_t loop_length(const HalfEdgeMesh& m, HalfEdgeId from, HalfEdgeId until) {
  // Number of half-edges visited walking from `from` up to and including `until`.
  std::size_t n = 1;
  for (HalfEdgeId h = from; h != until; h = m.next(h)) ++n;
  return n;
}
}  // namespace

EdgeId HalfEdgeMesh::insert_edge(const CornerRef& c1, const CornerRef& c2) {
  const HalfEdgeId h1 = corner_halfedge(c1);
  const HalfEdgeId h2 = corner_halfedge(c2);
  if (h1 == h2) throw CornerError("insert_edge needs two distinct corners");
  const VertexId v1 = origin(h1), v2 = origin(h2);
  if (v1 == v2) throw TopologyError("insert_edge would create a self-loop");
  const HalfEdgeId p1 = prev(h1), p2 = prev(h2);

  if (c1.face == c2.face) {
    // Loops after the split: a, h2 .. p1  and  b, h1 .. p2.
    const std::size_t na = 1 + loop_length(*this, h2, p1);
    const std::size_t nb = 1 + loop_length(*this, h1, p2);
    if (na < 3 || nb < 3) throw TopologyError("insert_edge would create a face with fewer than 3 sides");
  }

  const HalfEdgeId a = new_edge_pair(v1, v2);
  const HalfEdgeId b = twin(a);
  link(p1, a);
  link(a, h2);
  link(p2, b);
  link(b, h1);

  if (c1.face == c2.face) {
    const FaceId f = c1.face;
    const auto nf = static_cast<FaceId>(faces_.size());
    faces_.push_back({});
    assign_loop(a, f);
    assign_loop(b, nf);
  } else {
    faces_[c2.face].alive = false;
    faces_[c2.face].halfedge = kInvalidId;
    assign_loop(a, c1.face);
  }
  debug_validate();
  return edge(a);
}

void HalfEdgeMesh::delete_edge(EdgeId e) {
  if (!edge_alive(e)) throw TopologyError("delete_edge: edge " + std::to_string(e) + " does not exist");
  const HalfEdgeId a = 2 * e, b = 2 * e + 1;
  const VertexId va = origin(a), vb = origin(b);
  if (valence(va) < 3 || valence(vb) < 3)
    throw TopologyError("delete_edge would leave a vertex with fewer than 2 edges");
  const FaceId fa = face(a), fb = face(b);
  const HalfEdgeId an = next(a), ap = prev(a), bn = next(b), bp = prev(b);

  if (fa != fb) {
    link(ap, bn);
    link(bp, an);
    faces_[fb].alive = false;
    faces_[fb].halfedge = kInvalidId;
    assign_loop(an, fa);
  } else {
    // Split: loop an .. bp and loop bn .. ap.
    if (an == b || bn == a) throw TopologyError("delete_edge would isolate a vertex");
    const std::size_t n1 = loop_length(*this, an, bp);
    const std::size_t n2 = loop_length(*this, bn, ap);
    if (n1 < 3 || n2 < 3) throw TopologyError("delete_edge would create a face with fewer than 3 sides");
    link(bp, an);
    link(ap, bn);
    const auto nf = static_cast<FaceId>(faces_.size());
    faces_.push_back({});
    assign_loop(an, fa);
    assign_loop(bn, nf);
  }
  if (vertices_[va].halfedge == a) vertices_[va].halfedge = bn;
  if (vertices_[vb].halfedge == b) vertices_[vb].halfedge = an;
  halfedges_[a] = {};
  halfedges_[b] = {};
  debug_validate();
}

std::string HalfEdgeMesh::validation_error() const {
  std::ostringstream err;
  if (halfedges_.size() % 2 != 0) return "odd half-edge count";
  std::size_t alive_he = 0;
  for (HalfEdgeId h = 0; h < halfedges_.size(); ++h) {
    if (!halfedge_alive(h)) continue;
    ++alive_he;
    const auto& he = halfedges_[h];
    if (!halfedge_alive(twin(h))) {
      err << "half-edge " << h << " has no twin";
      return err.str();
    }
    if (he.next >= halfedges_.size() || he.prev >= halfedges_.size() || !halfedge_alive(he.next)) {
      err << "half-edge " << h << " has a dangling link";
      return err.str();
    }
    if (prev(next(h)) != h || next(prev(h)) != h) {
      err << "half-edge " << h << " next/prev mismatch";
      return err.str();
    }
    if (face(next(h)) != he.face || !face_alive(he.face)) {
      err << "half-edge " << h << " face mismatch";
      return err.str();
    }
    if (!vertex_alive(he.origin)) {
      err << "half-edge " << h << " starts at a removed vertex";
      return err.str();
    }
    if (origin(twin(h)) != origin(next(h))) {
      err << "orientation: twin of half-edge " << h << " does not reverse it";
      return err.str();
    }
  }
  std::size_t looped = 0;
  for (FaceId f = 0; f < faces_.size(); ++f) {
    if (!faces_[f].alive) continue;
    const HalfEdgeId start = faces_[f].halfedge;
    if (!halfedge_alive(start) || face(start) != f) {
      err << "face " << f << " has an invalid anchor";
      return err.str();
    }
    const auto n = face_loop(f).size();
    if (n < 3) {
      err << "face " << f << " has " << n << " sides";
      return err.str();
    }
    looped += n;
  }
  if (looped != alive_he) return "face loops do not partition the half-edges";
  std::vector<std::size_t> out_count(vertices_.size(), 0);
  for (HalfEdgeId h = 0; h < halfedges_.size(); ++h)
    if (halfedge_alive(h)) ++out_count[origin(h)];
  for (VertexId v = 0; v < vertices_.size(); ++v) {
    if (!vertices_[v].alive) continue;
    const HalfEdgeId h = vertices_[v].halfedge;
    if (!halfedge_alive(h) || origin(h) != v) {
      err << "vertex " << v << " has an invalid outgoing half-edge";
      return err.str();
    }
    if (vertex_fan(v).size() != out_count[v]) {
      err << "vertex " << v << " is not a manifold vertex";
      return err.str();
    }
  }
  return {};
}

void HalfEdgeMesh::validate() const {
  const auto msg = validation_error();
  if (msg.empty()) return;
  if (msg.rfind("orientation", 0) == 0) throw OrientationError(msg);
  throw ManifoldError(msg);
}

void HalfEdgeMesh::debug_validate() const {
#ifndef NDEBUG
  validate();
#endif
}

}  // namespace patchsmith
