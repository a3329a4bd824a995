#include "patchsmith/patch_assembly.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"
#include "patchsmith/geometry.hpp"
#include "patchsmith/parallel.hpp"

namespace patchsmith {

namespace {

const PolygonFrame& require(const FrameSet& frames, ElementRef owner) {
  const auto* f = frames.find(owner);
  if (!f) throw AssemblyError(std::string("missing ") + to_string(owner.kind) + " frame " + std::to_string(owner.id));
  return *f;
}

std::size_t require_corner(const PolygonFrame& f, HalfEdgeId key) {
  const auto k = f.corner_of(key);
  if (!k)
    throw AssemblyError(std::string(to_string(f.owner.kind)) + " frame " + std::to_string(f.owner.id) +
                        " has no sector for half-edge " + std::to_string(key));
  return *k;
}

// Writes the 2x2 block of corner c: corner point, the boundary point
// towards corner c+1, the boundary point towards corner c-1, and the
// diagonal interior point.
void fill_corner(BezierPatch& patch, int c, const PolygonFrame& f, HalfEdgeId key, HalfEdgeId toward_next,
                 HalfEdgeId toward_prev) {
  const std::size_t k = require_corner(f, key);
  const Vec3& ck = f.corners[k];
  const Vec3& cn = f.corners[require_corner(f, toward_next)];
  const Vec3& cp = f.corners[require_corner(f, toward_prev)];
  const auto at = [&](int b, int t, int d) -> Vec3& {
    const auto ij = boundary_index(b, t, d);
    return patch.P[ij[0]][ij[1]];
  };
  at(c, 0, 0) = f.centroid;
  at(c, 1, 0) = midpoint(ck, cn);
  at((c + 3) % 4, 2, 0) = midpoint(ck, cp);
  at(c, 1, 1) = ck;

  auto& meta = patch.corners[c];
  meta.valence = static_cast<int>(f.size());
  meta.extraordinary = f.size() != 4;
  meta.frame = f.owner;
  meta.frame_corner = static_cast<std::uint32_t>(k);
  meta.frame_normal = f.normal;
}

}  // namespace

const BezierPatch& PatchSet::by_id(HalfEdgeId h) const {
  if (h >= index_of.size() || index_of[h] == kInvalidId) throw AssemblyError("no patch for half-edge " + std::to_string(h));
  return patches[index_of[h]];
}

BezierPatch build_patch(const HalfEdgeMesh& mesh, const FrameSet& frames, HalfEdgeId h) {
  if (!mesh.halfedge_alive(h)) throw AssemblyError("half-edge " + std::to_string(h) + " is not alive");
  const HalfEdgeId p = mesh.prev(h), n = mesh.next(h), t = HalfEdgeMesh::twin(h);
  const HalfEdgeId tp = HalfEdgeMesh::twin(p), nt = mesh.next(t);

  BezierPatch patch;
  patch.id = h;
  // Boundary order around the quad: face point, edge point of prev(h),
  // vertex point, edge point of h.
  fill_corner(patch, 0, require(frames, {ElementKind::Face, mesh.face(h)}), h, p, n);
  fill_corner(patch, 1, require(frames, {ElementKind::Edge, HalfEdgeMesh::edge(p)}), h, tp, p);
  fill_corner(patch, 2, require(frames, {ElementKind::Vertex, mesh.origin(h)}), h, nt, tp);
  fill_corner(patch, 3, require(frames, {ElementKind::Edge, HalfEdgeMesh::edge(h)}), h, n, nt);
  return patch;
}

PatchSet build_patches(const HalfEdgeMesh& mesh, const FrameSet& frames) {
  PatchSet set;
  set.bbox_diagonal = frames.bbox_diagonal;
  const auto hes = mesh.alive_halfedges();
  set.index_of.assign(mesh.halfedge_capacity(), kInvalidId);
  for (std::size_t i = 0; i < hes.size(); ++i) set.index_of[hes[i]] = static_cast<std::uint32_t>(i);

  set.patches.resize(hes.size());
  parallel_for(hes.size(), [&](std::size_t i) {
    const HalfEdgeId h = hes[i];
    auto patch = build_patch(mesh, frames, h);
    const HalfEdgeId p = mesh.prev(h);
    const HalfEdgeId across[4] = {p, HalfEdgeMesh::twin(p), mesh.next(HalfEdgeMesh::twin(h)), mesh.next(h)};
    static constexpr std::uint8_t their_boundary[4] = {3, 2, 1, 0};
    for (int b = 0; b < 4; ++b) patch.neighbors[b] = {set.index_of[across[b]], their_boundary[b], true};
    set.patches[i] = std::move(patch);
  });

  for (std::uint32_t i = 0; i < set.patches.size(); ++i)
    for (std::uint8_t b = 0; b < 4; ++b) {
      const auto& nb = set.patches[i].neighbors[b];
      if (std::pair(i, b) < std::pair(nb.patch, nb.boundary)) set.boundaries.push_back({i, b, nb.patch, nb.boundary});
    }

  for (const auto& f : frames.frames) {
    CornerFan fan;
    fan.frame = f.owner;
    for (HalfEdgeId key : f.keys) {
      std::uint8_t corner = 0;
      switch (f.owner.kind) {
        case ElementKind::Face: corner = 0; break;
        case ElementKind::Vertex: corner = 2; break;
        case ElementKind::Edge: corner = HalfEdgeMesh::edge(key) == f.owner.id ? 3 : 1; break;
      }
      if (key >= set.index_of.size() || set.index_of[key] == kInvalidId)
        throw AssemblyError("frame key " + std::to_string(key) + " has no patch");
      fan.members.emplace_back(set.index_of[key], corner);
    }
    set.fans.push_back(std::move(fan));
  }
  return set;
}

PatchClass classify_patch(const BezierPatch& patch) {
  for (const auto& c : patch.corners)
    if (c.valence != 4) return PatchClass::Extraordinary;
  return PatchClass::Regular;
}

const char* to_string(PatchClass c) { return c == PatchClass::Regular ? "regular" : "extraordinary"; }

BoundaryConditionReport check_boundary_conditions(const PatchSet& set) {
  BoundaryConditionReport report;
  report.bbox_diagonal = set.bbox_diagonal;
  const auto at = [&](std::uint32_t patch, int b, int t, int d) -> const Vec3& {
    const auto ij = boundary_index(b, t, d);
    return set.patches[patch].P[ij[0]][ij[1]];
  };
  // Boundary midpoint defect at position t of boundary b of `patch`.
  const auto midpoint_defect = [&](std::uint32_t patch, int b, int t) {
    const auto& nb = set.patches[patch].neighbors[b];
    if (nb.patch == kInvalidId) return 0.0;
    return (at(patch, b, t, 1) + at(nb.patch, nb.boundary, 3 - t, 1) - 2.0 * at(patch, b, t, 0)).norm();
  };

  for (const auto& sb : set.boundaries) {
    BoundaryResidual r{sb.patch_a, sb.boundary_a, sb.patch_b, sb.boundary_b, 0.0};
    for (int t = 0; t < 4; ++t)
      r.gap = std::max(r.gap, (at(sb.patch_a, sb.boundary_a, t, 0) - at(sb.patch_b, sb.boundary_b, 3 - t, 0)).norm());
    report.max_gap = std::max(report.max_gap, r.gap);
    report.boundaries.push_back(r);
  }

  for (std::uint32_t i = 0; i < set.patches.size(); ++i) {
    const auto& patch = set.patches[i];
    for (std::uint8_t c = 0; c < 4; ++c) {
      CornerResidual r;
      r.patch = i;
      r.corner = c;
      r.valence = patch.corners[c].valence;
      const int before = (c + 3) % 4;
      r.midpoint = std::max(midpoint_defect(i, c, 1), midpoint_defect(i, before, 2));
      if (r.valence == 4) {
        r.midpoint = std::max(r.midpoint, midpoint_defect(i, c, 0));
      } else {
        const Vec3& n = patch.corners[c].frame_normal;
        const Vec3& o = at(i, c, 0, 0);
        for (const Vec3* q : {&at(i, c, 1, 0), &at(i, c, 1, 1), &at(i, before, 2, 0)})
          r.coplanarity = std::max(r.coplanarity, std::abs(n.dot(*q - o)));
      }
      report.max_midpoint = std::max(report.max_midpoint, r.midpoint);
      report.max_coplanarity = std::max(report.max_coplanarity, r.coplanarity);
      report.corners.push_back(r);
    }
  }
  return report;
}

nlohmann::json to_json(const BezierPatch& patch) {
  nlohmann::json j;
  j["id"] = patch.id;
  auto& P = j["P"] = nlohmann::json::array();
  for (const auto& row : patch.P)
    for (const auto& p : row) P.push_back(to_json(p));
  auto& corners = j["corners"] = nlohmann::json::array();
  for (const auto& c : patch.corners)
    corners.push_back({{"valence", c.valence},
                       {"extraordinary", c.extraordinary},
                       {"frame", to_json(c.frame)},
                       {"frame_corner", c.frame_corner}});
  auto& neighbors = j["neighbors"] = nlohmann::json::array();
  for (const auto& n : patch.neighbors)
    neighbors.push_back({{"patch", n.patch}, {"boundary", n.boundary}, {"reversed", n.reversed}});
  j["class"] = to_string(classify_patch(patch));
  return j;
}

nlohmann::json to_json(const PatchSet& set) {
  nlohmann::json j;
  auto& arr = j["patches"] = nlohmann::json::array();
  for (const auto& p : set.patches) arr.push_back(to_json(p));
  return j;
}

}  // namespace patchsmith
