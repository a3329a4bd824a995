#include "doctest.h"

#include "patchsmith/corpus.hpp"
#include "patchsmith/errors.hpp"
#include "patchsmith/patch_assembly.hpp"
#include "patchsmith/remesh.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>

using namespace patchsmith;

namespace {

struct Built {
  HalfEdgeMesh mesh;
  FrameSet frames;
  PatchSet patches;
};

Built build(HalfEdgeMesh mesh) {
  Built b{std::move(mesh), {}, {}};
  b.frames = assign_frames(b.mesh);
  b.patches = build_patches(b.mesh, b.frames);
  return b;
}

HalfEdgeMesh pentagonal_prism() {
  std::vector<Vec3> pos;
  for (int layer = 0; layer < 2; ++layer)
    for (int k = 0; k < 5; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 5.0;
      pos.emplace_back(std::cos(a), std::sin(a), layer == 0 ? -0.7 : 0.9);
    }
  std::vector<std::vector<VertexId>> faces;
  faces.push_back({4, 3, 2, 1, 0});
  faces.push_back({5, 6, 7, 8, 9});
  for (VertexId k = 0; k < 5; ++k) faces.push_back({k, (k + 1) % 5, 5 + (k + 1) % 5, 5 + k});
  return HalfEdgeMesh::from_polygons(pos, faces);
}

}  // namespace

TEST_CASE("one patch per face corner and exact shared boundaries") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto b = build(corpus::by_name(name));
    CHECK(b.patches.size() == 2 * b.mesh.counts().edges);
    for (const auto& sb : check_boundary_conditions(b.patches).boundaries) CHECK(sb.gap == 0.0);
  }
  CHECK(build(corpus::tetrahedron()).patches.size() == 12);
}

TEST_CASE("patch order follows the vertex insertion quads") {
  const auto b = build(corpus::cube_with_edge());
  const auto vi = vertex_insertion_remesh(b.mesh);
  REQUIRE(vi.quad_corner.size() == b.patches.size());
  for (std::size_t i = 0; i < vi.quad_corner.size(); ++i) CHECK(b.patches.patches[i].id == vi.quad_corner[i]);
}

TEST_CASE("shared boundary index is a perfect matching") {
  const auto b = build(corpus::two_cubes_bridge());
  std::set<std::pair<std::uint32_t, int>> seen;
  for (const auto& sb : b.patches.boundaries) {
    CHECK(seen.insert({sb.patch_a, sb.boundary_a}).second);
    CHECK(seen.insert({sb.patch_b, sb.boundary_b}).second);
    const auto& na = b.patches.patches[sb.patch_a].neighbors[sb.boundary_a];
    const auto& nb = b.patches.patches[sb.patch_b].neighbors[sb.boundary_b];
    CHECK(na.patch == sb.patch_b);
    CHECK(na.boundary == sb.boundary_b);
    CHECK(nb.patch == sb.patch_a);
    CHECK(nb.boundary == sb.boundary_a);
    CHECK(na.reversed);
  }
  CHECK(seen.size() == 4 * b.patches.size());
}

TEST_CASE("corner blocks come from the frames") {
  const auto b = build(corpus::tetrahedron());
  for (const auto& patch : b.patches.patches)
    for (int c = 0; c < 4; ++c) {
      const auto& meta = patch.corners[c];
      const auto* f = b.frames.find(meta.frame);
      REQUIRE(f);
      CHECK(meta.valence == static_cast<int>(f->size()));
      CHECK(meta.extraordinary == (f->size() != 4));
      const auto ij = corner_index(c);
      CHECK(patch.P[ij[0]][ij[1]] == f->centroid);
      const auto d = boundary_index(c, 1, 1);
      CHECK(patch.P[d[0]][d[1]] == f->corners[meta.frame_corner]);
      CHECK(f->keys[meta.frame_corner] == patch.id);
      // B(corner) interpolates the frame centroid.
      const auto uv = corner_uv(c);
      CHECK((evaluate_bezier(patch, uv[0], uv[1]).point - f->centroid).norm() < 1e-14);
    }
}

TEST_CASE("midpoint condition holds at every corner") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto b = build(corpus::by_name(name));
    const auto report = check_boundary_conditions(b.patches);
    CHECK(report.max_relative() <= 1e-12);
    // Boundary points next to a corner are exact midpoints whatever the valence.
    for (const auto& patch : b.patches.patches)
      for (int bnd = 0; bnd < 4; ++bnd) {
        const auto& nb = patch.neighbors[bnd];
        const auto& other = b.patches.patches[nb.patch];
        for (int t : {1, 2}) {
          const auto a0 = boundary_index(bnd, t, 0), a1 = boundary_index(bnd, t, 1);
          const auto b1 = boundary_index(nb.boundary, 3 - t, 1);
          CHECK(patch.P[a0[0]][a0[1]] == (patch.P[a1[0]][a1[1]] + other.P[b1[0]][b1[1]]) * 0.5);
        }
      }
  }
}

TEST_CASE("perturbing an interior point shows up as a midpoint defect of the same size") {
  auto b = build(corpus::cube());
  const double delta = 1e-3;
  b.patches.patches[5].P[1][1] += Vec3(0.0, delta, 0.0);
  const auto report = check_boundary_conditions(b.patches);
  double at_corner = 0.0;
  for (const auto& r : report.corners)
    if (r.patch == 5 && r.corner == 0) at_corner = r.midpoint;
  CHECK(at_corner == doctest::Approx(delta).epsilon(1e-9));
  CHECK(report.max_midpoint == doctest::Approx(delta).epsilon(1e-9));
  CHECK(report.max_gap == 0.0);
}

TEST_CASE("valence five corner is coplanar") {
  const auto b = build(pentagonal_prism());
  const auto report = check_boundary_conditions(b.patches);
  int five = 0;
  for (const auto& r : report.corners)
    if (r.valence == 5) {
      ++five;
      CHECK(r.coplanarity <= 1e-12 * b.patches.bbox_diagonal);
    }
  CHECK(five == 10);
}

TEST_CASE("extraordinary fans share the frame plane") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto b = build(corpus::by_name(name));
    for (const auto& fan : b.patches.fans) {
      if (!fan.extraordinary()) continue;
      const auto* f = b.frames.find(fan.frame);
      Vec3 sum = Vec3::Zero();
      Vec3 first = Vec3::Zero();
      for (std::size_t k = 0; k < fan.members.size(); ++k) {
        const auto [pi, c] = fan.members[k];
        const auto& patch = b.patches.patches[pi];
        CHECK(patch.corners[c].frame_corner == k);
        const auto o = corner_index(c), d = boundary_index(c, 1, 1);
        const Vec3 rel = patch.P[d[0]][d[1]] - patch.P[o[0]][o[1]];
        CHECK((rel - f->V(k)).norm() <= 1e-15 * b.patches.bbox_diagonal);
        sum += rel;
        const auto uv = corner_uv(c);
        const auto s = evaluate_bezier(patch, uv[0], uv[1]);
        const Vec3 n = s.du.cross(s.dv).normalized();
        if (k == 0) first = n;
        CHECK(n.cross(first).norm() <= 1e-9);
        CHECK(n.dot(first) > 0.0);
      }
      CHECK(sum.norm() <= 1e-13 * b.patches.bbox_diagonal);
    }
  }
}

TEST_CASE("cube with an edge has one ten-sided fan") {
  const auto b = build(corpus::cube_with_edge());
  int tens = 0;
  for (const auto& fan : b.patches.fans)
    if (fan.members.size() == 10) {
      ++tens;
      CHECK(fan.extraordinary());
      CHECK(fan.frame.kind == ElementKind::Face);
    }
  CHECK(tens == 1);
}

TEST_CASE("fan sizes match the frame sizes and cover every patch corner once") {
  const auto b = build(corpus::two_cubes_bridge());
  std::set<std::pair<std::uint32_t, int>> seen;
  for (const auto& fan : b.patches.fans) {
    CHECK(fan.members.size() == b.frames.find(fan.frame)->size());
    for (const auto& [p, c] : fan.members) {
      CHECK(seen.insert({p, c}).second);
      CHECK(b.patches.patches[p].corners[c].frame == fan.frame);
    }
  }
  CHECK(seen.size() == 4 * b.patches.size());
}

TEST_CASE("classification") {
  const auto tet = build(corpus::tetrahedron());
  for (const auto& p : tet.patches.patches) CHECK(classify_patch(p) == PatchClass::Extraordinary);

  // Census oracle: on a mesh whose faces and vertices are all 4-valent every
  // patch is regular.
  const auto torus = build(corpus::torus_grid(4, 4));
  for (auto v : torus.mesh.alive_vertices()) REQUIRE(torus.mesh.valence(v) == 4);
  for (auto f : torus.mesh.alive_faces()) REQUIRE(torus.mesh.face_degree(f) == 4);
  for (const auto& p : torus.patches.patches) CHECK(classify_patch(p) == PatchClass::Regular);

  // Cube: every patch touches one 3-valent vertex.
  const auto cube = build(corpus::cube());
  for (const auto& p : cube.patches.patches) {
    CHECK(classify_patch(p) == PatchClass::Extraordinary);
    CHECK(p.corners[2].valence == 3);
    CHECK(p.corners[0].valence == 4);
  }
}

TEST_CASE("missing frames are assembly errors") {
  auto b = build(corpus::cube());
  auto frames = b.frames;
  frames.vertex_frame[3] = kInvalidId;
  CHECK_THROWS_AS(build_patches(b.mesh, frames), AssemblyError);
  frames = b.frames;
  frames.frames[frames.face_frame[0]].keys[0] = 9999;
  CHECK_THROWS_AS(build_patches(b.mesh, frames), AssemblyError);
}

TEST_CASE("json layout") {
  const auto b = build(corpus::tetrahedron());
  const auto j = to_json(b.patches);
  REQUIRE(j["patches"].size() == 12);
  const auto& p = j["patches"][0];
  CHECK(p["P"].size() == 16);
  CHECK(p["P"][4][0].get<double>() == b.patches.patches[0].P[1][0].x());
  CHECK(p["corners"].size() == 4);
  CHECK(p["corners"][2]["valence"] == 3);
  CHECK(p["neighbors"].size() == 4);
  CHECK(p["class"] == "extraordinary");
}
