#include "doctest.h"

#include "patchsmith/corpus.hpp"
#include "patchsmith/errors.hpp"
#include "patchsmith/obj_io.hpp"
#include "patchsmith/tessellation.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace patchsmith;

namespace {

PatchSet assemble(const HalfEdgeMesh& mesh) { return build_patches(mesh, assign_frames(mesh)); }

// Pentagonal bipyramid: triangle faces, two 5-valent apexes.
HalfEdgeMesh bipyramid() {
  std::vector<Vec3> pos{{0, 0, 1.2}, {0, 0, -1.2}};
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0;
    pos.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  std::vector<std::vector<VertexId>> faces;
  for (VertexId k = 0; k < 5; ++k) {
    const VertexId a = 2 + k, b = 2 + (k + 1) % 5;
    faces.push_back({0, a, b});
    faces.push_back({1, b, a});
  }
  return HalfEdgeMesh::from_polygons(pos, faces);
}

// Tree-shape oracle: leaves of a node whose extraordinary corners are
// given as a bit set, enumerated quadrant by quadrant.
std::size_t enumerate_leaves(unsigned ev_corners, int depth_left) {
  if (ev_corners == 0 || depth_left == 0) return 1;
  std::size_t total = 0;
  for (int q = 0; q < 4; ++q) {
    unsigned owned = 0;
    for (int c = 0; c < 4; ++c)
      if ((ev_corners >> c & 1u) && child_of_corner(c) == q) owned |= 1u << c;
    total += enumerate_leaves(owned, depth_left - 1);
  }
  return total;
}

std::size_t count_lines(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("Bezier evaluation") {
  std::mt19937 rng(7);
  const auto P = testutil::random_net(rng);
  const auto at0 = evaluate_bezier(P, 0.0, 0.0);
  CHECK(at0.point == P[0][0]);
  CHECK((at0.du - 3.0 * (P[1][0] - P[0][0])).norm() < 1e-15);
  CHECK((at0.dv - 3.0 * (P[0][1] - P[0][0])).norm() < 1e-15);

  ControlNet C;
  for (auto& row : C)
    for (auto& p : row) p = Vec3(1.5, -2.0, 0.25);
  const auto c = evaluate_bezier(C, 0.3, 0.8);
  CHECK((c.point - Vec3(1.5, -2.0, 0.25)).norm() < 1e-15);
  for (const Vec3* d : {&c.du, &c.dv, &c.duu, &c.dvv, &c.duv}) CHECK(d->norm() < 1e-14);

  for (int trial = 0; trial < 50; ++trial) {
    const auto Q = testutil::random_net(rng);
    CHECK((evaluate_bezier(Q, 0.37, 0.62).point - testutil::de_casteljau(Q, 0.37, 0.62)).norm() < 1e-13);
  }

  // Derivatives against central differences of the oracle.
  const double h = 1e-5;
  const auto s = evaluate_bezier(P, 0.41, 0.23);
  const Vec3 du = (testutil::de_casteljau(P, 0.41 + h, 0.23) - testutil::de_casteljau(P, 0.41 - h, 0.23)) / (2 * h);
  const Vec3 dv = (testutil::de_casteljau(P, 0.41, 0.23 + h) - testutil::de_casteljau(P, 0.41, 0.23 - h)) / (2 * h);
  CHECK((s.du - du).norm() < 1e-8);
  CHECK((s.dv - dv).norm() < 1e-8);
  const Vec3 duv = (testutil::de_casteljau(P, 0.41 + h, 0.23 + h) - testutil::de_casteljau(P, 0.41 + h, 0.23 - h) -
                    testutil::de_casteljau(P, 0.41 - h, 0.23 + h) + testutil::de_casteljau(P, 0.41 - h, 0.23 - h)) /
                   (4 * h * h);
  CHECK((s.duv - duv).norm() < 1e-4);
}

TEST_CASE("patch tree shapes") {
  const auto& table = modified_kernels();
  const auto torus = assemble(corpus::torus_grid());
  CHECK(build_patch_tree(torus.patches[0], 5, table).leaf_count() == 1);

  const auto cube = assemble(corpus::cube());
  const auto& one_ev = cube.patches[0];
  REQUIRE(one_ev.corners[2].extraordinary);
  for (int d = 0; d <= 5; ++d) {
    const auto tree = build_patch_tree(one_ev, d, table);
    CHECK(tree.subdivisions() == static_cast<std::size_t>(d));
    CHECK(tree.leaf_count() == static_cast<std::size_t>(3 * d + 1));
    CHECK(tree.max_depth_reached() == d);
    for (const auto& n : tree.nodes)
      CHECK((n.leaf() == (!n.patch.extraordinary() || n.depth == d)));
  }

  const auto bi = assemble(bipyramid());
  const auto& two_ev = bi.patches[0];
  REQUIRE(two_ev.corners[0].valence == 3);
  REQUIRE(two_ev.corners[2].valence == 5);
  REQUIRE(two_ev.corners[1].valence == 4);
  REQUIRE(two_ev.corners[3].valence == 4);
  for (int d = 1; d <= 5; ++d) {
    const auto tree = build_patch_tree(two_ev, d, table);
    CHECK(tree.leaf_count() == enumerate_leaves(0b0101, d));
    CHECK(tree.leaf_count() == static_cast<std::size_t>(2 * (3 * (d - 1) + 1) + 2));
  }
}

TEST_CASE("tree evaluation matches the root polynomial for the standard table") {
  const auto cube = assemble(corpus::cube());
  const auto tree = build_patch_tree(cube.patches[3], 4, standard_kernels());
  for (double u : {0.0, 0.1, 0.5, 0.77, 1.0})
    for (double v : {0.0, 0.33, 0.5, 0.9, 1.0}) {
      const auto a = evaluate(tree, u, v);
      const auto b = evaluate_bezier(cube.patches[3], u, v);
      CHECK((a.point - b.point).norm() < 1e-13);
      CHECK((a.du - b.du).norm() < 1e-11);
      CHECK((a.dv - b.dv).norm() < 1e-11);
    }
}

TEST_CASE("single regular patch tessellation") {
  PatchSet set;
  std::mt19937 rng(3);
  BezierPatch p;
  p.P = testutil::random_net(rng);
  set.patches.push_back(p);
  TessellationOptions o;
  o.leaf_resolution = 3;
  std::vector<PatchTree> trees{build_patch_tree(p, o.max_depth, modified_kernels())};
  const auto piece = tessellate_patch(set, trees, 0, o);
  CHECK(piece.positions.size() == 9);
  CHECK(piece.triangles.size() == 8);
  for (int c = 0; c < 4; ++c) {
    const auto ij = corner_index(c);
    bool found = false;
    for (const auto& x : piece.positions) found = found || x == p.P[ij[0]][ij[1]];
    CHECK(found);
  }
  TriMesh tm{piece.positions, piece.normals, piece.triangles};
  const auto obj = export_obj(tm);
  CHECK(count_lines(obj, "v ") == 9);
  CHECK(count_lines(obj, "f ") == 8);
}

TEST_CASE("closed outputs keep the Euler characteristic") {
  struct Case {
    std::string model;
    long chi;
  };
  for (const auto& [model, chi] : {Case{"tetrahedron", 2}, Case{"cube", 2}, Case{"cube_edge", 0}, Case{"bridge", 2},
                                   Case{"torus", 0}}) {
    CAPTURE(model);
    const auto patches = assemble(corpus::by_name(model));
    TessellationOptions o;
    o.max_depth = 3;
    const auto t = tessellate(patches, o);
    CHECK(t.mesh.euler_characteristic() == chi);
    CHECK(t.stats.euler_characteristic == chi);
    CHECK(t.mesh.to_halfedge().counts().components == 1);
    // Samples shared between pieces come from the same boundary curve.
    CHECK(t.stats.max_weld_distance <= 1e-12 * patches.bbox_diagonal);
  }
}

TEST_CASE("adjacent leaves of different depth share boundary samples") {
  const auto patches = assemble(corpus::cube_with_edge());
  for (int depth : {0, 1, 2, 4})
    for (int r : {2, 3, 5, 9}) {
      CAPTURE(depth);
      CAPTURE(r);
      TessellationOptions o;
      o.max_depth = depth;
      o.leaf_resolution = r;
      const auto t = tessellate(patches, o);
      CHECK(t.mesh.euler_characteristic() == 0);
    }
}

TEST_CASE("tessellation statistics") {
  const auto torus = assemble(corpus::torus_grid());
  TessellationOptions o;
  o.max_depth = 0;
  const auto t = tessellate(torus, o);
  CHECK(t.stats.subdivisions == 0);
  CHECK(t.stats.leaves == torus.size());
  CHECK(t.stats.regular_patches == torus.size());

  const auto cube = assemble(corpus::cube());
  o.max_depth = 3;
  const auto c = tessellate(cube, o);
  CHECK(c.stats.patches == 24);
  CHECK(c.stats.subdivisions == 24 * 3);
  CHECK(c.stats.leaves == 24 * 10);
  CHECK(c.stats.max_depth_reached == 3);
  const auto j = to_json(c.stats);
  for (const char* key : {"patches", "leaves", "max_depth_reached", "triangles"}) CHECK(j.contains(key));
}

TEST_CASE("tessellation is deterministic") {
  const auto patches = assemble(corpus::two_cubes_bridge());
  TessellationOptions o;
  o.max_depth = 2;
  const auto a = export_obj(tessellate(patches, o).mesh);
  const auto b = export_obj(tessellate(patches, o).mesh);
  CHECK(a == b);
}

TEST_CASE("exported OBJ reloads with the same topology") {
  TessellationOptions o;
  o.max_depth = 2;
  const auto tet = tessellate(assemble(corpus::tetrahedron()), o);
  const auto text = export_obj(tet.mesh);
  CHECK(validate_obj(text).code == ValidationCode::Valid);
  CHECK(load_obj(text).counts().euler_characteristic() == 2);

  const auto hole = tessellate(assemble(corpus::cube_with_edge()), o);
  CHECK(load_obj(export_obj(hole.mesh)).counts().genus() == 1);
}

TEST_CASE("normals face the same way as the triangles") {
  TessellationOptions o;
  o.max_depth = 2;
  const auto t = tessellate(assemble(corpus::cube_with_edge()), o);
  for (const auto& tri : t.mesh.triangles) {
    const Vec3 n = (t.mesh.positions[tri[1]] - t.mesh.positions[tri[0]])
                       .cross(t.mesh.positions[tri[2]] - t.mesh.positions[tri[0]]);
    for (auto v : tri) CHECK(n.dot(t.mesh.normals[v]) > 0.0);
  }
  CHECK(corpus::signed_volume(t.mesh.to_halfedge()) > 0.0);
}

TEST_CASE("modified refinement converges geometrically") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto patches = assemble(corpus::by_name(name));
    for (const auto& patch : patches.patches) {
      if (!patch.extraordinary()) continue;
      std::vector<double> gaps;
      auto prev = build_patch_tree(patch, 1, modified_kernels());
      for (int d = 2; d <= 6; ++d) {
        auto next = build_patch_tree(patch, d, modified_kernels());
        double gap = 0.0;
        for (int i = 0; i <= 32; ++i)
          for (int j = 0; j <= 32; ++j)
            gap = std::max(gap, (evaluate(prev, i / 32.0, j / 32.0).point - evaluate(next, i / 32.0, j / 32.0).point).norm());
        gaps.push_back(gap);
        prev = std::move(next);
      }
      for (std::size_t k = 1; k < gaps.size(); ++k) CHECK(gaps[k] <= 0.75 * gaps[k - 1] + 1e-15);
    }
  }
}

TEST_CASE("bad options") {
  TessellationOptions o;
  o.leaf_resolution = 4;
  CHECK_THROWS_AS(validate(o), ParamError);
  o.leaf_resolution = 1;
  CHECK_THROWS_AS(validate(o), ParamError);
  o.leaf_resolution = 5;
  o.max_depth = -1;
  CHECK_THROWS_AS(validate(o), ParamError);
}

TEST_CASE("a weld tolerance that is too large is reported") {
  const auto patches = assemble(corpus::cube());
  TessellationOptions o;
  o.max_depth = 1;
  o.weld_tolerance = 0.2;
  CHECK_THROWS_AS(tessellate(patches, o), TessellationError);
}
