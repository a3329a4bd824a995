#include "patchsmith/corpus.hpp"

#include "patchsmith/errors.hpp"

#include <cmath>
#include <numbers>

namespace patchsmith::corpus {

namespace {

std::vector<Vec3> cube_positions(const Vec3& offset) {
  std::vector<Vec3> p;
  for (int i = 0; i < 8; ++i)
    p.push_back(Vec3((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1) + offset);
  return p;
}

std::vector<std::vector<VertexId>> cube_faces(VertexId base) {
  std::vector<std::vector<VertexId>> faces = {
      {0, 2, 3, 1},  // z = -1
      {4, 5, 7, 6},  // z = +1
      {0, 1, 5, 4},  // y = -1
      {2, 6, 7, 3},  // y = +1
      {0, 4, 6, 2},  // x = -1
      {1, 3, 7, 5},  // x = +1
  };
  for (auto& f : faces)
    for (auto& v : f) v += base;
  return faces;
}

}  // namespace

HalfEdgeMesh tetrahedron() {
  std::vector<Vec3> p = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  return HalfEdgeMesh::from_polygons(p, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}});
}

HalfEdgeMesh cube() { return HalfEdgeMesh::from_polygons(cube_positions(Vec3::Zero()), cube_faces(0)); }

HalfEdgeMesh cube_with_edge() {
  auto mesh = cube();
  // Vertex 7 = (1,1,1) on the top face (id 1), vertex 3 = (1,1,-1) on the
  // bottom face (id 0).
  mesh.insert_edge({1, 7, 0}, {0, 3, 0});
  return mesh;
}

HalfEdgeMesh two_cubes_bridge() {
  auto p = cube_positions(Vec3::Zero());
  const auto q = cube_positions(Vec3(4, 0, 0));
  p.insert(p.end(), q.begin(), q.end());
  auto faces = cube_faces(0);
  const auto more = cube_faces(8);
  faces.insert(faces.end(), more.begin(), more.end());
  auto mesh = HalfEdgeMesh::from_polygons(p, faces);
  // Face 5 is x = +1 of the first cube, face 10 is x = -1 of the second
  // (x = 3); join (1,1,1) to (3,1,1).
  mesh.insert_edge({5, 7, 0}, {10, 14, 0});
  return mesh;
}

HalfEdgeMesh torus_grid(int n, int m) {
  constexpr double R = 2.0, r = 1.0;
  std::vector<Vec3> p;
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n;
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / m;
      p.emplace_back((R + r * std::cos(phi)) * std::cos(theta), (R + r * std::cos(phi)) * std::sin(theta),
                     r * std::sin(phi));
    }
  }
  auto id = [&](int i, int j) { return static_cast<VertexId>(((i + n) % n) * m + (j + m) % m); };
  std::vector<std::vector<VertexId>> faces;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return HalfEdgeMesh::from_polygons(p, faces);
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> n = {"tetrahedron", "cube", "cube_edge", "bridge", "torus"};
  return n;
}

HalfEdgeMesh by_name(const std::string& name) {
  if (name == "tetrahedron") return tetrahedron();
  if (name == "cube") return cube();
  if (name == "cube_edge") return cube_with_edge();
  if (name == "bridge") return two_cubes_bridge();
  if (name == "torus") return torus_grid();
  throw ParamError("unknown corpus model '" + name + "'");
}

double signed_volume(const HalfEdgeMesh& mesh) {
  double vol = 0.0;
  for (auto f : mesh.alive_faces()) {
    const Vec3 c = mesh.face_centroid(f);
    for (auto h : mesh.face_loop(f))
      vol += c.dot(mesh.position(mesh.origin(h)).cross(mesh.position(mesh.target(h))));
  }
  return vol / 6.0;
}

}  // namespace patchsmith::corpus
