#pragma once

#include "patchsmith/half_edge_mesh.hpp"

#include <string>
#include <vector>

namespace patchsmith::corpus {

HalfEdgeMesh tetrahedron();
/// The cube [-1,1]^3.
HalfEdgeMesh cube();
/// Cube with an edge from the top face's corner (1,1,1) to the bottom
/// face's corner (1,1,-1): one 10-sided face, genus 1.
HalfEdgeMesh cube_with_edge();
/// Two cubes, the second shifted by +4 in x, joined by one edge between
/// their facing faces.
HalfEdgeMesh two_cubes_bridge();
/// 4x4 quad grid on a torus with radii 2 and 1; every vertex is 4-valent.
HalfEdgeMesh torus_grid(int n = 4, int m = 4);

/// Names accepted by `by_name`: tetrahedron, cube, cube_edge, bridge, torus.
const std::vector<std::string>& names();
HalfEdgeMesh by_name(const std::string& name);

/// Signed enclosed volume; positive for outward-facing loops.
double signed_volume(const HalfEdgeMesh& mesh);

}  // namespace patchsmith::corpus
