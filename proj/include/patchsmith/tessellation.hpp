#pragma once

#include "patchsmith/kernel_table.hpp"
#include "patchsmith/patch_assembly.hpp"

#include "json.hpp"

#include <array>
#include <string>
#include <vector>

namespace patchsmith {

/// Node of a patch hierarchy. (u0, v0) is the node's cell index on the
/// 2^depth x 2^depth grid over the root patch's parameter square.
/// `local` is the same net relative to `origin`, the node's extraordinary
/// corner when it has one. Subdividing the local net keeps that corner at
/// exactly zero, so rings around it shrink without rounding drift.
struct PatchTreeNode {
  BezierPatch patch;
  ControlNet local{};
  Vec3 origin = Vec3::Zero();
  int depth = 0;
  std::uint32_t u0 = 0;
  std::uint32_t v0 = 0;
  std::array<std::uint32_t, 4> children{kInvalidId, kInvalidId, kInvalidId, kInvalidId};  // quadrant 2a+b

  bool leaf() const { return children[0] == kInvalidId; }
};

struct PatchTree {
  std::vector<PatchTreeNode> nodes;  // nodes[0] is the root

  std::vector<std::uint32_t> leaves() const;
  std::size_t leaf_count() const;
  int max_depth_reached() const;
  std::size_t subdivisions() const;
};

/// Regular patches are leaves; extraordinary ones are split with `table`
/// until their children are regular or max_depth is reached.
PatchTree build_patch_tree(const BezierPatch& patch, int max_depth, const KernelTable& table);

/// Leaf containing root parameter (u, v) and the local parameter in it.
struct TreeLocation {
  std::uint32_t node = 0;
  double u = 0.0;
  double v = 0.0;
};
TreeLocation locate(const PatchTree& tree, double u, double v);

/// Surface point of the hierarchy at root parameter (u, v). Derivatives are
/// with respect to the root parameters.
SurfacePoint evaluate(const PatchTree& tree, double u, double v);

struct TessellationOptions {
  int max_depth = 4;
  /// Samples per leaf edge; leaf_resolution - 1 must be a power of two.
  int leaf_resolution = 5;
  SubdivisionMode mode = SubdivisionMode::Modified;
  /// Weld distance relative to the bounding box diagonal.
  double weld_tolerance = 1e-9;
};

/// Throws ParamError for negative depth or a bad leaf resolution.
void validate(const TessellationOptions& options);

/// Unwelded triangles of one root patch.
struct PatchMesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

struct TriMesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  /// V - E + F, assuming the mesh is closed.
  long euler_characteristic() const;
  /// Throws the mesh_core error when the triangles do not form a closed
  /// oriented 2-manifold.
  HalfEdgeMesh to_halfedge() const;
};

struct TessellationStats {
  std::size_t patches = 0;
  std::size_t regular_patches = 0;
  std::size_t leaves = 0;
  std::size_t subdivisions = 0;
  int max_depth_reached = 0;
  std::size_t triangles = 0;
  std::size_t vertices = 0;
  long euler_characteristic = 0;
  /// Largest distance between two samples merged by the weld.
  double max_weld_distance = 0.0;
};

struct Tessellation {
  std::vector<PatchTree> trees;   // by patch index
  std::vector<PatchMesh> pieces;  // by patch index
  TriMesh mesh;
  TessellationStats stats;
};

/// Triangles of patch `index`. Samples along every leaf side include the
/// samples of the leaves on the other side, so adjacent pieces share their
/// boundary vertices.
PatchMesh tessellate_patch(const PatchSet& patches, const std::vector<PatchTree>& trees, std::uint32_t index,
                           const TessellationOptions& options);

/// Merges samples closer than `tolerance` (absolute), in piece order, and
/// checks the result is a closed 2-manifold. Throws TessellationError.
TriMesh weld(const std::vector<PatchMesh>& pieces, double tolerance, double* max_merged = nullptr);

Tessellation tessellate(const PatchSet& patches, const TessellationOptions& options);

/// Statistics of an assembled tessellation (pieces, trees and mesh).
TessellationStats tessellation_stats(const PatchSet& patches, const std::vector<PatchTree>& trees,
                                     const TriMesh& mesh, double max_weld_distance);

std::string export_obj(const TriMesh& mesh);
nlohmann::json to_json(const TessellationStats& stats);

}  // namespace patchsmith
