#pragma once

#include "patchsmith/half_edge_mesh.hpp"

#include <optional>
#include <vector>

namespace patchsmith {

/// K-sided polygon attached to a face, vertex or edge of the input mesh.
/// `keys[k]` is the input half-edge (face corner) whose sector corner k
/// serves; patch assembly looks corners up by key.
struct PolygonFrame {
  ElementRef owner;
  std::vector<Vec3> corners;
  std::vector<HalfEdgeId> keys;
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double scale = 1.0;
  double rotation = 0.0;
  Vec3 offset = Vec3::Zero();

  std::size_t size() const { return corners.size(); }
  Vec3 V(std::size_t k) const { return corners[k] - centroid; }
  /// Index of the corner with the given key, or nullopt.
  std::optional<std::size_t> corner_of(HalfEdgeId key) const;
  /// Recomputes centroid as the mean of the corners.
  void update_centroid();
};

/// Least-squares plane normal of the corners (eigenvector of the smallest
/// covariance eigenvalue), oriented to agree with the Newell normal.
/// Throws DegenerateFrameError when the corners are collinear.
Vec3 fit_plane_normal(const std::vector<Vec3>& corners, const Vec3& centroid);

/// Orthogonal projection onto the least-squares plane through the centroid.
PolygonFrame planarize(const PolygonFrame& frame);

/// Midpoint polygon applied `iterations` (even) times, reindexed so corner k
/// stays in sector k, then rescaled about the centroid to the original mean
/// corner radius. Throws ParamError for odd or non-positive counts.
PolygonFrame regularize_dual(const PolygonFrame& frame, int iterations);

/// Doo-Sabin face-face step applied to the polygon alone:
/// c'_k = c_k/2 + (c_{k-1} + c_{k+1})/8 + centroid/4.
PolygonFrame doo_sabin_face_step(const PolygonFrame& frame);

/// Uniform scale about the centroid, rotation about the normal, then
/// translation. scale and rotation are recorded cumulatively. Throws
/// ParamError for scale <= 0.
PolygonFrame set_frame_params(const PolygonFrame& frame, double scale, double rotation, const Vec3& offset);

struct FrameQuality {
  double planarity = 0.0;       // max distance to the plane / mean radius
  bool convex = false;
  bool star = false;
  double angle_residual = 0.0;  // max |angular step - 2pi/K|
  double length_residual = 0.0; // max ||V_k| - mean| / mean
  double regularity() const { return std::max(angle_residual, length_residual); }
};

/// Angular steps of the corners about the centroid, measured in the plane
/// orthogonal to `normal`, each in (-pi, pi].
std::vector<double> angular_steps(const PolygonFrame& frame);
bool is_star(const PolygonFrame& frame);
FrameQuality frame_quality(const PolygonFrame& frame);

struct FrameOptions {
  int ds_iterations = 1;
  int dual_iterations = 0;
  /// Extra Doo-Sabin face steps tried on a non-star frame before giving up.
  int max_repair_steps = 16;
};

struct FrameSet {
  std::vector<PolygonFrame> frames;
  std::vector<std::uint32_t> face_frame;    // by face id
  std::vector<std::uint32_t> vertex_frame;  // by vertex id
  std::vector<std::uint32_t> edge_frame;    // by edge id
  double bbox_diagonal = 1.0;

  const PolygonFrame* find(const ElementRef& owner) const;
  PolygonFrame* find(const ElementRef& owner);
  /// Frame corner for a key; throws AssemblyError if the frame or key is
  /// missing.
  const Vec3& corner(const ElementRef& owner, HalfEdgeId key) const;
};

/// Frames from Doo-Sabin refinement, planarized for K != 4.
FrameSet assign_frames(const HalfEdgeMesh& mesh, const FrameOptions& options = {});
/// Frame for a single owner, built the same way as in assign_frames.
PolygonFrame assign_frame(const HalfEdgeMesh& mesh, const ElementRef& owner, const FrameOptions& options,
                          double bbox_diagonal);

}  // namespace patchsmith
