#include "patchsmith/polygon_frame.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/remesh.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace patchsmith {

namespace {

Vec3 mean_of(const std::vector<Vec3>& pts) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

Vec3 newell_normal(const std::vector<Vec3>& pts) {
  Vec3 n = Vec3::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) n += pts[i].cross(pts[(i + 1) % pts.size()]);
  return n;
}

double mean_radius(const PolygonFrame& f) {
  double r = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) r += f.V(k).norm();
  return r / static_cast<double>(f.size());
}

// Scales corners about `center` so the mean corner radius becomes `radius`.
void restore_radius(PolygonFrame& f, const Vec3& center, double radius) {
  const double current = mean_radius(f);
  if (current <= 0.0) return;
  const double s = radius / current;
  for (auto& c : f.corners) c = center + s * (c - center);
  f.update_centroid();
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

}  // namespace

std::optional<std::size_t> PolygonFrame::corner_of(HalfEdgeId key) const {
  for (std::size_t k = 0; k < keys.size(); ++k)
    if (keys[k] == key) return k;
  return std::nullopt;
}

void PolygonFrame::update_centroid() { centroid = mean_of(corners); }

Vec3 fit_plane_normal(const std::vector<Vec3>& corners, const Vec3& centroid) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& c : corners) {
    const Vec3 d = c - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const auto& ev = solver.eigenvalues();  // ascending
  if (!(ev[1] > 1e-12 * ev[2]) || ev[2] <= 0.0) throw DegenerateFrameError("frame corners are collinear");
  Vec3 n = solver.eigenvectors().col(0).normalized();
  if (n.dot(newell_normal(corners)) < 0.0) n = -n;
  return n;
}

PolygonFrame planarize(const PolygonFrame& frame) {
  if (frame.size() < 3) throw DegenerateFrameError("frame has fewer than 3 corners");
  PolygonFrame out = frame;
  const Vec3 c = mean_of(frame.corners);
  out.normal = fit_plane_normal(frame.corners, c);
  for (auto& p : out.corners) {
    const double d = (p - c).dot(out.normal);
    if (d != 0.0) p -= d * out.normal;
  }
  out.update_centroid();
  return out;
}

PolygonFrame regularize_dual(const PolygonFrame& frame, int iterations) {
  if (iterations <= 0 || iterations % 2 != 0)
    throw ParamError("dual iterations must be a positive even number");
  PolygonFrame out = frame;
  const std::size_t K = frame.size();
  const Vec3 center = mean_of(frame.corners);
  const double radius = mean_radius(frame);
  std::vector<Vec3> pts = frame.corners;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Vec3> next(K);
    for (std::size_t k = 0; k < K; ++k) next[k] = midpoint(pts[k], pts[(k + 1) % K]);
    pts = std::move(next);
  }
  // After 2j steps corner k is centred on original corner k + j.
  const std::size_t shift = static_cast<std::size_t>(iterations / 2) % K;
  for (std::size_t k = 0; k < K; ++k) out.corners[k] = pts[(k + K - shift) % K];
  out.update_centroid();
  restore_radius(out, center, radius);
  return out;
}

PolygonFrame doo_sabin_face_step(const PolygonFrame& frame) {
  PolygonFrame out = frame;
  const std::size_t K = frame.size();
  const Vec3 c = mean_of(frame.corners);
  for (std::size_t k = 0; k < K; ++k) {
    const Vec3& prev = frame.corners[(k + K - 1) % K];
    const Vec3& next = frame.corners[(k + 1) % K];
    out.corners[k] = frame.corners[k] / 2.0 + (prev + next) / 8.0 + c / 4.0;
  }
  out.update_centroid();
  return out;
}

PolygonFrame set_frame_params(const PolygonFrame& frame, double scale, double rotation, const Vec3& offset) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParamError("frame scale must be positive");
  if (!std::isfinite(rotation) || !offset.allFinite()) throw ParamError("frame parameters must be finite");
  PolygonFrame out = frame;
  if (scale == 1.0 && rotation == 0.0 && offset == Vec3::Zero()) return out;
  const Eigen::AngleAxisd rot(rotation, frame.normal.normalized());
  for (std::size_t k = 0; k < frame.size(); ++k) {
    if (scale == 1.0 && rotation == 0.0) {
      out.corners[k] = frame.corners[k] + offset;
      continue;
    }
    Vec3 v = frame.V(k) * scale;
    if (rotation != 0.0) v = rot * v;
    out.corners[k] = frame.centroid + v + offset;
  }
  out.update_centroid();
  out.scale = frame.scale * scale;
  out.rotation = frame.rotation + rotation;
  out.offset = frame.offset + offset;
  return out;
}

std::vector<double> angular_steps(const PolygonFrame& frame) {
  const Vec3 n = frame.normal.normalized();
  // In-plane basis.
  Vec3 e1 = n.unitOrthogonal();
  Vec3 e2 = n.cross(e1);
  std::vector<double> angles;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const Vec3 v = frame.V(k);
    angles.push_back(std::atan2(v.dot(e2), v.dot(e1)));
  }
  std::vector<double> steps;
  for (std::size_t k = 0; k < angles.size(); ++k)
    steps.push_back(wrap_angle(angles[(k + 1) % angles.size()] - angles[k]));
  return steps;
}

bool is_star(const PolygonFrame& frame) {
  double total = 0.0;
  for (double s : angular_steps(frame)) {
    if (!(s > 0.0)) return false;
    total += s;
  }
  return std::abs(total - 2.0 * std::numbers::pi) < 1e-6;
}

FrameQuality frame_quality(const PolygonFrame& frame) {
  FrameQuality q;
  const std::size_t K = frame.size();
  const double radius = mean_radius(frame);
  const Vec3 c = mean_of(frame.corners);
  Vec3 n = frame.normal;
  try {
    n = fit_plane_normal(frame.corners, c);
  } catch (const DegenerateFrameError&) {
  }
  for (const auto& p : frame.corners) q.planarity = std::max(q.planarity, std::abs((p - c).dot(n)));
  if (radius > 0.0) q.planarity /= radius;
  q.star = is_star(frame);
  q.convex = q.star;
  for (std::size_t k = 0; k < K && q.convex; ++k) {
    const Vec3 a = frame.corners[(k + 1) % K] - frame.corners[k];
    const Vec3 b = frame.corners[(k + 2) % K] - frame.corners[(k + 1) % K];
    if (!(a.cross(b).dot(frame.normal) > 0.0)) q.convex = false;
  }
  const double ideal = 2.0 * std::numbers::pi / static_cast<double>(K);
  for (double s : angular_steps(frame)) q.angle_residual = std::max(q.angle_residual, std::abs(s - ideal));
  for (std::size_t k = 0; k < K; ++k) {
    const double dev = radius > 0.0 ? std::abs(frame.V(k).norm() - radius) / radius : 0.0;
    q.length_residual = std::max(q.length_residual, dev);
  }
  return q;
}

const PolygonFrame* FrameSet::find(const ElementRef& owner) const {
  const std::vector<std::uint32_t>* index = nullptr;
  switch (owner.kind) {
    case ElementKind::Face: index = &face_frame; break;
    case ElementKind::Vertex: index = &vertex_frame; break;
    case ElementKind::Edge: index = &edge_frame; break;
  }
  if (owner.id >= index->size() || (*index)[owner.id] == kInvalidId) return nullptr;
  return &frames[(*index)[owner.id]];
}

PolygonFrame* FrameSet::find(const ElementRef& owner) {
  return const_cast<PolygonFrame*>(std::as_const(*this).find(owner));
}

const Vec3& FrameSet::corner(const ElementRef& owner, HalfEdgeId key) const {
  const auto* f = find(owner);
  if (!f) throw AssemblyError(std::string("missing ") + to_string(owner.kind) + " frame " + std::to_string(owner.id));
  const auto k = f->corner_of(key);
  if (!k)
    throw AssemblyError(std::string(to_string(owner.kind)) + " frame " + std::to_string(owner.id) +
                        " has no corner for half-edge " + std::to_string(key));
  return f->corners[*k];
}

namespace {

std::vector<HalfEdgeId> owner_keys(const HalfEdgeMesh& mesh, const ElementRef& owner) {
  switch (owner.kind) {
    case ElementKind::Face: return mesh.face_loop(owner.id);
    case ElementKind::Vertex: return mesh.vertex_fan(owner.id);
    case ElementKind::Edge: {
      const HalfEdgeId a = 2 * owner.id, b = a + 1;
      return {a, mesh.next(b), b, mesh.next(a)};
    }
  }
  return {};
}

PolygonFrame finish_frame(PolygonFrame base, const FrameOptions& options, double diag) {
  base.update_centroid();
  for (int i = 1; i < options.ds_iterations; ++i) base = doo_sabin_face_step(base);

  const double area = newell_normal(base.corners).norm() / 2.0;
  if (!(area > 1e-18 * diag * diag))
    throw DegenerateFrameError(std::string(to_string(base.owner.kind)) + " frame " + std::to_string(base.owner.id) +
                               " has zero area");

  if (base.size() == 4) {
    // Quadrilaterals stay as they are; the normal is still useful for
    // rotation controls.
    base.normal = fit_plane_normal(base.corners, base.centroid);
    return base;
  }
  auto shape = [&](const PolygonFrame& f) {
    auto p = planarize(f);
    if (options.dual_iterations > 0) p = regularize_dual(p, options.dual_iterations);
    return p;
  };
  PolygonFrame out = shape(base);
  if (is_star(out)) return out;

  const Vec3 center = out.centroid;
  const double radius = mean_radius(out);
  PolygonFrame g = base;
  for (int step = 0; step < options.max_repair_steps; ++step) {
    g = doo_sabin_face_step(g);
    auto candidate = shape(g);
    if (is_star(candidate)) {
      restore_radius(candidate, center, radius);
      // Translate back so the frame keeps the one-step centroid.
      const Vec3 shift = center - candidate.centroid;
      for (auto& c : candidate.corners) c += shift;
      candidate.update_centroid();
      return candidate;
    }
  }
  return out;
}

}  // namespace

PolygonFrame assign_frame(const HalfEdgeMesh& mesh, const ElementRef& owner, const FrameOptions& options,
                          double bbox_diagonal) {
  PolygonFrame f;
  f.owner = owner;
  f.keys = owner_keys(mesh, owner);
  for (auto h : f.keys) f.corners.push_back(doo_sabin_point(mesh, h));
  return finish_frame(std::move(f), options, bbox_diagonal);
}

FrameSet assign_frames(const HalfEdgeMesh& mesh, const FrameOptions& options) {
  if (options.ds_iterations < 1) throw ParamError("ds_iterations must be at least 1");
  if (options.dual_iterations < 0 || options.dual_iterations % 2 != 0)
    throw ParamError("dual_iterations must be even");
  FrameSet set;
  set.bbox_diagonal = mesh.bounds().diagonal();
  set.face_frame.assign(mesh.face_capacity(), kInvalidId);
  set.vertex_frame.assign(mesh.vertex_capacity(), kInvalidId);
  set.edge_frame.assign(mesh.edge_capacity(), kInvalidId);

  const auto ds = doo_sabin_refine(mesh);
  for (FaceId df = 0; df < ds.face_source.size(); ++df) {
    PolygonFrame f;
    f.owner = ds.face_source[df];
    f.keys = ds.face_corners[df];
    for (auto v : ds.mesh.face_vertices(df)) f.corners.push_back(ds.mesh.position(v));
    auto& index = f.owner.kind == ElementKind::Face     ? set.face_frame
                  : f.owner.kind == ElementKind::Vertex ? set.vertex_frame
                                                        : set.edge_frame;
    index[f.owner.id] = static_cast<std::uint32_t>(set.frames.size());
    set.frames.push_back(std::move(f));
  }
  for (auto& f : set.frames) f = finish_frame(std::move(f), options, set.bbox_diagonal);
  return set;
}

}  // namespace patchsmith
