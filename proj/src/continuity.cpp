#include "patchsmith/continuity.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"
#include "patchsmith/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>

namespace patchsmith {

namespace {

Vec3 inward(const SurfacePoint& p, int b) {
  switch (b) {
    case 0: return p.dv;
    case 1: return -p.du;
    case 2: return -p.dv;
    default: return p.du;
  }
}

const Vec3& second_cross(const SurfacePoint& p, int b) { return b % 2 == 0 ? p.dvv : p.duu; }

double angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

double net_extent(const ControlNet& P) {
  Vec3 lo = P[0][0], hi = P[0][0];
  for (const auto& row : P)
    for (const auto& p : row) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  return (hi - lo).norm();
}

PatchTree single(const BezierPatch& p) {
  PatchTree t;
  PatchTreeNode n;
  n.patch = p;
  n.local = p.P;
  t.nodes.push_back(n);
  return t;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

BoundaryDefect boundary_defects(const PatchTree& a, int ba, const PatchTree& b, int bb, int intervals, bool skip_start,
                                bool skip_end) {
  if (intervals < 1) throw ParamError("intervals must be positive");
  BoundaryDefect d;
  d.boundary_a = static_cast<std::uint8_t>(ba);
  d.boundary_b = static_cast<std::uint8_t>(bb);
  const double tol = 1e-8 * std::max(net_extent(a.nodes[0].patch.P), net_extent(b.nodes[0].patch.P));
  double c2_jump = 0.0, c2_scale = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    if ((i == 0 && skip_start) || (i == intervals && skip_end)) continue;
    const double s = static_cast<double>(i) / intervals;
    const auto ua = boundary_uv(ba, s), ub = boundary_uv(bb, 1.0 - s);
    const auto pa = evaluate(a, ua[0], ua[1]);
    const auto pb = evaluate(b, ub[0], ub[1]);
    if ((pa.point - pb.point).norm() > tol)
      throw AnalysisError("boundaries " + std::to_string(ba) + " and " + std::to_string(bb) +
                          " do not coincide; orientation mismatch");
    ++d.samples;
    const Vec3 da = inward(pa, ba), db = inward(pb, bb);
    const double scale = std::max(da.norm(), db.norm());
    if (scale > 0.0) d.c1 = std::max(d.c1, (da + db).norm() / scale);
    const Vec3 na = pa.du.cross(pa.dv), nb = pb.du.cross(pb.dv);
    if (na.norm() > 0.0 && nb.norm() > 0.0) d.g1 = std::max(d.g1, angle(na, nb));
    const Vec3& sa = second_cross(pa, ba);
    const Vec3& sb = second_cross(pb, bb);
    c2_jump = std::max(c2_jump, (sa - sb).norm());
    c2_scale = std::max({c2_scale, sa.norm(), sb.norm()});
  }
  d.c2 = c2_scale > 0.0 ? c2_jump / c2_scale : 0.0;
  return d;
}

BoundaryDefect boundary_defects(const BezierPatch& a, int ba, const BezierPatch& b, int bb, int intervals) {
  return boundary_defects(single(a), ba, single(b), bb, intervals);
}

RingSample ring_sample(const ControlNet& net, int c, bool blue_leaves_corner) {
  const auto at = [&](int b, int t, int d) -> const Vec3& {
    const auto ij = boundary_index(b, t, d);
    return net[ij[0]][ij[1]];
  };
  RingSample r;
  r.corner = at(c, 0, 0);
  r.yellow = at(c, 1, 1);
  r.blue = blue_leaves_corner ? at(c, 1, 0) : at((c + 3) % 4, 2, 0);
  const auto uv = corner_uv(c);
  const auto p = evaluate_bezier(net, uv[0], uv[1]);
  r.normal = p.du.cross(p.dv);
  if (r.normal.norm() > 0.0) r.normal.normalize();
  return r;
}

CornerDefect ring_defects(const std::vector<RingSample>& ring) {
  CornerDefect d;
  const std::size_t K = ring.size();
  d.valence = static_cast<int>(K);
  if (K == 0) return d;
  for (const auto& r : ring) d.radius += (r.yellow - r.corner).norm();
  d.radius /= static_cast<double>(K);
  if (!(d.radius > 0.0)) return d;

  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) d.normal_spread = std::max(d.normal_spread, angle(ring[i].normal, ring[j].normal));

  for (std::size_t k = 0; k < K; ++k) {
    const Vec3 mid = (ring[k].yellow + ring[(k + 1) % K].yellow) * 0.5;
    d.unbroken_line = std::max(d.unbroken_line, (ring[k].blue - mid).norm() / d.radius);
  }

  std::vector<Vec3> pts{ring[0].corner};
  for (const auto& r : ring) {
    pts.push_back(r.yellow);
    pts.push_back(r.blue);
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 n = eig.eigenvectors().col(0);
  for (const auto& p : pts) d.planarity = std::max(d.planarity, std::abs(n.dot(p - mean)) / d.radius);
  return d;
}

std::vector<RingSample> corner_ring(const PatchSet& patches, const std::vector<PatchTree>& trees, const CornerFan& fan) {
  std::vector<RingSample> ring;
  const std::size_t K = fan.members.size();
  for (std::size_t k = 0; k < K; ++k) {
    const auto [p, c] = fan.members[k];
    const auto next = fan.members[(k + 1) % K].first;
    const auto& root = patches.patches[p];
    bool leaves;
    if (root.neighbors[c].patch == next)
      leaves = true;
    else if (root.neighbors[(c + 3) % 4].patch == next)
      leaves = false;
    else
      throw AnalysisError("corner fan members " + std::to_string(p) + " and " + std::to_string(next) +
                          " are not adjacent");
    const auto& tree = trees[p];
    std::uint32_t node = 0;
    while (!tree.nodes[node].leaf()) node = tree.nodes[node].children[child_of_corner(c)];
    // Members are expressed relative to the shared corner; the ring
    // metrics are translation invariant.
    auto r = ring_sample(tree.nodes[node].local, c, leaves);
    r.yellow -= r.corner;
    r.blue -= r.corner;
    r.corner = Vec3::Zero();
    ring.push_back(r);
  }
  return ring;
}

DefectReport analyze(const PatchSet& patches, const AnalysisOptions& options) {
  std::vector<PatchTree> trees(patches.size());
  const auto& table = kernels_for(options.mode);
  parallel_for(patches.size(),
               [&](std::size_t i) { trees[i] = build_patch_tree(patches.patches[i], options.depth, table); });
  return analyze(patches, trees, options);
}

DefectReport analyze(const PatchSet& patches, const std::vector<PatchTree>& trees, const AnalysisOptions& options) {
  DefectReport report;
  report.options = options;
  report.boundaries.resize(patches.boundaries.size());
  parallel_for(patches.boundaries.size(), [&](std::size_t i) {
    const auto& sb = patches.boundaries[i];
    const auto& A = patches.patches[sb.patch_a];
    const bool s = A.corners[sb.boundary_a].extraordinary, e = A.corners[(sb.boundary_a + 1) % 4].extraordinary;
    auto d = boundary_defects(trees[sb.patch_a], sb.boundary_a, trees[sb.patch_b], sb.boundary_b, options.intervals, s, e);
    d.patch_a = sb.patch_a;
    d.patch_b = sb.patch_b;
    d.ev_start = s;
    d.ev_end = e;
    report.boundaries[i] = d;
  });
  for (const auto& fan : patches.fans) {
    auto c = ring_defects(corner_ring(patches, trees, fan));
    c.frame = fan.frame;
    report.corners.push_back(c);
  }

  auto& s = report.summary;
  for (const auto& b : report.boundaries) {
    s.max_c1 = std::max(s.max_c1, b.c1);
    s.max_g1 = std::max(s.max_g1, b.g1);
    s.max_c2 = std::max(s.max_c2, b.c2);
    if (b.ev_emanating()) {
      s.max_c1_ev = std::max(s.max_c1_ev, b.c1);
      s.max_g1_ev = std::max(s.max_g1_ev, b.g1);
    }
  }
  for (const auto& c : report.corners) {
    if (c.valence == 4) continue;
    s.max_normal_spread_ev = std::max(s.max_normal_spread_ev, c.normal_spread);
    s.max_unbroken_line_ev = std::max(s.max_unbroken_line_ev, c.unbroken_line);
    s.max_planarity = std::max(s.max_planarity, c.planarity);
  }
  return report;
}

std::vector<ModeRow> compare_modes(const PatchSet& patches, const std::vector<int>& depths, int intervals) {
  std::vector<ModeRow> rows;
  for (int depth : depths)
    for (auto mode : {SubdivisionMode::Standard, SubdivisionMode::Modified}) {
      AnalysisOptions o;
      o.depth = depth;
      o.mode = mode;
      o.intervals = intervals;
      rows.push_back({depth, mode, analyze(patches, o).summary});
    }
  return rows;
}

double child_c2_defect(const std::array<ControlNet, 4>& children, int intervals) {
  BezierPatch q[4];
  for (int i = 0; i < 4; ++i) q[i].P = children[i];
  double worst = 0.0;
  // u = 1/2: 00|10 and 01|11; v = 1/2: 00|01 and 10|11.
  for (auto [a, ba, b, bb] : {std::array{0, 1, 2, 3}, std::array{1, 1, 3, 3}, std::array{0, 2, 1, 0}, std::array{2, 2, 3, 0}})
    worst = std::max(worst, boundary_defects(q[a], ba, q[b], bb, intervals).c2);
  return worst;
}

std::string modes_csv(const std::vector<ModeRow>& rows) {
  std::string out = "depth,mode,c1_ev,g1_ev,normal_spread_ev,unbroken_line_ev,planarity_ev,c1,g1,c2\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out += std::to_string(r.depth) + "," + to_string(r.mode) + "," + fmt(s.max_c1_ev) + "," + fmt(s.max_g1_ev) + "," +
           fmt(s.max_normal_spread_ev) + "," + fmt(s.max_unbroken_line_ev) + "," + fmt(s.max_planarity) + "," +
           fmt(s.max_c1) + "," + fmt(s.max_g1) + "," + fmt(s.max_c2) + "\n";
  }
  return out;
}

std::string defects_csv(const DefectReport& report, const std::string& metric) {
  std::string out;
  if (metric == "ring") {
    out = "frame_kind,frame_id,valence,normal_spread,planarity,unbroken_line\n";
    for (const auto& c : report.corners)
      out += std::string(to_string(c.frame.kind)) + "," + std::to_string(c.frame.id) + "," + std::to_string(c.valence) +
             "," + fmt(c.normal_spread) + "," + fmt(c.planarity) + "," + fmt(c.unbroken_line) + "\n";
    return out;
  }
  double BoundaryDefect::*field = nullptr;
  if (metric == "c1")
    field = &BoundaryDefect::c1;
  else if (metric == "g1")
    field = &BoundaryDefect::g1;
  else if (metric == "c2")
    field = &BoundaryDefect::c2;
  else
    throw ParamError("unknown metric '" + metric + "'");
  out = "patch_a,boundary_a,patch_b,boundary_b,ev_emanating,samples," + metric + "\n";
  for (const auto& b : report.boundaries)
    out += std::to_string(b.patch_a) + "," + std::to_string(b.boundary_a) + "," + std::to_string(b.patch_b) + "," +
           std::to_string(b.boundary_b) + "," + (b.ev_emanating() ? "1" : "0") + "," + std::to_string(b.samples) + "," +
           fmt(b.*field) + "\n";
  return out;
}

nlohmann::json to_json(const DefectSummary& s) {
  return {{"max_c1", s.max_c1},
          {"max_g1", s.max_g1},
          {"max_c2", s.max_c2},
          {"max_c1_ev", s.max_c1_ev},
          {"max_g1_ev", s.max_g1_ev},
          {"max_normal_spread_ev", s.max_normal_spread_ev},
          {"max_unbroken_line_ev", s.max_unbroken_line_ev},
          {"max_planarity_ev", s.max_planarity}};
}

nlohmann::json to_json(const DefectReport& r) {
  nlohmann::json j;
  j["depth"] = r.options.depth;
  j["mode"] = to_string(r.options.mode);
  j["intervals"] = r.options.intervals;
  j["summary"] = to_json(r.summary);
  auto& bs = j["boundaries"] = nlohmann::json::array();
  for (const auto& b : r.boundaries)
    bs.push_back({{"patch_a", b.patch_a},
                  {"boundary_a", b.boundary_a},
                  {"patch_b", b.patch_b},
                  {"boundary_b", b.boundary_b},
                  {"ev_emanating", b.ev_emanating()},
                  {"samples", b.samples},
                  {"c1", b.c1},
                  {"g1", b.g1},
                  {"c2", b.c2}});
  auto& cs = j["corners"] = nlohmann::json::array();
  for (const auto& c : r.corners)
    cs.push_back({{"frame", to_json(c.frame)},
                  {"valence", c.valence},
                  {"normal_spread", c.normal_spread},
                  {"planarity", c.planarity},
                  {"unbroken_line", c.unbroken_line}});
  return j;
}

}  // namespace patchsmith
