#include "patchsmith/tessellation.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

namespace patchsmith {

std::vector<std::uint32_t> PatchTree::leaves() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].leaf()) out.push_back(i);
  return out;
}

std::size_t PatchTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.leaf(); }));
}

int PatchTree::max_depth_reached() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t PatchTree::subdivisions() const { return (nodes.size() - 1) / 4; }

namespace {

int first_ev_corner(const BezierPatch& p) {
  for (int c = 0; c < 4; ++c)
    if (p.corners[c].extraordinary) return c;
  return -1;
}

void rebase(PatchTreeNode& n, int corner) {
  const auto ij = corner_index(corner);
  const Vec3 shift = n.local[ij[0]][ij[1]];
  if (shift == Vec3::Zero()) return;
  n.origin += shift;
  for (auto& row : n.local)
    for (auto& p : row) p -= shift;
}

}  // namespace

PatchTree build_patch_tree(const BezierPatch& patch, int max_depth, const KernelTable& table) {
  if (max_depth < 0) throw ParamError("max_depth must be non-negative");
  PatchTree tree;
  PatchTreeNode root;
  root.patch = patch;
  root.local = patch.P;
  if (const int c = first_ev_corner(patch); c >= 0) rebase(root, c);
  tree.nodes.push_back(std::move(root));
  // Breadth-first so node order is independent of recursion details.
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].patch.extraordinary() || tree.nodes[i].depth >= max_depth) continue;
    BezierPatch local = tree.nodes[i].patch;
    local.P = tree.nodes[i].local;
    const auto kids = subdivide(local, table);
    for (int q = 0; q < 4; ++q) {
      PatchTreeNode child;
      child.patch = kids[q];
      child.local = kids[q].P;
      child.origin = tree.nodes[i].origin;
      if (const int c = first_ev_corner(kids[q]); c >= 0) rebase(child, c);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) child.patch.P[a][b] = child.local[a][b] + child.origin;
      child.depth = tree.nodes[i].depth + 1;
      child.u0 = 2 * tree.nodes[i].u0 + static_cast<std::uint32_t>(q / 2);
      child.v0 = 2 * tree.nodes[i].v0 + static_cast<std::uint32_t>(q % 2);
      tree.nodes[i].children[q] = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.push_back(std::move(child));
    }
  }
  return tree;
}

TreeLocation locate(const PatchTree& tree, double u, double v) {
  TreeLocation loc{0, u, v};
  while (!tree.nodes[loc.node].leaf()) {
    const int a = loc.u >= 0.5 ? 1 : 0, b = loc.v >= 0.5 ? 1 : 0;
    loc.u = 2.0 * loc.u - a;
    loc.v = 2.0 * loc.v - b;
    loc.node = tree.nodes[loc.node].children[2 * a + b];
  }
  return loc;
}

SurfacePoint evaluate(const PatchTree& tree, double u, double v) {
  const auto loc = locate(tree, u, v);
  auto p = evaluate_bezier(tree.nodes[loc.node].patch, loc.u, loc.v);
  const double k = std::ldexp(1.0, tree.nodes[loc.node].depth);
  p.du *= k;
  p.dv *= k;
  p.duu *= k * k;
  p.dvv *= k * k;
  p.duv *= k * k;
  return p;
}

void validate(const TessellationOptions& o) {
  if (o.max_depth < 0 || o.max_depth > 20) throw ParamError("max_depth must be in [0, 20]");
  const int r = o.leaf_resolution - 1;
  if (r < 1 || (r & (r - 1)) != 0) throw ParamError("leaf_resolution - 1 must be a power of two");
  if (!(o.weld_tolerance > 0.0)) throw ParamError("weld_tolerance must be positive");
}

namespace {

using Coord = std::int64_t;

// Sample positions on the lines of a patch's parameter grid. Horizontal
// lines (v fixed) store u positions and vice versa; units are 1/N of the
// parameter square with N = (r - 1) 2^max_depth.
struct Lines {
  std::map<Coord, std::vector<Coord>> horizontal;
  std::map<Coord, std::vector<Coord>> vertical;

  void finish() {
    for (auto* m : {&horizontal, &vertical})
      for (auto& [_, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
  }
};

struct Grid {
  Coord N = 0;
  int r = 0;
  int max_depth = 0;
  Coord spacing(int depth) const { return Coord{1} << (max_depth - depth); }
  Coord extent(int depth) const { return spacing(depth) * (r - 1); }
};

Lines own_lines(const PatchTree& tree, const Grid& g) {
  Lines lines;
  for (const auto& n : tree.nodes) {
    if (!n.leaf()) continue;
    const Coord s = g.spacing(n.depth), S = g.extent(n.depth);
    const Coord u_lo = n.u0 * S, v_lo = n.v0 * S;
    for (int k = 0; k < g.r; ++k) {
      lines.horizontal[v_lo].push_back(u_lo + k * s);
      lines.horizontal[v_lo + S].push_back(u_lo + k * s);
      lines.vertical[u_lo].push_back(v_lo + k * s);
      lines.vertical[u_lo + S].push_back(v_lo + k * s);
    }
  }
  lines.finish();
  return lines;
}

// Positions along boundary b measured from corner b.
std::vector<Coord> boundary_positions(const Lines& lines, int b, Coord N) {
  const std::vector<Coord>* src = nullptr;
  switch (b) {
    case 0: src = &lines.horizontal.at(0); break;
    case 1: src = &lines.vertical.at(N); break;
    case 2: src = &lines.horizontal.at(N); break;
    default: src = &lines.vertical.at(0); break;
  }
  std::vector<Coord> out = *src;
  if (b >= 2)
    for (auto& c : out) c = N - c;
  return out;
}

void add_boundary_positions(Lines& lines, int b, Coord N, const std::vector<Coord>& positions) {
  auto& dst = b == 0 ? lines.horizontal[0] : b == 1 ? lines.vertical[N] : b == 2 ? lines.horizontal[N] : lines.vertical[0];
  for (Coord s : positions) dst.push_back(b >= 2 ? N - s : s);
}

// Points strictly between lo and hi on a line.
void between(const std::vector<Coord>& line, Coord lo, Coord hi, std::vector<Coord>& out) {
  out.clear();
  for (auto it = std::upper_bound(line.begin(), line.end(), lo); it != line.end() && *it < hi; ++it) out.push_back(*it);
}

}  // namespace

PatchMesh tessellate_patch(const PatchSet& patches, const std::vector<PatchTree>& trees, std::uint32_t index,
                           const TessellationOptions& options) {
  Grid g;
  g.r = options.leaf_resolution;
  g.max_depth = options.max_depth;
  g.N = g.extent(0);

  Lines lines = own_lines(trees[index], g);
  const auto& root = patches.patches[index];
  for (int b = 0; b < 4; ++b) {
    const auto& nb = root.neighbors[b];
    if (nb.patch == kInvalidId) continue;
    auto theirs = boundary_positions(own_lines(trees[nb.patch], g), nb.boundary, g.N);
    for (auto& s : theirs) s = g.N - s;
    add_boundary_positions(lines, b, g.N, theirs);
  }
  lines.finish();

  PatchMesh mesh;
  std::map<std::pair<Coord, Coord>, std::uint32_t> vertex_at;

  for (const auto& node : trees[index].nodes) {
    if (!node.leaf()) continue;
    const Coord s = g.spacing(node.depth), S = g.extent(node.depth);
    const Coord u_lo = node.u0 * S, v_lo = node.v0 * S;
    const double inv = 1.0 / static_cast<double>(S);

    auto sample = [&](double u, double v, int corner) {
      const auto p = evaluate_bezier(node.patch, u, v);
      Vec3 n = p.du.cross(p.dv);
      if (corner >= 0 && node.patch.corners[corner].extraordinary) n = node.patch.corners[corner].frame_normal;
      const double len = n.norm();
      mesh.positions.push_back(p.point);
      mesh.normals.push_back(len > 0.0 ? Vec3(n / len) : Vec3::Zero());
      return static_cast<std::uint32_t>(mesh.positions.size() - 1);
    };
    auto vertex = [&](Coord U, Coord V) {
      const auto key = std::pair(U, V);
      if (auto it = vertex_at.find(key); it != vertex_at.end()) return it->second;
      const double u = static_cast<double>(U - u_lo) * inv, v = static_cast<double>(V - v_lo) * inv;
      int corner = -1;
      if ((u == 0.0 || u == 1.0) && (v == 0.0 || v == 1.0)) corner = u == 0.0 ? (v == 0.0 ? 0 : 3) : (v == 0.0 ? 1 : 2);
      const auto id = sample(u, v, corner);
      vertex_at.emplace(key, id);
      return id;
    };

    std::vector<Coord> extra;
    std::vector<std::uint32_t> ring;
    for (int i = 0; i + 1 < g.r; ++i)
      for (int j = 0; j + 1 < g.r; ++j) {
        const Coord u0 = u_lo + i * s, u1 = u0 + s, v0 = v_lo + j * s, v1 = v0 + s;
        ring.clear();
        // Counter-clockwise in (u, v), inserting the finer samples of
        // neighbouring leaves on the leaf's outer sides.
        ring.push_back(vertex(u0, v0));
        if (j == 0) {
          between(lines.horizontal[v0], u0, u1, extra);
          for (Coord c : extra) ring.push_back(vertex(c, v0));
        }
        ring.push_back(vertex(u1, v0));
        if (i + 2 == g.r) {
          between(lines.vertical[u1], v0, v1, extra);
          for (Coord c : extra) ring.push_back(vertex(u1, c));
        }
        ring.push_back(vertex(u1, v1));
        if (j + 2 == g.r) {
          between(lines.horizontal[v1], u0, u1, extra);
          for (auto it = extra.rbegin(); it != extra.rend(); ++it) ring.push_back(vertex(*it, v1));
        }
        ring.push_back(vertex(u0, v1));
        if (i == 0) {
          between(lines.vertical[u0], v0, v1, extra);
          for (auto it = extra.rbegin(); it != extra.rend(); ++it) ring.push_back(vertex(u0, *it));
        }
        if (ring.size() == 4) {
          mesh.triangles.push_back({ring[0], ring[1], ring[2]});
          mesh.triangles.push_back({ring[0], ring[2], ring[3]});
        } else {
          const auto center = sample((static_cast<double>(u0 - u_lo) + 0.5 * s) * inv,
                                     (static_cast<double>(v0 - v_lo) + 0.5 * s) * inv, -1);
          for (std::size_t k = 0; k < ring.size(); ++k) mesh.triangles.push_back({center, ring[k], ring[(k + 1) % ring.size()]});
        }
      }
  }
  return mesh;
}

long TriMesh::euler_characteristic() const {
  // Every edge of a closed mesh has two sides. Counting distinct vertex
  // pairs instead would miss multi-edges, which coarse samplings of
  // self-adjacent faces do produce.
  const long F = static_cast<long>(triangles.size());
  return static_cast<long>(positions.size()) - 3 * F / 2 + F;
}

HalfEdgeMesh TriMesh::to_halfedge() const {
  std::vector<std::vector<VertexId>> faces;
  faces.reserve(triangles.size());
  for (const auto& t : triangles) faces.push_back({t[0], t[1], t[2]});
  return HalfEdgeMesh::from_polygons(positions, faces);
}

namespace {

struct CellHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : c) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

}  // namespace

TriMesh weld(const std::vector<PatchMesh>& pieces, double tolerance, double* max_merged) {
  TriMesh out;
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>, CellHash> grid;
  const double inv = 1.0 / tolerance;
  double worst = 0.0;
  auto cell_of = [&](const Vec3& p) {
    return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p.x() * inv)),
                                       static_cast<std::int64_t>(std::floor(p.y() * inv)),
                                       static_cast<std::int64_t>(std::floor(p.z() * inv))};
  };
  for (const auto& piece : pieces) {
    std::vector<std::uint32_t> remap(piece.positions.size());
    for (std::size_t i = 0; i < piece.positions.size(); ++i) {
      const Vec3& p = piece.positions[i];
      const auto c = cell_of(p);
      std::uint32_t found = kInvalidId;
      double best = tolerance;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
            if (it == grid.end()) continue;
            for (auto id : it->second) {
              const double d = (out.positions[id] - p).norm();
              if (d <= best && (found == kInvalidId || d < best || id < found)) {
                best = d;
                found = id;
              }
            }
          }
      if (found == kInvalidId) {
        found = static_cast<std::uint32_t>(out.positions.size());
        out.positions.push_back(p);
        out.normals.push_back(piece.normals[i]);
        grid[c].push_back(found);
      } else {
        worst = std::max(worst, best);
      }
      remap[i] = found;
    }
    for (const auto& t : piece.triangles) {
      const std::array<std::uint32_t, 3> w{remap[t[0]], remap[t[1]], remap[t[2]]};
      if (w[0] == w[1] || w[1] == w[2] || w[0] == w[2])
        throw TessellationError("weld collapsed a triangle; the tolerance is too large");
      out.triangles.push_back(w);
    }
  }
  try {
    (void)out.to_halfedge();
  } catch (const Error& e) {
    throw TessellationError(std::string("welded mesh is not a closed 2-manifold: ") + e.what());
  }
  if (max_merged) *max_merged = worst;
  return out;
}

TessellationStats tessellation_stats(const PatchSet& patches, const std::vector<PatchTree>& trees,
                                     const TriMesh& mesh, double max_weld_distance) {
  TessellationStats s;
  s.patches = patches.size();
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (classify_patch(patches.patches[i]) == PatchClass::Regular) ++s.regular_patches;
    s.leaves += trees[i].leaf_count();
    s.subdivisions += trees[i].subdivisions();
    s.max_depth_reached = std::max(s.max_depth_reached, trees[i].max_depth_reached());
  }
  s.triangles = mesh.triangles.size();
  s.vertices = mesh.positions.size();
  s.euler_characteristic = mesh.euler_characteristic();
  s.max_weld_distance = max_weld_distance;
  return s;
}

Tessellation tessellate(const PatchSet& patches, const TessellationOptions& options) {
  validate(options);
  Tessellation t;
  const auto& table = kernels_for(options.mode);
  t.trees.resize(patches.size());
  parallel_for(patches.size(),
               [&](std::size_t i) { t.trees[i] = build_patch_tree(patches.patches[i], options.max_depth, table); });
  t.pieces.resize(patches.size());
  parallel_for(patches.size(), [&](std::size_t i) {
    t.pieces[i] = tessellate_patch(patches, t.trees, static_cast<std::uint32_t>(i), options);
  });
  double merged = 0.0;
  t.mesh = weld(t.pieces, options.weld_tolerance * patches.bbox_diagonal, &merged);
  t.stats = tessellation_stats(patches, t.trees, t.mesh, merged);
  return t;
}

std::string export_obj(const TriMesh& mesh) {
  std::string out;
  char buf[128];
  for (const auto& p : mesh.positions) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const auto& n : mesh.normals) {
    std::snprintf(buf, sizeof buf, "vn %.9g %.9g %.9g\n", n.x(), n.y(), n.z());
    out += buf;
  }
  const bool normals = mesh.normals.size() == mesh.positions.size();
  for (const auto& t : mesh.triangles) {
    if (normals)
      std::snprintf(buf, sizeof buf, "f %u//%u %u//%u %u//%u\n", t[0] + 1, t[0] + 1, t[1] + 1, t[1] + 1, t[2] + 1,
                    t[2] + 1);
    else
      std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const TessellationStats& s) {
  return {{"patches", s.patches},
          {"regular_patches", s.regular_patches},
          {"leaves", s.leaves},
          {"subdivisions", s.subdivisions},
          {"max_depth_reached", s.max_depth_reached},
          {"triangles", s.triangles},
          {"vertices", s.vertices},
          {"euler_characteristic", s.euler_characteristic},
          {"max_weld_distance", s.max_weld_distance}};
}

}  // namespace patchsmith
