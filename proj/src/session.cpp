#include "patchsmith/session.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"
#include "patchsmith/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace patchsmith {

const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::MoveVertex: return "move_vertex";
    case EditOp::InsertEdge: return "insert_edge";
    case EditOp::DeleteEdge: return "delete_edge";
    case EditOp::SetFrame: return "set_frame";
    case EditOp::SetConfig: return "set_config";
  }
  return "?";
}

namespace {

CornerRef corner_from_json(const nlohmann::json& j) {
  CornerRef c;
  c.face = j.at("face").get<FaceId>();
  c.vertex = j.at("vertex").get<VertexId>();
  c.occurrence = j.value("occurrence", 0u);
  return c;
}

nlohmann::json to_json(const CornerRef& c) {
  return {{"face", c.face}, {"vertex", c.vertex}, {"occurrence", c.occurrence}};
}

}  // namespace

EditMessage edit_from_json(const nlohmann::json& j) {
  try {
    EditMessage e;
    e.revision = j.at("revision").get<std::uint64_t>();
    const auto op = j.at("op").get<std::string>();
    if (op == "move_vertex") {
      e.op = EditOp::MoveVertex;
      e.vertex = j.at("id").get<VertexId>();
      e.position = vec3_from_json(j.at("position"));
    } else if (op == "insert_edge") {
      e.op = EditOp::InsertEdge;
      e.c1 = corner_from_json(j.at("c1"));
      e.c2 = corner_from_json(j.at("c2"));
    } else if (op == "delete_edge") {
      e.op = EditOp::DeleteEdge;
      e.edge = j.at("id").get<EdgeId>();
    } else if (op == "set_frame") {
      e.op = EditOp::SetFrame;
      e.owner = element_from_json(j.at("owner"));
      e.frame = override_from_json(j);
    } else if (op == "set_config") {
      e.op = EditOp::SetConfig;
      e.config = j.at("config");
    } else {
      throw ParamError("unknown edit op '" + op + "'");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParamError(std::string("bad edit message: ") + ex.what());
  }
}

nlohmann::json to_json(const EditMessage& e) {
  nlohmann::json j = {{"revision", e.revision}, {"op", to_string(e.op)}};
  switch (e.op) {
    case EditOp::MoveVertex:
      j["id"] = e.vertex;
      j["position"] = to_json(e.position);
      break;
    case EditOp::InsertEdge:
      j["c1"] = to_json(e.c1);
      j["c2"] = to_json(e.c2);
      break;
    case EditOp::DeleteEdge: j["id"] = e.edge; break;
    case EditOp::SetFrame:
      j.update(to_json(e.frame));
      j["owner"] = to_json(e.owner);
      break;
    case EditOp::SetConfig: j["config"] = e.config; break;
  }
  return j;
}

PatchBuffers patch_buffers(HalfEdgeId patch, const PatchMesh& piece) {
  PatchBuffers b;
  b.patch = patch;
  b.positions.reserve(3 * piece.positions.size());
  for (const auto& p : piece.positions)
    for (int k = 0; k < 3; ++k) b.positions.push_back(static_cast<float>(p[k]));
  b.normals.reserve(3 * piece.normals.size());
  for (const auto& n : piece.normals)
    for (int k = 0; k < 3; ++k) b.normals.push_back(static_cast<float>(n[k]));
  b.indices.reserve(3 * piece.triangles.size());
  for (const auto& t : piece.triangles)
    for (int k = 0; k < 3; ++k) b.indices.push_back(t[k]);
  return b;
}

namespace {

template <class T>
std::string encode_le(const std::vector<T>& values) {
  static_assert(sizeof(T) == 4);
  std::string out(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int k = 0; k < 4; ++k) out[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
  }
  return out;
}

template <class T>
std::vector<T> decode_le(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw ParamError("buffer length is not a multiple of 4");
  std::vector<T> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= std::uint32_t(static_cast<unsigned char>(bytes[4 * i + k])) << (8 * k);
    out[i] = std::bit_cast<T>(bits);
  }
  return out;
}

}  // namespace

std::string encode_f32(const std::vector<float>& v) { return encode_le(v); }
std::string encode_u32(const std::vector<std::uint32_t>& v) { return encode_le(v); }
std::vector<float> decode_f32(std::string_view bytes) { return decode_le<float>(bytes); }
std::vector<std::uint32_t> decode_u32(std::string_view bytes) { return decode_le<std::uint32_t>(bytes); }

nlohmann::json update_header(const UpdateMessage& u) {
  nlohmann::json buffers = nlohmann::json::array();
  for (const auto& b : u.buffers)
    buffers.push_back({{"patch", b.patch}, {"vertices", b.positions.size() / 3}, {"triangles", b.indices.size() / 3}});
  return {{"type", "update"},
          {"revision", u.revision},
          {"full", u.full},
          {"changed", u.changed},
          {"removed", u.removed},
          {"buffers", buffers},
          {"euler_characteristic", u.euler_characteristic},
          {"defect_summary", to_json(u.defects)}};
}

std::vector<std::string> update_frames(const UpdateMessage& u) {
  std::vector<std::string> frames;
  for (const auto& b : u.buffers) {
    frames.push_back(encode_f32(b.positions));
    frames.push_back(encode_f32(b.normals));
    frames.push_back(encode_u32(b.indices));
  }
  return frames;
}

UpdateMessage decode_update(const nlohmann::json& h, const std::vector<std::string>& frames) {
  try {
    UpdateMessage u;
    u.revision = h.at("revision").get<std::uint64_t>();
    u.full = h.at("full").get<bool>();
    u.changed = h.at("changed").get<std::vector<HalfEdgeId>>();
    u.removed = h.at("removed").get<std::vector<HalfEdgeId>>();
    u.euler_characteristic = h.at("euler_characteristic").get<long>();
    const auto& d = h.at("defect_summary");
    u.defects.max_c1 = d.at("max_c1").get<double>();
    u.defects.max_g1 = d.at("max_g1").get<double>();
    u.defects.max_c2 = d.at("max_c2").get<double>();
    u.defects.max_c1_ev = d.at("max_c1_ev").get<double>();
    u.defects.max_g1_ev = d.at("max_g1_ev").get<double>();
    u.defects.max_normal_spread_ev = d.at("max_normal_spread_ev").get<double>();
    u.defects.max_unbroken_line_ev = d.at("max_unbroken_line_ev").get<double>();
    u.defects.max_planarity = d.at("max_planarity_ev").get<double>();
    const auto& list = h.at("buffers");
    if (frames.size() != 3 * list.size()) throw ParamError("update needs three binary frames per patch");
    for (std::size_t i = 0; i < list.size(); ++i) {
      PatchBuffers b;
      b.patch = list[i].at("patch").get<HalfEdgeId>();
      b.positions = decode_f32(frames[3 * i]);
      b.normals = decode_f32(frames[3 * i + 1]);
      b.indices = decode_u32(frames[3 * i + 2]);
      if (b.positions.size() != 3 * list[i].at("vertices").get<std::size_t>() ||
          b.normals.size() != b.positions.size() ||
          b.indices.size() != 3 * list[i].at("triangles").get<std::size_t>())
        throw ParamError("buffer sizes do not match the header");
      u.buffers.push_back(std::move(b));
    }
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad update message: ") + e.what());
  }
}

TriMesh weld_buffers(const std::vector<PatchBuffers>& buffers, double tolerance) {
  std::vector<PatchMesh> pieces(buffers.size());
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const auto& b = buffers[i];
    auto& p = pieces[i];
    for (std::size_t k = 0; k + 2 < b.positions.size(); k += 3) {
      p.positions.emplace_back(b.positions[k], b.positions[k + 1], b.positions[k + 2]);
      p.normals.emplace_back(b.normals[k], b.normals[k + 1], b.normals[k + 2]);
    }
    for (std::size_t k = 0; k + 2 < b.indices.size(); k += 3) {
      for (int c = 0; c < 3; ++c)
        if (b.indices[k + c] >= p.positions.size()) throw TessellationError("buffer index out of range");
      p.triangles.push_back({b.indices[k], b.indices[k + 1], b.indices[k + 2]});
    }
  }
  return weld(pieces, tolerance);
}

nlohmann::json error_message(const std::string& kind, const std::string& message, std::uint64_t revision) {
  return {{"type", "error"}, {"kind", kind}, {"message", message}, {"revision", revision}};
}

nlohmann::json session_info(const std::string& id, const Session& session) {
  const auto& st = session.state();
  return {{"id", id},
          {"revision", st.revision},
          {"patches", st.patches.size()},
          {"euler_characteristic", st.tessellation.stats.euler_characteristic},
          {"config", to_json(st.config)}};
}

std::array<ElementRef, 4> patch_frame_owners(const HalfEdgeMesh& mesh, HalfEdgeId h) {
  return {ElementRef{ElementKind::Face, mesh.face(h)}, ElementRef{ElementKind::Edge, HalfEdgeMesh::edge(mesh.prev(h))},
          ElementRef{ElementKind::Vertex, mesh.origin(h)}, ElementRef{ElementKind::Edge, HalfEdgeMesh::edge(h)}};
}

namespace {

using OwnerSet = std::set<ElementRef>;

void add_face_closure(const HalfEdgeMesh& mesh, FaceId f, OwnerSet& out) {
  if (!mesh.face_alive(f)) return;
  out.insert({ElementKind::Face, f});
  for (auto h : mesh.face_loop(f)) {
    out.insert({ElementKind::Vertex, mesh.origin(h)});
    out.insert({ElementKind::Edge, HalfEdgeMesh::edge(h)});
  }
}

// Faces that appeared, died or whose loop changed.
std::vector<FaceId> changed_faces(const HalfEdgeMesh& before, const HalfEdgeMesh& after) {
  std::vector<FaceId> out;
  const auto n = std::max(before.face_capacity(), after.face_capacity());
  for (FaceId f = 0; f < n; ++f) {
    const bool a = before.face_alive(f), b = after.face_alive(f);
    if (a != b || (a && before.face_loop(f) != after.face_loop(f))) out.push_back(f);
  }
  return out;
}

FrameSet rebuild_frames(const HalfEdgeMesh& mesh, const PipelineConfig& config, const FrameSet& old,
                        const OwnerSet& dirty) {
  FrameSet set;
  set.bbox_diagonal = mesh.bounds().diagonal();
  set.face_frame.assign(mesh.face_capacity(), kInvalidId);
  set.vertex_frame.assign(mesh.vertex_capacity(), kInvalidId);
  set.edge_frame.assign(mesh.edge_capacity(), kInvalidId);
  // Same order as assign_frames: faces, vertices, edges.
  std::vector<ElementRef> order;
  for (auto f : mesh.alive_faces()) order.push_back({ElementKind::Face, f});
  for (auto v : mesh.alive_vertices()) order.push_back({ElementKind::Vertex, v});
  for (auto e : mesh.alive_edges()) order.push_back({ElementKind::Edge, e});
  set.frames.resize(order.size());
  parallel_for(order.size(), [&](std::size_t i) {
    const auto* cached = old.find(order[i]);
    set.frames[i] = (cached && !dirty.count(order[i])) ? *cached
                                                       : build_frame(mesh, order[i], config, set.bbox_diagonal);
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& index = order[i].kind == ElementKind::Face     ? set.face_frame
                  : order[i].kind == ElementKind::Vertex ? set.vertex_frame
                                                         : set.edge_frame;
    index[order[i].id] = static_cast<std::uint32_t>(i);
  }
  return set;
}

bool owner_alive(const HalfEdgeMesh& mesh, const ElementRef& o) {
  switch (o.kind) {
    case ElementKind::Face: return mesh.face_alive(o.id);
    case ElementKind::Vertex: return mesh.vertex_alive(o.id);
    case ElementKind::Edge: return mesh.edge_alive(o.id);
  }
  return false;
}

AnalysisOptions analysis_options(const PipelineConfig& c) {
  AnalysisOptions a;
  a.depth = c.max_depth;
  a.mode = c.mode;
  return a;
}

std::vector<HalfEdgeId> patch_ids(const PatchSet& patches) {
  std::vector<HalfEdgeId> ids;
  ids.reserve(patches.size());
  for (const auto& p : patches.patches) ids.push_back(p.id);
  return ids;
}

}  // namespace

Session::Session(HalfEdgeMesh mesh, PipelineConfig config) {
  auto r = run_pipeline(mesh, config);
  state_.mesh = std::move(mesh);
  state_.config = std::move(config);
  state_.frames = std::move(r.frames);
  state_.patches = std::move(r.patches);
  state_.tessellation = std::move(r.tessellation);
  state_.defects = r.defects;
}

UpdateMessage Session::apply_edit(const EditMessage& edit) {
  if (edit.revision != state_.revision)
    throw ConflictError("edit expects revision " + std::to_string(edit.revision) + " but the session is at " +
                        std::to_string(state_.revision));

  SessionState next;
  next.mesh = state_.mesh;
  next.config = state_.config;
  OwnerSet dirty;
  bool rebuild_all = false;

  switch (edit.op) {
    case EditOp::MoveVertex: {
      if (!next.mesh.vertex_alive(edit.vertex))
        throw ParamError("no vertex " + std::to_string(edit.vertex));
      if (!edit.position.allFinite()) throw ParamError("vertex position must be finite");
      next.mesh.set_position(edit.vertex, edit.position);
      for (auto h : next.mesh.vertex_fan(edit.vertex)) add_face_closure(next.mesh, next.mesh.face(h), dirty);
      break;
    }
    case EditOp::InsertEdge:
    case EditOp::DeleteEdge: {
      if (edit.op == EditOp::InsertEdge)
        next.mesh.insert_edge(edit.c1, edit.c2);
      else
        next.mesh.delete_edge(edit.edge);
      for (auto f : changed_faces(state_.mesh, next.mesh)) {
        add_face_closure(state_.mesh, f, dirty);
        add_face_closure(next.mesh, f, dirty);
      }
      for (auto it = next.config.frame_overrides.begin(); it != next.config.frame_overrides.end();)
        it = owner_alive(next.mesh, it->first) ? std::next(it) : next.config.frame_overrides.erase(it);
      break;
    }
    case EditOp::SetFrame: {
      if (!state_.frames.find(edit.owner))
        throw ParamError(std::string("no ") + to_string(edit.owner.kind) + " frame " + std::to_string(edit.owner.id));
      if (!(edit.frame.scale > 0.0) || !std::isfinite(edit.frame.scale) || !std::isfinite(edit.frame.rotation) ||
          !edit.frame.offset.allFinite())
        throw ParamError("frame parameters must be finite with positive scale");
      next.config.frame_overrides[edit.owner] = edit.frame;
      dirty.insert(edit.owner);
      break;
    }
    case EditOp::SetConfig: {
      update_config(next.config, edit.config);
      next.config.validate();
      rebuild_all = true;
      break;
    }
  }

  const auto tess = next.config.tessellation_options();
  const auto& old = state_;
  std::vector<char> tree_dirty, piece_dirty;
  if (rebuild_all) {
    auto r = run_pipeline(next.mesh, next.config);
    next.frames = std::move(r.frames);
    next.patches = std::move(r.patches);
    next.tessellation = std::move(r.tessellation);
    next.defects = r.defects;
    tree_dirty.assign(next.patches.size(), 1);
    piece_dirty.assign(next.patches.size(), 1);
  } else {
    next.frames = rebuild_frames(next.mesh, next.config, old.frames, dirty);
    next.patches = build_patches(next.mesh, next.frames);
    const auto n = next.patches.size();

    auto old_index = [&](HalfEdgeId h) {
      return h < old.patches.index_of.size() ? old.patches.index_of[h] : kInvalidId;
    };
    tree_dirty.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto h = next.patches.patches[i].id;
      if (old_index(h) == kInvalidId) {
        tree_dirty[i] = 1;
        continue;
      }
      for (const auto& o : patch_frame_owners(next.mesh, h))
        if (dirty.count(o)) tree_dirty[i] = 1;
    }
    piece_dirty = tree_dirty;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = next.patches.patches[i];
      const auto oi = old_index(p.id);
      for (int b = 0; b < 4; ++b) {
        const auto& nb = p.neighbors[b];
        if (nb.patch != kInvalidId && tree_dirty[nb.patch]) piece_dirty[i] = 1;
        if (oi != kInvalidId) {
          const auto& ob = old.patches.patches[oi].neighbors[b];
          const auto old_id = ob.patch == kInvalidId ? kInvalidId : old.patches.patches[ob.patch].id;
          const auto new_id = nb.patch == kInvalidId ? kInvalidId : next.patches.patches[nb.patch].id;
          if (old_id != new_id || ob.boundary != nb.boundary) piece_dirty[i] = 1;
        }
      }
    }

    auto& t = next.tessellation;
    const auto& table = kernels_for(tess.mode);
    t.trees.resize(n);
    parallel_for(n, [&](std::size_t i) {
      const auto& p = next.patches.patches[i];
      if (tree_dirty[i]) {
        t.trees[i] = build_patch_tree(p, tess.max_depth, table);
      } else {
        // Only the root carries the patch's neighbour links, which hold
        // patch indices that may have shifted.
        t.trees[i] = old.tessellation.trees[old_index(p.id)];
        t.trees[i].nodes[0].patch = p;
      }
    });
    t.pieces.resize(n);
    parallel_for(n, [&](std::size_t i) {
      t.pieces[i] = piece_dirty[i] ? tessellate_patch(next.patches, t.trees, static_cast<std::uint32_t>(i), tess)
                                   : old.tessellation.pieces[old_index(next.patches.patches[i].id)];
    });
    double merged = 0.0;
    t.mesh = weld(t.pieces, tess.weld_tolerance * next.patches.bbox_diagonal, &merged);
    t.stats = tessellation_stats(next.patches, t.trees, t.mesh, merged);
    next.defects = analyze(next.patches, t.trees, analysis_options(next.config)).summary;
  }
  next.revision = state_.revision + 1;

  UpdateMessage u;
  u.revision = next.revision;
  u.euler_characteristic = next.tessellation.stats.euler_characteristic;
  u.defects = next.defects;
  std::vector<HalfEdgeId> dirty_ids;
  for (std::size_t i = 0; i < next.patches.size(); ++i) {
    const auto id = next.patches.patches[i].id;
    if (tree_dirty[i]) dirty_ids.push_back(id);
    if (piece_dirty[i]) {
      u.changed.push_back(id);
      u.buffers.push_back(patch_buffers(id, next.tessellation.pieces[i]));
    }
  }
  for (auto id : patch_ids(state_.patches))
    if (id >= next.patches.index_of.size() || next.patches.index_of[id] == kInvalidId) u.removed.push_back(id);

  state_ = std::move(next);
  last_dirty_ = std::move(dirty_ids);
  return u;
}

UpdateMessage Session::full_sync() const {
  UpdateMessage u;
  u.revision = state_.revision;
  u.full = true;
  u.euler_characteristic = state_.tessellation.stats.euler_characteristic;
  u.defects = state_.defects;
  for (std::size_t i = 0; i < state_.patches.size(); ++i) {
    const auto id = state_.patches.patches[i].id;
    u.changed.push_back(id);
    u.buffers.push_back(patch_buffers(id, state_.tessellation.pieces[i]));
  }
  return u;
}

std::string Session::export_obj() const { return patchsmith::export_obj(state_.tessellation.mesh); }

std::string Session::defects_csv(const std::string& metric) const {
  if (metric != "c1" && metric != "g1" && metric != "c2" && metric != "ring")
    throw ParamError("unknown metric '" + metric + "'");
  const auto report = analyze(state_.patches, state_.tessellation.trees, analysis_options(state_.config));
  return patchsmith::defects_csv(report, metric);
}

}  // namespace patchsmith
