#pragma once

#include "patchsmith/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace patchsmith {

enum class EditOp { MoveVertex, InsertEdge, DeleteEdge, SetFrame, SetConfig };

const char* to_string(EditOp op);

struct EditMessage {
  std::uint64_t revision = 0;  // revision the client last saw
  EditOp op = EditOp::MoveVertex;
  VertexId vertex = kInvalidId;  // move_vertex
  Vec3 position = Vec3::Zero();
  CornerRef c1, c2;              // insert_edge
  EdgeId edge = kInvalidId;      // delete_edge
  ElementRef owner;              // set_frame
  FrameOverride frame;
  nlohmann::json config = nlohmann::json::object();  // set_config
};

/// Throws ParamError on malformed messages.
EditMessage edit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EditMessage& edit);

/// Unwelded triangles of one patch in the wire precision.
struct PatchBuffers {
  HalfEdgeId patch = kInvalidId;
  std::vector<float> positions;  // xyz per vertex
  std::vector<float> normals;
  std::vector<std::uint32_t> indices;  // three per triangle, local to the patch
};

PatchBuffers patch_buffers(HalfEdgeId patch, const PatchMesh& piece);

struct UpdateMessage {
  std::uint64_t revision = 0;
  bool full = false;
  std::vector<HalfEdgeId> changed;  // patches whose buffers follow
  std::vector<HalfEdgeId> removed;  // patches that no longer exist
  std::vector<PatchBuffers> buffers;
  long euler_characteristic = 0;
  DefectSummary defects;
};

/// Header of an update: everything except the buffer contents, which are
/// listed as `{patch, vertices, triangles}` in the order their binary
/// frames follow (positions, normals, indices per patch).
nlohmann::json update_header(const UpdateMessage& update);
/// Binary frames for the update, three per patch.
std::vector<std::string> update_frames(const UpdateMessage& update);
/// Inverse of update_header + update_frames. Throws ParamError.
UpdateMessage decode_update(const nlohmann::json& header, const std::vector<std::string>& frames);

std::string encode_f32(const std::vector<float>& values);
std::string encode_u32(const std::vector<std::uint32_t>& values);
std::vector<float> decode_f32(std::string_view bytes);
std::vector<std::uint32_t> decode_u32(std::string_view bytes);

/// Welds per-patch buffers the way a client would and returns the closed
/// triangle mesh. Throws TessellationError.
TriMesh weld_buffers(const std::vector<PatchBuffers>& buffers, double tolerance);

struct SessionState {
  HalfEdgeMesh mesh;
  PipelineConfig config;
  FrameSet frames;
  PatchSet patches;
  Tessellation tessellation;  // trees and pieces by patch index
  DefectSummary defects;
  std::uint64_t revision = 0;
};

/// Interactive modeling session over one mesh. Edits are checked against the
/// current revision and applied transactionally: when an edit throws, the
/// state is left as it was.
class Session {
 public:
  Session(HalfEdgeMesh mesh, PipelineConfig config = {});

  const SessionState& state() const { return state_; }
  std::uint64_t revision() const { return state_.revision; }

  /// Throws ConflictError for a stale revision; module errors propagate.
  UpdateMessage apply_edit(const EditMessage& edit);
  UpdateMessage full_sync() const;

  /// Patches rebuilt by the last accepted edit (trees recomputed).
  const std::vector<HalfEdgeId>& last_dirty() const { return last_dirty_; }

  std::string export_obj() const;
  /// Defect table for c1 | g1 | c2 | ring.
  std::string defects_csv(const std::string& metric) const;

 private:
  SessionState state_;
  std::vector<HalfEdgeId> last_dirty_;
};

/// `{type:"error", kind, message, revision}` sent for a rejected edit.
nlohmann::json error_message(const std::string& kind, const std::string& message, std::uint64_t revision);
/// `{id, revision, patches, euler_characteristic, config}` returned when a
/// session is created.
nlohmann::json session_info(const std::string& id, const Session& session);

/// The four frames a patch reads its corners from.
std::array<ElementRef, 4> patch_frame_owners(const HalfEdgeMesh& mesh, HalfEdgeId h);

}  // namespace patchsmith
