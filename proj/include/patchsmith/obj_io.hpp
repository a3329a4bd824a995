#pragma once

#include "patchsmith/half_edge_mesh.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace patchsmith {

/// Parsed but not yet validated OBJ content. Indices are 0-based.
struct PolygonSoup {
  std::vector<Vec3> positions;
  std::vector<std::vector<VertexId>> faces;
};

/// Reads `v` and `f` records. Texture/normal indices (`f 1/2/3`) and all
/// other record types are ignored; negative indices are resolved relative
/// to the current vertex count. Throws ParseError.
PolygonSoup parse_obj(std::string_view text);

HalfEdgeMesh load_obj(std::string_view text);
HalfEdgeMesh load_obj_file(const std::filesystem::path& path);

/// Alive vertices are renumbered densely in id order; positions are
/// written with 9 significant digits.
std::string save_obj(const HalfEdgeMesh& mesh);
void save_obj_file(const HalfEdgeMesh& mesh, const std::filesystem::path& path);

/// Validator exit codes.
enum class ValidationCode : int {
  Valid = 0,
  ParseFailure = 1,
  NonManifold = 2,
  NonOrientable = 3,
  OpenBoundary = 4,
};

struct ValidationResult {
  ValidationCode code = ValidationCode::Valid;
  std::string message;
};

ValidationResult validate_obj(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace patchsmith
