#include "patchsmith/obj_io.hpp"

#include "patchsmith/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace patchsmith {

namespace {

std::string_view next_token(std::string_view& line) {
  const auto begin = line.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    line = {};
    return {};
  }
  line.remove_prefix(begin);
  const auto end = line.find_first_of(" \t\r");
  const auto token = line.substr(0, end);
  line.remove_prefix(end == std::string_view::npos ? line.size() : end);
  return token;
}

double parse_double(std::string_view token, std::size_t line_no) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(token) + "'");
  return value;
}

}  // namespace

PolygonSoup parse_obj(std::string_view text) {
  PolygonSoup soup;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    const auto tag = next_token(line);
    if (tag == "v") {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        const auto tok = next_token(line);
        if (tok.empty()) throw ParseError("line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
        p[k] = parse_double(tok, line_no);
      }
      soup.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<VertexId> face;
      for (auto tok = next_token(line); !tok.empty(); tok = next_token(line)) {
        const auto slash = tok.find('/');
        const auto idx_str = tok.substr(0, slash);
        long idx = 0;
        const auto [ptr, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
        if (ec != std::errc() || ptr != idx_str.data() + idx_str.size() || idx == 0)
          throw ParseError("line " + std::to_string(line_no) + ": bad face index '" + std::string(tok) + "'");
        const long n = static_cast<long>(soup.positions.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n)
          throw ParseError("line " + std::to_string(line_no) + ": face index out of range");
        face.push_back(static_cast<VertexId>(resolved));
      }
      if (face.size() < 3) throw ParseError("line " + std::to_string(line_no) + ": face needs 3 or more vertices");
      soup.faces.push_back(std::move(face));
    }
  }
  return soup;
}

HalfEdgeMesh load_obj(std::string_view text) {
  auto soup = parse_obj(text);
  return HalfEdgeMesh::from_polygons(std::move(soup.positions), soup.faces);
}

HalfEdgeMesh load_obj_file(const std::filesystem::path& path) { return load_obj(read_file(path)); }

std::string save_obj(const HalfEdgeMesh& mesh) {
  std::ostringstream os;
  os << std::setprecision(9);
  std::vector<VertexId> remap(mesh.vertex_capacity(), kInvalidId);
  VertexId next = 0;
  for (auto v : mesh.alive_vertices()) {
    remap[v] = next++;
    const auto& p = mesh.position(v);
    os << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  for (auto f : mesh.alive_faces()) {
    os << 'f';
    for (auto v : mesh.face_vertices(f)) os << ' ' << remap[v] + 1;
    os << '\n';
  }
  return os.str();
}

void save_obj_file(const HalfEdgeMesh& mesh, const std::filesystem::path& path) {
  write_file(path, save_obj(mesh));
}

ValidationResult validate_obj(std::string_view text) {
  try {
    load_obj(text);
    return {};
  } catch (const ParseError& e) {
    return {ValidationCode::ParseFailure, e.what()};
  } catch (const OrientationError& e) {
    return {ValidationCode::NonOrientable, e.what()};
  } catch (const BoundaryError& e) {
    return {ValidationCode::OpenBoundary, e.what()};
  } catch (const ManifoldError& e) {
    return {ValidationCode::NonManifold, e.what()};
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace patchsmith
