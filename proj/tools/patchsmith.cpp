// patchsmith command line: smooth, analyze, kernels, validate.
//
// Exit codes: 0 success; 1 a module error (its name is printed on stderr);
// 2 bad command line. validate uses 0 valid, 1 parse failure,
// 2 non-manifold, 3 non-orientable, 4 open boundary.

#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"
#include "patchsmith/kernel_table.hpp"
#include "patchsmith/obj_io.hpp"
#include "patchsmith/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace patchsmith;

namespace {

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-")
    std::cout << bytes;
  else
    write_file(path, bytes);
}

// kind:id:scale:rotation[:dx:dy:dz]
std::pair<ElementRef, FrameOverride> parse_override(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  if (parts.size() != 4 && parts.size() != 7)
    throw ParamError("frame override '" + text + "' must be kind:id:scale:rotation[:dx:dy:dz]");
  try {
    const auto owner = element_from_json({{"kind", parts[0]}, {"id", std::stoul(parts[1])}});
    FrameOverride o;
    o.scale = std::stod(parts[2]);
    o.rotation = std::stod(parts[3]);
    if (parts.size() == 7) o.offset = Vec3(std::stod(parts[4]), std::stod(parts[5]), std::stod(parts[6]));
    if (!(o.scale > 0.0)) throw ParamError("frame scale must be positive");
    return {owner, o};
  } catch (const std::logic_error&) {
    throw ParamError("frame override '" + text + "' has a malformed number");
  }
}

struct Common {
  PipelineConfig config;
  std::string mode = "modified";
  std::vector<std::string> overrides;
  std::string frames_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-i,--input", config.input, "Input OBJ")->required();
    cmd->add_option("--depth", config.max_depth, "Maximum subdivision depth")->capture_default_str();
    cmd->add_option("--resolution", config.leaf_resolution, "Samples per leaf side (2^k + 1)")->capture_default_str();
    cmd->add_option("--mode", mode, "standard | modified")->capture_default_str();
    cmd->add_option("--ds-iterations", config.ds_iterations, "Doo-Sabin steps per frame")->capture_default_str();
    cmd->add_option("--dual-iterations", config.dual_iterations, "Dual regularization steps (even)")
        ->capture_default_str();
    cmd->add_option("--frame", overrides, "Frame override kind:id:scale:rotation[:dx:dy:dz]");
    cmd->add_option("--frames", frames_path, "Frames JSON to load");
  }

  HalfEdgeMesh finish() {
    config.mode = mode_from_string(mode);
    for (const auto& text : overrides) {
      const auto [owner, o] = parse_override(text);
      config.frame_overrides[owner] = o;
    }
    if (!frames_path.empty()) {
      try {
        config.frames = nlohmann::json::parse(read_file(frames_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(frames_path + ": " + e.what());
      }
    }
    config.validate();
    return load_obj_file(config.input);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bicubic patch smoothing of polygon meshes"};
  app.require_subcommand(1);

  Common smooth_args;
  std::string patches_path, frames_dump;
  auto* smooth = app.add_subcommand("smooth", "Smooth a mesh and write the tessellation as OBJ");
  smooth_args.add_to(smooth);
  smooth->add_option("-o,--output", smooth_args.config.output, "Output OBJ (stdout when omitted)");
  smooth->add_option("--dump-patches", patches_path, "Write the patch set as JSON");
  smooth->add_option("--dump-frames", frames_dump, "Write the frames as JSON");

  Common analyze_args;
  std::string metric, format = "csv", analyze_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Continuity defects, or the mode comparison table");
  analyze_args.add_to(analyze_cmd);
  analyze_cmd->add_option("--metric", metric, "c1 | g1 | c2 | ring; omit for the mode comparison");
  analyze_cmd->add_option("--format", format, "csv | json")->capture_default_str();
  analyze_cmd->add_option("-o,--output", analyze_out, "Output file (stdout when omitted)");

  std::string dump_path;
  auto* kernels = app.add_subcommand("kernels", "Dump the standard and modified subdivision tables");
  kernels->add_option("--dump", dump_path, "Output JSON (stdout when omitted)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check that an OBJ is a closed orientable 2-manifold");
  validate->add_option("input", validate_path, "Input OBJ")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*smooth) {
      const auto mesh = smooth_args.finish();
      const auto result = run_pipeline(mesh, smooth_args.config);
      if (!patches_path.empty()) write_file(patches_path, to_json(result.patches).dump(1) + "\n");
      if (!frames_dump.empty()) write_file(frames_dump, to_json(result.frames).dump(1) + "\n");
      write_output(smooth_args.config.output.string(), export_obj(result.tessellation.mesh));
      std::cerr << stats_json(result).dump() << "\n";
    } else if (*analyze_cmd) {
      const auto mesh = analyze_args.finish();
      const auto& c = analyze_args.config;
      if (format != "csv" && format != "json") throw ParamError("unknown format '" + format + "'");
      if (!metric.empty() && metric != "c1" && metric != "g1" && metric != "c2" && metric != "ring")
        throw ParamError("unknown metric '" + metric + "'");
      const auto patches = build_patches(mesh, build_frames(mesh, c));
      std::string out;
      if (metric.empty()) {
        std::vector<int> depths;
        for (int d = 1; d <= c.max_depth; ++d) depths.push_back(d);
        const auto rows = compare_modes(patches, depths);
        if (format == "csv") {
          out = modes_csv(rows);
        } else {
          nlohmann::json j = nlohmann::json::array();
          for (const auto& r : rows) {
            auto s = to_json(r.summary);
            s["depth"] = r.depth;
            s["mode"] = to_string(r.mode);
            j.push_back(s);
          }
          out = j.dump(1) + "\n";
        }
      } else {
        const auto report = analyze(patches, AnalysisOptions{c.max_depth, c.mode, 32});
        out = format == "csv" ? defects_csv(report, metric) : to_json(report).dump(1) + "\n";
      }
      write_output(analyze_out, out);
    } else if (*kernels) {
      const nlohmann::json j = {{"tables", {to_json(standard_kernels_exact()), to_json(derive_modified_kernels())}}};
      write_output(dump_path, j.dump(1) + "\n");
    } else if (*validate) {
      const auto result = validate_obj(read_file(validate_path));
      if (result.code != ValidationCode::Valid) std::cerr << result.message << "\n";
      return static_cast<int>(result.code);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
