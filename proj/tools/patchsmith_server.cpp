// Modeling session server: HTTP endpoints plus one WebSocket per session.

#include "patchsmith/errors.hpp"
#include "patchsmith/server.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iostream>

using namespace patchsmith;

namespace {
void on_signal(int) { std::_Exit(0); }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive patch modeling server"};
  ServerOptions options;
  std::string mode = "modified";
  std::string static_root;
  app.add_option("--address", options.address, "Listen address")->capture_default_str();
  app.add_option("--port", options.port, "Listen port (0 picks one)")->capture_default_str();
  app.add_option("--depth", options.config.max_depth, "Maximum subdivision depth")->capture_default_str();
  app.add_option("--resolution", options.config.leaf_resolution, "Samples per leaf side")->capture_default_str();
  app.add_option("--mode", mode, "standard | modified")->capture_default_str();
  app.add_option("--static", static_root, "Directory of web client files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    options.config.mode = mode_from_string(mode);
    options.config.validate();
    options.static_root = static_root;
    Server server(options);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto port = server.start();
    std::cerr << "listening on " << options.address << ":" << port << "\n";
    server.wait();
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
