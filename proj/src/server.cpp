#include "patchsmith/server.hpp"

#include "patchsmith/errors.hpp"
#include "patchsmith/obj_io.hpp"
#include "patchsmith/session.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace patchsmith {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct SessionEntry {
  std::mutex mutex;
  std::unique_ptr<Session> session;
};

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response reply(const Request& req, http::status status, std::string body, const char* type) {
  Response res{status, req.version()};
  res.set(http::field::content_type, type);
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

std::string_view target_of(const Request& req) { return {req.target().data(), req.target().size()}; }

Response error_reply(const Request& req, http::status status, const std::string& kind, const std::string& message) {
  return reply(req, status, nlohmann::json{{"error", kind}, {"message", message}}.dump(), "application/json");
}

std::vector<std::string> split_path(std::string_view target) {
  target = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < target.size()) {
    auto end = target.find('/', start);
    if (end == std::string_view::npos) end = target.size();
    if (end > start) parts.emplace_back(target.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string query_param(std::string_view target, const std::string& key) {
  const std::string t(target);
  const auto q = t.find('?');
  if (q == std::string::npos) return {};
  std::size_t pos = q + 1;
  while (pos < t.size()) {
    auto end = t.find('&', pos);
    if (end == std::string::npos) end = t.size();
    const auto eq = t.find('=', pos);
    if (eq < end && t.compare(pos, eq - pos, key) == 0) return t.substr(eq + 1, end - eq - 1);
    pos = end + 1;
  }
  return {};
}

const char* mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread accept_thread;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
  std::mt19937_64 id_rng{std::random_device{}()};

  std::mutex conn_mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
  std::map<std::uint64_t, std::shared_ptr<tcp::socket>> sockets;
  std::map<std::uint64_t, std::thread> workers;
  std::vector<std::thread> finished;
  std::uint64_t next_conn = 0;

  std::shared_ptr<SessionEntry> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::string add(std::unique_ptr<Session> s) {
    std::lock_guard lock(sessions_mutex);
    char buf[17];
    std::string id;
    do {
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng()));
      id = buf;
    } while (sessions.count(id));
    auto entry = std::make_shared<SessionEntry>();
    entry->session = std::move(s);
    sessions[id] = entry;
    return id;
  }

  Response handle_http(const Request& req) {
    const auto parts = split_path(target_of(req));
    try {
      if (req.method() == http::verb::post && parts.size() == 1 && parts[0] == "session") {
        auto session = std::make_unique<Session>(load_obj(req.body()), options.config);
        const auto* s = session.get();
        const auto id = add(std::move(session));
        return reply(req, http::status::created, session_info(id, *s).dump(), "application/json");
      }
      if (req.method() == http::verb::get && parts.size() == 3 && parts[0] == "session") {
        auto entry = find(parts[1]);
        if (!entry) return error_reply(req, http::status::not_found, "NotFound", "no session " + parts[1]);
        std::lock_guard lock(entry->mutex);
        if (parts[2] == "export.obj") return reply(req, http::status::ok, entry->session->export_obj(), "model/obj");
        if (parts[2] == "defects.csv") {
          auto metric = query_param(target_of(req), "metric");
          if (metric.empty()) metric = "c1";
          return reply(req, http::status::ok, entry->session->defects_csv(metric), "text/csv");
        }
      }
      if (req.method() == http::verb::get && !options.static_root.empty() && !parts.empty()) {
        for (const auto& p : parts)
          if (p == "..") return error_reply(req, http::status::bad_request, "BadPath", "bad path");
        auto path = options.static_root;
        for (const auto& p : parts) path /= p;
        if (std::filesystem::is_regular_file(path))
          return reply(req, http::status::ok, read_file(path), mime_type(path));
      }
      if (req.method() == http::verb::get && parts.empty() && !options.static_root.empty() &&
          std::filesystem::is_regular_file(options.static_root / "index.html"))
        return reply(req, http::status::ok, read_file(options.static_root / "index.html"), "text/html");
      return error_reply(req, http::status::not_found, "NotFound", std::string(target_of(req)));
    } catch (const Error& e) {
      return error_reply(req, http::status::bad_request, e.kind(), e.what());
    }
  }

  static void send_update(websocket::stream<tcp::socket&>& ws, const UpdateMessage& u) {
    ws.text(true);
    ws.write(net::buffer(update_header(u).dump()));
    ws.binary(true);
    for (const auto& frame : update_frames(u)) ws.write(net::buffer(frame));
  }

  static void send_json(websocket::stream<tcp::socket&>& ws, const nlohmann::json& j) {
    ws.text(true);
    ws.write(net::buffer(j.dump()));
  }

  void handle_websocket(tcp::socket& socket, const Request& req, const std::shared_ptr<SessionEntry>& entry) {
    websocket::stream<tcp::socket&> ws{socket};
    ws.read_message_max(16 << 20);
    ws.accept(req);
    {
      std::lock_guard lock(entry->mutex);
      send_update(ws, entry->session->full_sync());
    }
    for (;;) {
      beast::flat_buffer buffer;
      ws.read(buffer);
      const auto text = beast::buffers_to_string(buffer.data());
      std::lock_guard lock(entry->mutex);
      auto& session = *entry->session;
      try {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParamError(std::string("bad JSON: ") + e.what());
        }
        if (j.is_object() && j.value("op", "") == "full_sync")
          send_update(ws, session.full_sync());
        else
          send_update(ws, session.apply_edit(edit_from_json(j)));
      } catch (const Error& e) {
        send_json(ws, error_message(e.kind(), e.what(), session.revision()));
      }
    }
  }

  void serve_connection(const std::shared_ptr<tcp::socket>& socket) {
    try {
      beast::flat_buffer buffer;
      for (;;) {
        http::request_parser<http::string_body> parser;
        parser.body_limit(64u << 20);
        http::read(*socket, buffer, parser);
        auto req = parser.release();
        if (websocket::is_upgrade(req)) {
          const auto parts = split_path(target_of(req));
          std::shared_ptr<SessionEntry> entry;
          if (parts.size() == 3 && parts[0] == "session" && parts[2] == "ws") entry = find(parts[1]);
          if (!entry) {
            http::write(*socket, error_reply(req, http::status::not_found, "NotFound", std::string(target_of(req))));
            return;
          }
          handle_websocket(*socket, req, entry);
          return;
        }
        auto res = handle_http(req);
        http::write(*socket, res);
        if (!res.keep_alive()) break;
      }
      beast::error_code ec;
      socket->shutdown(tcp::socket::shutdown_send, ec);
    } catch (const std::exception&) {
      // Connection closed or broken; nothing to report.
    }
  }

  void accept_loop() {
    for (;;) {
      auto socket = std::make_shared<tcp::socket>(ioc);
      beast::error_code ec;
      acceptor.accept(*socket, ec);
      std::lock_guard lock(conn_mutex);
      if (stopped) return;
      if (ec) continue;
      const auto id = next_conn++;
      sockets[id] = socket;
      workers[id] = std::thread([this, id, socket] {
        serve_connection(socket);
        std::lock_guard done(conn_mutex);
        sockets.erase(id);
        if (auto it = workers.find(id); it != workers.end()) {
          finished.push_back(std::move(it->second));
          workers.erase(it);
        }
      });
      for (auto& t : finished)
        if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
      finished.clear();
    }
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) { impl_->options = std::move(options); }

Server::~Server() { stop(); }

unsigned short Server::start() {
  auto& d = *impl_;
  const tcp::endpoint endpoint{net::ip::make_address(d.options.address), d.options.port};
  d.acceptor.open(endpoint.protocol());
  d.acceptor.set_option(net::socket_base::reuse_address(true));
  d.acceptor.bind(endpoint);
  d.acceptor.listen();
  const auto port = d.acceptor.local_endpoint().port();
  d.accept_thread = std::thread([&d] { d.accept_loop(); });
  return port;
}

void Server::stop() {
  auto& d = *impl_;
  tcp::endpoint local;
  {
    std::lock_guard lock(d.conn_mutex);
    if (d.stopped || !d.acceptor.is_open()) {
      d.stopped = true;
      return;
    }
    d.stopped = true;
    local = d.acceptor.local_endpoint();
  }
  d.stopped_cv.notify_all();
  // A blocking accept does not return when the acceptor is closed from
  // another thread; connect once to wake it.
  {
    beast::error_code ec;
    tcp::socket wake(d.ioc);
    if (local.address().is_unspecified()) local.address(net::ip::make_address("127.0.0.1"));
    wake.connect(local, ec);
  }
  if (d.accept_thread.joinable()) d.accept_thread.join();
  {
    std::lock_guard lock(d.conn_mutex);
    beast::error_code ec;
    d.acceptor.close(ec);
    for (auto& [id, s] : d.sockets) s->shutdown(tcp::socket::shutdown_both, ec);
  }
  // Workers move themselves to `finished` when done; join whatever is left.
  for (;;) {
    std::thread t;
    {
      std::lock_guard lock(d.conn_mutex);
      if (!d.finished.empty()) {
        t = std::move(d.finished.back());
        d.finished.pop_back();
      } else if (!d.workers.empty()) {
        t = std::move(d.workers.begin()->second);
        d.workers.erase(d.workers.begin());
      } else {
        break;
      }
    }
    if (t.joinable()) t.join();
  }
}

void Server::wait() {
  auto& d = *impl_;
  std::unique_lock lock(d.conn_mutex);
  d.stopped_cv.wait(lock, [&] { return d.stopped; });
}

}  // namespace patchsmith
